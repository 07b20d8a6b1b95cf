"""Command-line interface.

Every subcommand reads an optional JSON config (``--config``), applies flag
overrides, validates, and writes one canonical JSON document.  Exit status is
0 on success or PASS, 1 on FAIL and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from .cmfield import CMField, NotSplit, WeightTuple
from .eisenstein import (
    cusp_from_spec,
    eisenstein_qexp,
    function_from_spec,
    integrate_measure,
    make_ring,
    perturb,
    random_locally_constant,
    standard_cusp,
    symmetrize,
    unit_cusp,
    verify_identity,
)
from .hermitian import enumerate_positive
from .qexp import theta_pullback, to_document
from .reps import HighestWeight, decompose_tau, highest_weight_vector, restrict_decompose, weyl_dimension

COMMANDS = ("branch", "hwvec", "enum", "eis", "theta", "integrate", "verify")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class RunConfig:
    delta: int = -1
    p: int = 5
    n: int = 2
    bound: Fraction = Fraction(3)
    precision: int | None = None
    k: int = 2
    nu: int = 0
    lam: tuple[int, ...] = ()
    function: dict | None = None
    cusp: Any = "standard"
    output: str | None = None
    workers: int | None = None
    seed: int = 0
    samples: int = 1
    kind: str | None = None
    d: int = 0
    q: int = 1
    s: int = 1
    r: int | None = None
    perturb: dict | None = None

    @property
    def weight(self) -> WeightTuple:
        return WeightTuple(self.k, self.nu)

    def field(self) -> CMField:
        try:
            return CMField(self.delta, self.p)
        except NotSplit as exc:
            raise ConfigError("field.p", str(exc)) from exc
        except ValueError as exc:
            raise ConfigError("field", str(exc)) from exc


def _load_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc


def _int(value, path: str) -> int:
    if isinstance(value, bool):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected an integer, got {value!r}") from None


def _parse_lambda(value, path: str = "lambda") -> tuple[int, ...]:
    if value in (None, "", "trivial"):
        return ()
    if isinstance(value, str):
        value = [v for v in value.replace(" ", "").split(",") if v]
    parts = tuple(_int(v, path) for v in value)
    try:
        HighestWeight(parts)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc
    return parts


def build_config(args: argparse.Namespace) -> RunConfig:
    """File values first, then flags (flags win)."""
    doc = _load_file(getattr(args, "config", None))
    if not isinstance(doc, dict):
        raise ConfigError("config", "top level must be an object")
    cfg = RunConfig()
    fld = doc.get("field", {})
    if not isinstance(fld, dict):
        raise ConfigError("field", "must be an object with delta and p")
    if "delta" in fld:
        cfg.delta = _int(fld["delta"], "field.delta")
    if "p" in fld:
        cfg.p = _int(fld["p"], "field.p")
    for key in ("n", "precision", "workers", "seed", "samples", "d", "q", "s", "r"):
        if doc.get(key) is not None:
            setattr(cfg, key, _int(doc[key], key))
    if "bound" in doc:
        try:
            cfg.bound = Fraction(doc["bound"])
        except (TypeError, ValueError):
            raise ConfigError("bound", f"expected a number, got {doc['bound']!r}") from None
    wt = doc.get("weight", {})
    if isinstance(wt, dict):
        if "k" in wt:
            cfg.k = _int(wt["k"], "weight.k")
        if "nu" in wt:
            cfg.nu = _int(wt["nu"], "weight.nu")
    else:
        raise ConfigError("weight", "must be an object with k and nu")
    if "lambda" in doc:
        cfg.lam = _parse_lambda(doc["lambda"])
    if doc.get("mode") == "exact":
        cfg.precision = None
    elif isinstance(doc.get("mode"), dict):
        cfg.precision = _int(doc["mode"].get("padic", {}).get("j"), "mode.padic.j")
    if "function" in doc:
        cfg.function = _function_doc(doc["function"])
    cfg.cusp = doc.get("cusp", cfg.cusp)
    cfg.output = doc.get("output")
    cfg.kind = doc.get("kind")
    if "perturb" in doc:
        cfg.perturb = _perturb_doc(doc["perturb"])

    overrides = {
        "delta": "delta", "p": "p", "n": "n", "precision": "precision", "k": "k", "nu": "nu",
        "workers": "workers", "seed": "seed", "samples": "samples", "output": "output",
        "kind": "kind", "d": "d", "q": "q", "s": "s", "r": "r",
    }
    for flag, attr in overrides.items():
        v = getattr(args, flag, None)
        if v is not None:
            setattr(cfg, attr, v)
    if getattr(args, "bound", None) is not None:
        try:
            cfg.bound = Fraction(args.bound)
        except ValueError:
            raise ConfigError("bound", f"expected a number, got {args.bound!r}") from None
    if getattr(args, "exact", False):
        cfg.precision = None
    if getattr(args, "lam", None) is not None:
        cfg.lam = _parse_lambda(args.lam)
    if getattr(args, "function", None):
        cfg.function = _function_doc(args.function)
    if getattr(args, "cusp", None):
        cfg.cusp = args.cusp
    if getattr(args, "perturb", None):
        try:
            cfg.perturb = _perturb_doc(json.loads(args.perturb))
        except json.JSONDecodeError as exc:
            raise ConfigError("perturb", f"invalid JSON: {exc}") from exc
    return cfg


def _perturb_doc(value) -> dict:
    if not isinstance(value, dict) or "x" not in value or "y" not in value:
        raise ConfigError("perturb", "expected an object with x, y and optional amount")
    x = [_int(v, "perturb.x") for v in value["x"]]
    y = [_int(v, "perturb.y") for v in value["y"]]
    if len(x) != 2:
        raise ConfigError("perturb.x", "expected two residues")
    return {"x": x, "y": y, "amount": _int(value.get("amount", 1), "perturb.amount")}


def _function_doc(value) -> dict:
    if isinstance(value, dict):
        return value
    if isinstance(value, str):
        if value.lstrip().startswith("{"):
            try:
                return json.loads(value)
            except json.JSONDecodeError as exc:
                raise ConfigError("function", f"invalid JSON: {exc}") from exc
        loaded = _load_file(value)
        if not isinstance(loaded, dict):
            raise ConfigError("function", "function description must be an object")
        return loaded
    raise ConfigError("function", f"unsupported value {value!r}")


def _validate_common(cfg: RunConfig, need_weight: bool = False, need_even: bool = False) -> CMField:
    fld = cfg.field()
    if cfg.n < 1:
        raise ConfigError("n", "must be at least 1")
    if cfg.bound < 1:
        raise ConfigError("bound", "must be at least 1")
    if cfg.precision is not None and cfg.precision < 1:
        raise ConfigError("precision", "must be at least 1")
    if need_weight and cfg.k < cfg.n:
        raise ConfigError("weight.k", f"k={cfg.k} must be at least n={cfg.n}")
    if need_even and cfg.n % 2:
        raise ConfigError("n", f"pullback needs even n, got {cfg.n}")
    if cfg.lam and need_even and HighestWeight(cfg.lam).nonzero_parts > cfg.n // 2:
        raise ConfigError("lambda", f"{cfg.lam} does not fit {cfg.n // 2}x{cfg.n // 2} blocks")
    return fld


def _cusp(cfg: RunConfig, fld: CMField):
    try:
        return cusp_from_spec(cfg.cusp, fld)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError("cusp", str(exc)) from exc


def _function(cfg: RunConfig, fld: CMField, side: str = "F"):
    spec = dict(cfg.function) if cfg.function else {"builtin": "random", "seed": cfg.seed,
                                                      "symmetrize": side == "F", "side": side}
    spec.setdefault("side", side)
    if spec["side"] != side:
        raise ConfigError("function.side", f"expected an {side}-side function")
    try:
        return function_from_spec(spec, fld, cfg.n, cfg.weight)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError("function", str(exc)) from exc


def _lam(cfg: RunConfig):
    return HighestWeight(cfg.lam) if cfg.lam else None


# -- commands -------------------------------------------------------------------

def cmd_branch(cfg: RunConfig) -> tuple[int, dict]:
    if cfg.d < 0:
        raise ConfigError("d", "must be nonnegative")
    if cfg.kind == "restrict":
        r = cfg.r if cfg.r is not None else cfg.q
        if r < 1 or cfg.s < 1:
            raise ConfigError("r", "block sizes must be positive")
        table = restrict_decompose(cfg.d, r, cfg.s)
    else:
        if cfg.q < 1 or cfg.s < 1:
            raise ConfigError("q", "q and s must be positive")
        table = decompose_tau(cfg.d, cfg.q, cfg.s)
    doc = table.to_json()
    if table.kind == "tau":
        d, q, s = table.params
        doc["constituent_dimensions"] = [
            weyl_dimension(a, q) * weyl_dimension(b, s) for a, b in table.constituents
        ]
    return (0 if doc["check"] == "PASS" else 1), doc


def cmd_hwvec(cfg: RunConfig) -> tuple[int, dict]:
    if not cfg.lam:
        raise ConfigError("lambda", "a highest weight is required")
    r = cfg.r if cfg.r is not None else cfg.q
    lam = HighestWeight(cfg.lam)
    if lam.nonzero_parts > min(r, cfg.s):
        raise ConfigError("lambda", f"{cfg.lam} has more than min({r},{cfg.s}) nonzero parts")
    poly = highest_weight_vector(lam, r, cfg.s)
    terms = [{"exponents": [list(e[i * cfg.s:(i + 1) * cfg.s]) for i in range(r)], "coefficient": str(c)}
             for e, c in poly.sorted_terms()]
    return 0, {"lambda": list(lam.parts), "shape": [r, cfg.s], "degree": lam.degree, "terms": terms}


def cmd_enum(cfg: RunConfig) -> tuple[int, dict]:
    fld = _validate_common(cfg)
    betas = enumerate_positive(cfg.n, cfg.bound, fld)
    return 0, {"field": {"delta": fld.delta, "p": fld.p}, "n": cfg.n, "bound": _bound(cfg.bound),
               "count": len(betas), "matrices": [b.to_json() for b in betas]}


def _eis(cfg: RunConfig, fld: CMField):
    F = _function(cfg, fld, "F")
    ring = make_ring(fld, cfg.precision)
    return eisenstein_qexp(cfg.weight, F, _cusp(cfg, fld), cfg.bound, ring, workers=cfg.workers)


def cmd_eis(cfg: RunConfig) -> tuple[int, dict]:
    fld = _validate_common(cfg, need_weight=True)
    return 0, to_document(_eis(cfg, fld))


def cmd_theta(cfg: RunConfig) -> tuple[int, dict]:
    fld = _validate_common(cfg, need_weight=True, need_even=True)
    return 0, to_document(theta_pullback(_eis(cfg, fld), _lam(cfg)))


def cmd_integrate(cfg: RunConfig) -> tuple[int, dict]:
    fld = _validate_common(cfg)
    H = _function(cfg, fld, "H")
    f = integrate_measure(H, cfg.bound, cfg.precision, _cusp(cfg, fld), workers=cfg.workers)
    if cfg.n % 2 == 0:
        return 0, {"integral": to_document(f), "pullback": to_document(theta_pullback(f))}
    return 0, {"integral": to_document(f)}


def cmd_verify(cfg: RunConfig) -> tuple[int, dict]:
    kind = cfg.kind or "weight-shift"
    if kind not in ("weight-shift", "diffop-measure", "swap"):
        raise ConfigError("kind", f"unknown identity {kind!r}")
    fld = _validate_common(cfg, need_weight=True, need_even=kind != "weight-shift")
    if cfg.samples < 1:
        raise ConfigError("samples", "must be at least 1")
    if cfg.cusp == "all":
        cusps = [standard_cusp(fld), unit_cusp(fld)]
    else:
        cusps = [_cusp(cfg, fld)]
    if cfg.function:
        functions = [_function(cfg, fld, "F")]
    else:
        rng = random.Random(cfg.seed)
        functions = [symmetrize(random_locally_constant(fld, cfg.n, 1, rng), cfg.weight)
                     for _ in range(cfg.samples)]
    if cfg.perturb and len(cfg.perturb["y"]) != cfg.n * cfg.n:
        raise ConfigError("perturb.y", f"expected {cfg.n * cfg.n} residues")
    runs = []
    for i, F in enumerate(functions):
        params = {"F": F, "weight": cfg.weight, "lam": _lam(cfg)}
        if cfg.perturb:
            if not F.locally_constant:
                raise ConfigError("perturb", "needs a locally constant function")
            params["rhs_F"] = perturb(F, cfg.perturb["x"], cfg.perturb["y"], cfg.perturb["amount"])
        for cusp in cusps:
            params["cusp"] = cusp
            report = verify_identity(kind, params, cfg.bound, cfg.precision, workers=cfg.workers)
            doc = report.to_json()
            doc["function"] = i
            doc["cusp"] = cusp.name
            runs.append(doc)
    passed = all(r["status"] == "PASS" for r in runs)
    doc = {
        "kind": kind,
        "field": {"delta": fld.delta, "p": fld.p},
        "n": cfg.n,
        "weight": {"k": cfg.k, "nu": cfg.nu},
        "lambda": list(cfg.lam),
        "bound": _bound(cfg.bound),
        "mode": make_ring(fld, cfg.precision).descriptor(),
        "status": "PASS" if passed else "FAIL",
        "runs": runs,
    }
    return (0 if passed else 1), doc


HANDLERS = {
    "branch": cmd_branch,
    "hwvec": cmd_hwvec,
    "enum": cmd_enum,
    "eis": cmd_eis,
    "theta": cmd_theta,
    "integrate": cmd_integrate,
    "verify": cmd_verify,
}


def _bound(b: Fraction):
    return b.numerator if b.denominator == 1 else str(b)


def run(command: str, cfg: RunConfig) -> tuple[int, dict]:
    if command not in HANDLERS:
        raise ConfigError("command", f"unknown command {command!r}")
    return HANDLERS[command](cfg)


def render(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unitary-eis", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file; flags override its values")
        sp.add_argument("--output", "-o", help="write the document here instead of stdout")
        sp.add_argument("--delta", type=int)
        sp.add_argument("--p", type=int)
        sp.add_argument("--n", type=int)
        sp.add_argument("--bound", "-B")
        sp.add_argument("--precision", "-j", type=int, help="p-adic precision; omit for exact mode")
        sp.add_argument("--exact", action="store_true", help="force exact mode")
        sp.add_argument("--k", type=int)
        sp.add_argument("--nu", type=int)
        sp.add_argument("--lambda", dest="lam", help="highest weight, e.g. 2,1")
        sp.add_argument("--function", help="function description: JSON text or a path")
        sp.add_argument("--cusp", help="standard, units, all (verify only) or JSON")
        sp.add_argument("--kind", help="verify: weight-shift | diffop-measure | swap; branch: tau | restrict")
        sp.add_argument("--d", type=int)
        sp.add_argument("--q", type=int)
        sp.add_argument("--s", type=int)
        sp.add_argument("--r", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--perturb", help="verify: JSON {x, y, amount} added to the right-hand function")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.cusp and args.cusp.lstrip().startswith("{"):
            args.cusp = json.loads(args.cusp)
        cfg = build_config(args)
        status, doc = run(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config error: cusp: invalid JSON: {exc}", file=sys.stderr)
        return 2
    text = render(doc)
    if cfg.output:
        Path(cfg.output).write_text(text + "\n")
    else:
        print(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
