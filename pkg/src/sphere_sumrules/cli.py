"""Command-line front end.

Exit codes: 0 success, 1 oracle disagreement (``verify``), 2 invalid
configuration or domain error, 3 density validation failure, 4 non-convergence,
5 overlap matrix not positive definite.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (DensityValidationError, DomainError, NonConverged, NotPositiveDefinite,
                     SumRuleError, UnsupportedOrder)
from .greens import green_closed
from .harmonics import DensitySpec, gaunt, load_density, validate_density
from .rayleigh_ritz import MAX_LMAX, dimension, numeric_sum_rule, solve_spectrum
from .spectral_core import DEFAULT_TOL, SpectralEngine
from .sumrules import exact_sum_rule

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_DENSITY, EXIT_NONCONVERGED, EXIT_NOT_PD = 0, 1, 2, 3, 4, 5
SWEEP_COLUMNS = ("kappa", "order", "l_max", "exact", "numeric", "abs_err", "n_retained", "weyl_tail")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    density_path: str | None = None
    kappa: float | None = None
    orders: tuple = (2, 3)
    l_max: tuple = (30,)
    kappas: tuple = ()
    retained: int | None = None
    tol: float = DEFAULT_TOL
    fmt: str | None = None
    out: str | None = None
    allow_large: bool = False
    workers: int = 1
    extra: dict = field(default_factory=dict)

    def check(self):
        for p in self.orders:
            if p not in (2, 3):
                raise ConfigError(f"order must be 2 or 3, got {p}")
        for L in self.l_max:
            if L < 1:
                raise ConfigError(f"l_max must be positive, got {L}")
            if L > MAX_LMAX and not self.allow_large:
                raise ConfigError(f"l_max={L} above {MAX_LMAX} needs --allow-large-lmax")
            if self.retained is not None and not 1 <= self.retained <= dimension(L):
                raise ConfigError(f"--retained {self.retained} outside 1..{dimension(L)} for l_max={L}")
        if not self.tol > 0:
            raise ConfigError("--tol must be positive")
        if self.density_path and self.kappa is not None:
            raise ConfigError("give either --density or --kappa, not both")
        return self


def _int_list(text):
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def _kappa_range(text):
    try:
        a, b, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise ConfigError(f"--kappa-range expects A:B:STEP, got {text!r}") from None
    if step <= 0 or b < a:
        raise ConfigError("--kappa-range needs STEP > 0 and B >= A")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    # round away accumulated float noise so the kappa column prints cleanly
    return tuple(round(a + i * step, 12) for i in range(n))


def build_parser():
    ap = argparse.ArgumentParser(prog="sphere-sumrules",
                                 description="Spectral sum rules for density-weighted sphere Laplacians.")
    sub = ap.add_subparsers(dest="command", required=True)

    def density_args(p):
        p.add_argument("--density", help="density JSON file")
        p.add_argument("--kappa", type=float, help="use the density 1 + kappa*Y_10")
        p.add_argument("--order", default="2,3")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--format", choices=("csv", "json"), dest="fmt")
        p.add_argument("--out")

    p = sub.add_parser("exact", help="exact sum rules with their component integrals")
    density_args(p)

    for name, helptext in (("numeric", "Rayleigh-Ritz sum rules with Weyl completion"),
                           ("sweep", "exact and numeric values over a kappa range")):
        p = sub.add_parser(name, help=helptext)
        density_args(p)
        p.add_argument("--lmax", default="30")
        p.add_argument("--retained", type=int)
        p.add_argument("--allow-large-lmax", action="store_true")
        p.add_argument("--workers", type=int, default=1)
        if name == "sweep":
            p.add_argument("--kappa-range", required=True)

    p = sub.add_parser("greens", help="closed-form Green's function value")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--x", type=float, required=True)

    p = sub.add_parser("gaunt", help="Gaunt coefficient W(l1 m1, l2 m2, l3 m3)")
    p.add_argument("indices", nargs=6, type=int, metavar="L1 M1 L2 M2 L3 M3")

    p = sub.add_parser("verify", help="compare quadrature oracles with the exact engine")
    density_args(p)
    p.add_argument("--rtol", type=float, default=1e-4)
    return ap


def config_from_args(args):
    cfg = RunConfig(command=args.command)
    if args.command in ("greens", "gaunt"):
        return cfg
    cfg.density_path = args.density
    cfg.kappa = args.kappa
    cfg.orders = _int_list(args.order)
    cfg.tol = args.tol
    cfg.fmt = args.fmt
    cfg.out = args.out
    if args.command in ("numeric", "sweep"):
        cfg.l_max = _int_list(args.lmax)
        cfg.retained = args.retained
        cfg.allow_large = args.allow_large_lmax
        cfg.workers = max(1, args.workers)
    if args.command == "sweep":
        cfg.kappas = _kappa_range(args.kappa_range)
    if args.command == "verify":
        cfg.extra["rtol"] = args.rtol
    return cfg.check()


def load_config_density(cfg):
    if cfg.density_path:
        try:
            d = load_density(cfg.density_path)
        except OSError as exc:
            raise ConfigError(f"cannot read density file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DensityValidationError(f"density file is not valid JSON: {exc}") from exc
        except DomainError as exc:
            raise DensityValidationError(f"bad coefficient index in density file: {exc}") from exc
    elif cfg.kappa is not None:
        d = DensitySpec.kappa_y10(cfg.kappa)
    else:
        d = DensitySpec.homogeneous()
    validate_density(d)
    return d


# -- commands ---------------------------------------------------------------

def cmd_exact(cfg):
    d = load_config_density(cfg)
    engine = SpectralEngine(d, tol=cfg.tol)
    reports = [exact_sum_rule(d, p, engine=engine).to_dict() for p in cfg.orders]
    if (cfg.fmt or "json") == "json":
        return _json({"reports": reports})
    keys = sorted(reports[0]["components"])
    rows = [[r["order"], _num(r["value"]), _num(r["error_estimate"]), r["cutoff"]]
            + [_num(r["components"][k]) for k in keys] for r in reports]
    return _csv(["order", "value", "error_estimate", "cutoff"] + keys, rows)


def _numeric_rows(d, kappa, cfg):
    engine = SpectralEngine(d, tol=cfg.tol)
    exact = {p: exact_sum_rule(d, p, engine=engine).value for p in cfg.orders}
    rows = []
    for L in cfg.l_max:
        spec = solve_spectrum(d, L, allow_large=cfg.allow_large, n_retained=cfg.retained)
        for p in cfg.orders:
            num = numeric_sum_rule(spec, p)
            rows.append({"kappa": kappa, "order": p, "l_max": L, "exact": exact[p],
                         "numeric": num.value, "abs_err": abs(num.value - exact[p]),
                         "n_retained": num.n_retained, "weyl_tail": num.weyl_tail})
    return rows


def cmd_numeric(cfg):
    d = load_config_density(cfg)
    rows = _numeric_rows(d, cfg.kappa, cfg)
    if (cfg.fmt or "json") == "json":
        return _json({"results": rows})
    return _csv(SWEEP_COLUMNS, [[_num(r[c]) for c in SWEEP_COLUMNS] for r in rows])


def cmd_sweep(cfg):
    if cfg.density_path:
        base = load_config_density(cfg)
        template = base.scaled
    else:
        template = DensitySpec.kappa_y10
    densities = [template(k) for k in cfg.kappas]
    for d in densities:
        validate_density(d)
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        # map keeps input order, so output is independent of scheduling
        chunks = list(pool.map(lambda kd: _numeric_rows(kd[1], kd[0], cfg),
                               zip(cfg.kappas, densities)))
    rows = [r for chunk in chunks for r in chunk]
    if (cfg.fmt or "csv") == "json":
        return _json({"results": rows})
    return _csv(SWEEP_COLUMNS, [[_num(r[c]) for c in SWEEP_COLUMNS] for r in rows])


def cmd_verify(cfg):
    from .quadrature import oracle_I1, oracle_J1

    d = load_config_density(cfg)
    engine = SpectralEngine(d, tol=cfg.tol)
    rtol = cfg.extra.get("rtol", 1e-4)
    checks = []
    for q in (0, 1, 2):
        checks.append((f"I1_{q}", oracle_I1(d, q), engine.i1(q).value))
    for q, p in ((0, 0), (1, 0), (1, 1)):
        checks.append((f"J1_{q}{p}", oracle_J1(d, q, p), engine.j1(q, p).value))
    rows, ok = [], True
    for name, orc, exact in checks:
        rel = abs(orc.value - exact) / max(abs(exact), 1e-12)
        passed = rel <= rtol or abs(orc.value - exact) <= 1e-10
        ok &= passed
        rows.append({"quantity": name, "oracle": orc.value, "exact": exact,
                     "rel_diff": rel, "oracle_estimate": orc.estimate, "passed": passed})
    text = _json({"checks": rows, "passed": ok})
    return text, (EXIT_OK if ok else EXIT_MISMATCH)


def cmd_greens(args):
    return f"{green_closed(args.q, args.x):.15g}\n"


def cmd_gaunt(args):
    return f"{gaunt(*args.indices):.15g}\n"


# -- output helpers -----------------------------------------------------------

def _num(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else ("" if v is None else v)


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    code = EXIT_OK
    try:
        if args.command == "greens":
            _emit(cmd_greens(args), None)
            return EXIT_OK
        if args.command == "gaunt":
            _emit(cmd_gaunt(args), None)
            return EXIT_OK
        cfg = config_from_args(args)
        if cfg.command == "verify":
            text, code = cmd_verify(cfg)
        else:
            text = {"exact": cmd_exact, "numeric": cmd_numeric, "sweep": cmd_sweep}[cfg.command](cfg)
        _emit(text, cfg.out)
        return code
    except DensityValidationError as exc:
        return _fail(exc, EXIT_DENSITY)
    except NonConverged as exc:
        return _fail(exc, EXIT_NONCONVERGED)
    except NotPositiveDefinite as exc:
        return _fail(exc, EXIT_NOT_PD)
    except (ConfigError, DomainError, UnsupportedOrder) as exc:
        return _fail(exc, EXIT_CONFIG)
    except SumRuleError as exc:
        return _fail(exc, EXIT_CONFIG)


def _fail(exc, code):
    print(f"error: {exc}", file=sys.stderr)
    return code


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
