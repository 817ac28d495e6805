"""Command line driver.

One executable (`melnikov-kit`) binds polynomial specs, traced cycle
files, and deterministic reports.  Specs are JSON; which kind is meant
is inferred from the keys:

  pencil        {"F": "...", "G": "...", "p": 1, "q": 1}
  deformation   {"base": <pencil>, "forms": [{"dx": "...", "dy": "..."}],
                 "normalization": "default|df|dlogf"}
  logarithmic   {"factors": ["...", ...], "lambdas": [1, -1, ...]}
  form / germ   {"dx": "...", "dy": "..."}

Exit status: 0 on success, 2 when a well-posed query returns an
infeasibility verdict (no decomposition, not in the tangent cone),
1 on malformed input or numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .algebra import GaussianRational, OneForm, parse_poly
from .config import RunConfig
from .fibration import Cycle, critical_data, trace_family, trace_to_level
from .foliation import FoliationForm, LogarithmicSpec, PencilSpec, singular_points
from .melnikov import DeformationSpec, count_zeros, higher_melnikov
from .numeric import PencilNumeric
from .relexact import (DecompositionInfeasible, decompose, default_bounds,
                       is_relatively_exact, tangent_membership)
from .reporting import (MELNIKOV_CSV_HEADER, canonical_json, write_csv,
                        write_json, write_plot)

__all__ = ["main", "build_parser"]


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------


def _parse_levels(text: str):
    """`a:b:n` linspace (complex endpoints allowed), comma list, or single."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"--levels expects a:b:n, got {text!r}")
        a, b, n = complex(parts[0]), complex(parts[1]), int(parts[2])
        if n < 1:
            raise ValueError("--levels count must be at least 1")
        if n == 1:
            return [a]
        return [a + (b - a) * k / (n - 1) for k in range(n)]
    if "," in text:
        return [complex(v) for v in text.split(",") if v.strip()]
    return [complex(text)]


def _rational(v) -> GaussianRational:
    if isinstance(v, bool):
        raise ValueError("booleans are not scalars")
    if isinstance(v, int):
        return GaussianRational(v)
    if isinstance(v, str):
        return GaussianRational(Fraction(v))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return GaussianRational(Fraction(str(v[0])), Fraction(str(v[1])))
    raise ValueError(f"cannot read exact scalar from {v!r}")


def _as_form(data: dict) -> OneForm:
    return OneForm(parse_poly(str(data.get("dx", "0"))),
                   parse_poly(str(data.get("dy", "0"))))


def _as_pencil(data: dict) -> PencilSpec:
    return PencilSpec(
        parse_poly(str(data["F"])),
        parse_poly(str(data.get("G", "1"))),
        int(data.get("p", 1)),
        int(data.get("q", 1)),
    )


def _as_logarithmic(data: dict) -> LogarithmicSpec:
    return LogarithmicSpec(
        [parse_poly(str(f)) for f in data["factors"]],
        [_rational(v) for v in data["lambdas"]],
    )


def _as_deformation(data: dict) -> DeformationSpec:
    return DeformationSpec(
        _as_pencil(data["base"]),
        [_as_form(f) for f in data["forms"]],
        normalization=data.get("normalization", "default"),
        declared_degree=data.get("degree"),
    )


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_spec(path: str):
    """Dispatch a spec file to its object by shape."""
    data = _load_json(path)
    if not isinstance(data, dict):
        raise ValueError("spec file must hold a JSON object")
    if "factors" in data:
        return _as_logarithmic(data)
    if "forms" in data:
        return _as_deformation(data)
    if "F" in data:
        return _as_pencil(data)
    if "omega" in data:
        return FoliationForm(_as_form(data["omega"]), data.get("degree"))
    if "dx" in data or "dy" in data:
        return FoliationForm(_as_form(data), data.get("degree"))
    raise ValueError("unrecognized spec shape (expected pencil, deformation, "
                     "logarithmic, or 1-form keys)")


def _need_deformation(spec) -> DeformationSpec:
    if isinstance(spec, DeformationSpec):
        return spec
    if isinstance(spec, PencilSpec):
        raise ValueError("this command needs a deformation spec "
                         '(add "forms": [{"dx": ..., "dy": ...}])')
    raise ValueError("this command needs a deformation spec")


def _need_pencil(spec) -> PencilSpec:
    if isinstance(spec, PencilSpec):
        return spec
    if isinstance(spec, DeformationSpec):
        return spec.base
    raise ValueError("this command needs a pencil spec")


def load_cycles(path: str):
    data = _load_json(path)
    if isinstance(data, dict) and "cycles" in data:
        data = data["cycles"]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list) or not data:
        raise ValueError("cycle file holds no cycles")
    return [Cycle.from_dict(d) for d in data]


def _cfg_from_args(args) -> RunConfig:
    cfg = RunConfig()
    overrides = {
        "tol_fiber": args.tol_fiber,
        "newton_tol": args.tol_newton,
        "quad_tol": args.tol_quad,
        "zero_tol": args.tol_zero,
        "pole_tol_frac": args.tol_pole,
    }
    for name, v in overrides.items():
        if v is not None:
            if v <= 0:
                raise ValueError(f"tolerances must be positive ({name})")
            setattr(cfg, name, v)
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "grid", None):
        cfg.fd_grid = args.grid
    return cfg


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


def _spec_echo(args) -> dict:
    echo = {"spec_file": args.spec}
    if getattr(args, "cycle", None):
        echo["cycle_file"] = args.cycle
    return echo


def _report(args, cfg: RunConfig, payload: dict,
            warnings=(), assumptions=()) -> dict:
    return {
        "command": args.command,
        **_spec_echo(args),
        "config": cfg.as_dict(),
        "warnings": list(warnings),
        "assumptions": list(assumptions),
        **payload,
    }


def _emit(args, report, csv_rows=None, csv_header=MELNIKOV_CSV_HEADER,
          plot_pairs=None):
    fmt = args.format
    out = args.out
    if fmt == "json":
        if out:
            write_json(out, report)
        else:
            sys.stdout.write(canonical_json(report))
    elif fmt == "csv":
        if csv_rows is None:
            raise ValueError(f"{args.command} has no CSV representation")
        if out:
            write_csv(out, csv_rows, csv_header)
        else:
            write_csv(sys.stdout, csv_rows, csv_header)
    elif fmt == "plot":
        if plot_pairs is None:
            raise ValueError(f"{args.command} has no plot representation")
        if out:
            write_plot(out, plot_pairs)
        else:
            write_plot(sys.stdout, plot_pairs)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_critical_values(args) -> int:
    cfg = _cfg_from_args(args)
    spec = _need_pencil(load_spec(args.spec))
    cdata = critical_data(spec, cfg=cfg)
    payload = cdata.to_dict()
    payload["min_gap"] = cdata.min_gap() if len(cdata.points) > 1 else None
    _emit(args, _report(args, cfg, payload, cdata.warnings, cdata.assumptions))
    return 0


def cmd_singular_points(args) -> int:
    cfg = _cfg_from_args(args)
    spec = load_spec(args.spec)
    if isinstance(spec, DeformationSpec):
        spec = spec.base
    pts = singular_points(spec, cfg=cfg)
    kinds: dict = {}
    rows = []
    for sp in pts:
        kinds[sp.kind] = kinds.get(sp.kind, 0) + 1
        rows.append({
            "point": [sp.point[0].real, sp.point[0].imag,
                      sp.point[1].real, sp.point[1].imag],
            "kind": sp.kind,
            "eigenvalues": [_pair(sp.eigenvalues[0]), _pair(sp.eigenvalues[1])],
            "residual": sp.residual,
            "real": sp.is_real(),
        })
    warnings = list(getattr(spec, "warnings", []))
    payload = {"count": len(rows), "kinds": kinds, "points": rows}
    _emit(args, _report(args, cfg, payload, warnings))
    return 0


def cmd_trace_cycle(args) -> int:
    cfg = _cfg_from_args(args)
    spec = _need_pencil(load_spec(args.spec))
    if not args.levels:
        raise ValueError("trace-cycle needs --levels")
    levels = _parse_levels(args.levels)
    cdata = critical_data(spec, cfg=cfg)
    cycles = trace_family(cdata, args.index, levels, None, cfg)
    payload = {
        "index": args.index,
        "levels": [_pair(t) for t in levels],
        "cycles": [c.to_dict() for c in cycles],
    }
    _emit(args, _report(args, cfg, payload, cdata.warnings, cdata.assumptions))
    return 0


def cmd_integrate(args) -> int:
    from .abelian import integrate

    cfg = _cfg_from_args(args)
    dspec = _need_deformation(load_spec(args.spec))
    if not args.cycle:
        raise ValueError("integrate needs --cycle")
    cycles = load_cycles(args.cycle)
    form = dspec.forms[min(max(args.order - 1, 0), len(dspec.forms) - 1)]
    base = dspec.base
    num = PencilNumeric.build(base.F, base.G, base.p, base.q)
    rows = []
    csv = []
    for cyc in cycles:
        v, e = integrate(form, cyc, num, cfg, tol=cfg.quad_tol)
        rows.append({"level": _pair(cyc.level), "value": _pair(v), "error": e})
        csv.append((cyc.level.real, cyc.level.imag, v.real, v.imag, e))
    payload = {"tolerance": cfg.quad_tol, "integrals": rows}
    _emit(args, _report(args, cfg, payload), csv_rows=csv,
          plot_pairs=[(c.level, r["value"][0]) for c, r in zip(cycles, rows)])
    return 0


def cmd_melnikov(args) -> int:
    cfg = _cfg_from_args(args)
    dspec = _need_deformation(load_spec(args.spec))
    if args.cycle:
        levels = load_cycles(args.cycle)
    elif args.levels:
        levels = _parse_levels(args.levels)
    else:
        raise ValueError("melnikov needs --levels or --cycle")
    res = higher_melnikov(dspec, levels, args.order, cfg=cfg, index=args.index)
    payload = res.to_dict()
    _emit(args, _report(args, cfg, payload, res.warnings, res.assumptions),
          csv_rows=res.csv_rows(),
          plot_pairs=[(s["level"], s["value"].real) for s in res.samples])
    return 0


def cmd_melnikov_fd(args) -> int:
    from .oracle import melnikov_fd_scan

    cfg = _cfg_from_args(args)
    dspec = _need_deformation(load_spec(args.spec))
    guides = None
    if args.cycle:
        guides = load_cycles(args.cycle)
    elif args.levels:
        levels = _parse_levels(args.levels)
        cdata = critical_data(dspec.base, cfg=cfg)
        guides = trace_family(cdata, args.index, levels, None, cfg)
    else:
        raise ValueError("melnikov-fd needs --levels or --cycle")
    rows = []
    csv = []
    pairs = []
    for guide in guides:
        eps0 = float(args.eps) if args.eps is not None else None
        scan = melnikov_fd_scan(dspec, guide, guide.level, args.order,
                                cfg=cfg, eps0=eps0, grid=args.grid)
        top = scan["orders"][args.order]
        rows.append({
            "t": _pair(guide.level),
            "eps0": scan["eps0"],
            "ratio": scan["ratio"],
            "orders": {
                str(k): {"value": _pair(o["value"]), "error": o["error"],
                         "supplied": o["supplied"]}
                for k, o in scan["orders"].items()
            },
            "samples": [s.to_dict() for s in scan["samples"]],
        })
        csv.append((guide.level.real, guide.level.imag,
                    complex(top["value"]).real, complex(top["value"]).imag,
                    top["error"]))
        pairs.append((guide.level, complex(top["value"]).real))
    payload = {"order": args.order, "scans": rows}
    _emit(args, _report(args, cfg, payload), csv_rows=csv, plot_pairs=pairs)
    return 0


def cmd_holonomy(args) -> int:
    from .oracle import holonomy

    cfg = _cfg_from_args(args)
    dspec = _need_deformation(load_spec(args.spec))
    if not args.cycle:
        raise ValueError("holonomy needs --cycle (a traced guide)")
    guide = load_cycles(args.cycle)[0]
    ts = _parse_levels(args.levels) if args.levels else [guide.level]
    eps = complex(args.eps) if args.eps is not None else 0.0
    rows = []
    csv = []
    pairs = []
    for t in ts:
        s = holonomy(dspec, guide, t, eps, cfg)
        rows.append(s.to_dict())
        d = s.h - s.t
        csv.append((s.t.real, s.t.imag, s.h.real, s.h.imag, abs(d)))
        pairs.append((s.t, d.real))
    payload = {"eps": _pair(eps), "samples": rows}
    _emit(args, _report(args, cfg, payload), csv_rows=csv,
          csv_header=("t_re", "t_im", "h_re", "h_im", "disp_abs"),
          plot_pairs=pairs)
    return 0


def cmd_decompose(args) -> int:
    cfg = _cfg_from_args(args)
    dspec = _need_deformation(load_spec(args.spec))
    base = dspec.base
    bounds = default_bounds(base, order=max(args.order, 1))
    try:
        dec = decompose(dspec.forms[0], base, bounds=bounds, cfg=cfg)
    except DecompositionInfeasible as exc:
        cert = None
        if exc.certificate is not None:
            cert = {
                "combination": [str(c) for c in exc.certificate.combination],
                "residual": str(exc.certificate.residual),
            }
        payload = {
            "decomposable": False,
            "reason": str(exc),
            "float_residual": exc.float_residual,
            "certificate": cert,
            "attempted_bounds": exc.attempts,
        }
        _emit(args, _report(args, cfg, payload))
        return 2
    payload = {"decomposable": True, **dec.to_dict()}
    _emit(args, _report(args, cfg, payload))
    return 0


def cmd_tangent_test(args) -> int:
    cfg = _cfg_from_args(args)
    dspec = _need_deformation(load_spec(args.spec))
    res = tangent_membership(dspec.forms[0], dspec.base)
    _emit(args, _report(args, cfg, res.to_dict()))
    return 0 if res.in_tangent_cone else 2


def cmd_center_obstructions(args) -> int:
    from .center import normalize_linear_part, obstructions

    cfg = _cfg_from_args(args)
    spec = load_spec(args.spec)
    if isinstance(spec, FoliationForm):
        omega = spec.omega
    elif isinstance(spec, DeformationSpec):
        omega = spec.base.omega0()
    elif isinstance(spec, (PencilSpec, LogarithmicSpec)):
        omega = spec.omega0() if isinstance(spec, PencilSpec) else spec.form()
    else:
        raise ValueError("center-obstructions needs a 1-form germ spec")
    warnings = []
    try:
        norm = normalize_linear_part(omega, exact=True)
    except ValueError as exc:
        if "center type" in str(exc) or "singular" in str(exc):
            raise
        norm = normalize_linear_part(omega, exact=False)
        warnings.append(f"exact normalization unavailable ({exc}); float mode")
    warnings.extend(norm.warnings)
    rep = obstructions(norm.omega, args.max_order)
    warnings.extend(rep.warnings)
    obs = {}
    for n, v in sorted(rep.obstructions.items()):
        if isinstance(v, GaussianRational):
            obs[str(n)] = {"value": str(v), "zero": v.is_zero()}
        elif isinstance(v, complex):
            obs[str(n)] = {"value": _pair(v), "zero": abs(v) <= cfg.zero_tol}
        else:
            obs[str(n)] = {"value": str(v), "zero": v.is_zero()}
    payload = {
        "mode": rep.mode,
        "normalization_mode": norm.mode,
        "max_order": rep.max_order,
        "obstructions": obs,
        "all_zero": rep.all_zero(0.0 if rep.mode == "exact" else cfg.zero_tol),
    }
    _emit(args, _report(args, cfg, payload, warnings))
    return 0


def cmd_count_zeros(args) -> int:
    cfg = _cfg_from_args(args)
    dspec = _need_deformation(load_spec(args.spec))
    if not args.levels:
        raise ValueError("count-zeros needs --levels a:b:n (a real segment)")
    levels = _parse_levels(args.levels)
    res = higher_melnikov(dspec, levels, args.order, cfg=cfg, index=args.index)
    seg = (levels[0].real, levels[-1].real)
    mult_at = float(args.multiplicity_at) if args.multiplicity_at else None
    zr = count_zeros(res, seg, multiplicity_at=mult_at, cfg=cfg)
    payload = {"melnikov_order": res.order, "aborted": res.aborted,
               **zr.to_dict()}
    _emit(args, _report(args, cfg, payload, res.warnings, res.assumptions))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", required=True, help="JSON spec file")
    common.add_argument("--cycle", help="traced cycle JSON file")
    common.add_argument("--levels", help="a:b:n linspace or comma list")
    common.add_argument("--order", type=int, default=1,
                        help="Melnikov / decomposition order")
    common.add_argument("--eps", help="perturbation size (complex ok)")
    common.add_argument("--grid", type=int, help="eps-grid size for fd")
    common.add_argument("--index", type=int, default=0,
                        help="critical point index for seeding")
    common.add_argument("--max-order", type=int, default=12, dest="max_order")
    common.add_argument("--multiplicity-at", dest="multiplicity_at",
                        help="estimate zero multiplicity near this level")
    common.add_argument("--tol-fiber", type=float, dest="tol_fiber")
    common.add_argument("--tol-newton", type=float, dest="tol_newton")
    common.add_argument("--tol-quad", type=float, dest="tol_quad")
    common.add_argument("--tol-zero", type=float, dest="tol_zero")
    common.add_argument("--tol-pole", type=float, dest="tol_pole")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv", "plot"),
                        default="json")
    common.add_argument("--seed", type=int, default=None)

    parser = _Parser(prog="melnikov-kit",
                     description="Melnikov functions of polynomial foliation "
                                 "deformations via traced vanishing cycles")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)
    handlers = {
        "critical-values": cmd_critical_values,
        "singular-points": cmd_singular_points,
        "trace-cycle": cmd_trace_cycle,
        "integrate": cmd_integrate,
        "melnikov": cmd_melnikov,
        "melnikov-fd": cmd_melnikov_fd,
        "holonomy": cmd_holonomy,
        "decompose": cmd_decompose,
        "tangent-test": cmd_tangent_test,
        "center-obstructions": cmd_center_obstructions,
        "count-zeros": cmd_count_zeros,
    }
    for name, fn in handlers.items():
        p = sub.add_parser(name, parents=[common])
        p.set_defaults(handler=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except BrokenPipeError:
        return 1
    except (OSError, ValueError, TypeError, KeyError, RuntimeError,
            json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
