"""Melnikov functions of polynomial deformations.

For a deformation w_eps = w0 + eps w1 + eps^2 w2 + ... of a pencil
foliation, M_1(t) = -int_{delta_t} w1/s over a traced vanishing-cycle
family, with s the normalization (s = 1 so that w0/s = df in the
Hamiltonian case, s = FG so that w0/s = d log f for genuine pencils).
Higher orders run the recursion on normalized forms: given an exact chain
(p_i, g_i) with

    w_i + p_i df + dg_i = -sum_{j<i} p_j w_{i-j},

the next function is M_{k+1}(t) = -int (sum_{i<=k} p_i w_{k+1-i} + w_{k+1}).
A successful exact decomposition certifies that the lower order vanishes
identically, which numerics alone cannot; the numeric samples are still
checked first and the recursion returns the first nonzero order it meets.
Zero counting over real segments turns sampled values into limit-cycle
predictions phrased as holonomy fixed points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .abelian import FiberChain, RationalForm
from .algebra import BivarPoly, GaussianRational, OneForm, format_poly
from .config import RunConfig, max_symbolic_degree
from .fibration import Cycle, critical_data, trace_family
from .foliation import PencilSpec
from .numeric import PencilNumeric
from .relexact import (DecompositionBounds, DecompositionInfeasible, decompose,
                       default_bounds)

__all__ = [
    "DeformationSpec",
    "MelnikovStep",
    "MelnikovResult",
    "ZeroReport",
    "first_melnikov",
    "higher_melnikov",
    "count_zeros",
]


@dataclass
class DeformationSpec:
    """Base pencil plus the eps-expansion forms w1, w2, ..., w_m."""

    base: PencilSpec
    forms: list
    normalization: str = "default"
    declared_degree: int | None = None

    def __post_init__(self):
        if not self.forms:
            raise ValueError("a deformation needs at least one form")
        for w in self.forms:
            if not isinstance(w, OneForm):
                raise TypeError("deformation forms must be 1-forms")
        if self.normalization not in ("default", "df", "dlogf"):
            raise ValueError("normalization must be 'df', 'dlogf' or 'default'")
        budget = (self.declared_degree + 1 if self.declared_degree is not None
                  else max_symbolic_degree())
        worst = max(w.degree for w in self.forms)
        if worst > budget:
            raise ValueError(
                f"form degree {worst} exceeds the budget {budget} of the "
                "declared foliation degree")

    @property
    def order_count(self) -> int:
        return len(self.forms)

    @property
    def resolved_normalization(self) -> str:
        if self.normalization != "default":
            return self.normalization
        return "df" if self.base.is_hamiltonian else "dlogf"

    def s_label(self) -> str:
        base = self.base
        if self.resolved_normalization == "dlogf":
            return "F" if base.is_hamiltonian else "F*G"
        if base.is_hamiltonian:
            return "1"
        return f"F^(1-{base.p})*G^({base.q}+1)"

    def normalized_form(self, i: int):
        """w_i / s as (numerator, F-exponent, G-exponent); zero beyond m."""
        if i < 1:
            raise ValueError("orders are 1-based")
        w = self.forms[i - 1] if i <= len(self.forms) else OneForm.zero()
        base = self.base
        if self.resolved_normalization == "dlogf":
            return w, 1, (0 if base.is_hamiltonian else 1)
        if base.is_hamiltonian:
            return w, 0, 0
        # df convention: s = F^(1-p) G^(q+1)
        return w * base.F ** (base.p - 1), 0, base.q + 1

    def to_dict(self) -> dict:
        return {
            "base": self.base.to_dict(),
            "forms": [{"dx": format_poly(w.A), "dy": format_poly(w.B)}
                      for w in self.forms],
            "normalization": self.resolved_normalization,
            "s": self.s_label(),
        }


def _combine(spec: PencilSpec, terms):
    """Sum of rational 1-forms (num, aF, aG) over the common denominator."""
    terms = [t for t in terms if not t[0].is_zero()]
    if not terms:
        return OneForm.zero(), 0, 0
    aF = max(a for _, a, _ in terms)
    aG = max(b for _, _, b in terms)
    total = OneForm.zero()
    for num, a, b in terms:
        total = total + num * (spec.F ** (aF - a) * spec.G ** (aG - b))
    return total, aF, aG


def _rational_form(spec: PencilSpec, num: OneForm, aF: int, aG: int) -> RationalForm:
    if aF == 0 and aG == 0:
        return RationalForm(num, None)
    return RationalForm(num, spec.F ** aF * spec.G ** aG)


@dataclass
class MelnikovStep:
    """Chain element (p_i, g_i); numerators over F^a G^b denominators."""

    order: int
    p_num: BivarPoly
    p_denF: int
    p_denG: int
    g_num: BivarPoly
    g_denF: int
    g_denG: int
    residual_zero: bool = True

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "p": format_poly(self.p_num),
            "p_den": [self.p_denF, self.p_denG],
            "g": format_poly(self.g_num),
            "g_den": [self.g_denF, self.g_denG],
            "residual": "0" if self.residual_zero else "nonzero",
        }


_SECTION_NOTE = "transverse section parameterized by t = f restricted to the section"


@dataclass
class MelnikovResult:
    order: int
    samples: list                 # {level, value, error} dicts
    chain: list
    normalization: str
    requested_order: int
    aborted: bool = False         # a lower order came back nonzero
    warnings: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)
    note: str = _SECTION_NOTE

    def max_abs(self) -> float:
        return max((abs(s["value"]) for s in self.samples), default=0.0)

    def csv_rows(self):
        for s in self.samples:
            t, v = s["level"], s["value"]
            yield (t.real, t.imag, v.real, v.imag, s["error"])

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "requested_order": self.requested_order,
            "aborted_at_nonzero_order": self.aborted,
            "normalization": self.normalization,
            "samples": [
                {
                    "t": [s["level"].real, s["level"].imag],
                    "M": [s["value"].real, s["value"].imag],
                    "quad_err": s["error"],
                }
                for s in self.samples
            ],
            "chain": [st.to_dict() for st in self.chain],
            "note": self.note,
            "warnings": list(self.warnings),
            "assumptions": list(self.assumptions),
        }


def _resolve_cycles(dspec: DeformationSpec, levels, index: int, cfg: RunConfig):
    """Either adopt a traced cycle family or trace one at the given levels."""
    base = dspec.base
    if levels and all(isinstance(c, Cycle) for c in levels):
        num = PencilNumeric.build(base.F, base.G, base.p, base.q)
        return list(levels), num, [], []
    cdata = critical_data(base, cfg)
    if not cdata.points:
        raise ValueError("the base pencil has no critical points to seed from")
    cycles = trace_family(cdata, index, [complex(t) for t in levels], None, cfg)
    return cycles, cdata.num, list(cdata.warnings), list(cdata.assumptions)


def _holonomy_identity_notes(dspec: DeformationSpec, assumptions: list):
    base = dspec.base
    msg = ("holonomy of the unperturbed foliation along the cycle is the "
           "identity (multiplicity-one regular fibers)")
    if base.is_hamiltonian or (base.p == 1 and base.q == 1):
        assumptions.append(msg)
    else:
        assumptions.append(msg + f"; exceptional fibers carry multiplicities "
                                 f"({base.p}, {base.q}) and are avoided")


def _melnikov_engine(dspec: DeformationSpec, cycles, num, k_max: int,
                     bounds, cfg: RunConfig, zero_tol: float,
                     warnings: list, assumptions: list) -> MelnikovResult:
    base = dspec.base
    chains = [FiberChain(num, c, cfg) for c in cycles]
    steps = []
    p_chain = []  # (numerator, aF, aG) per order
    for i in range(1, k_max + 1):
        terms = [dspec.normalized_form(i)]
        for j, (pnum, pa, pb) in enumerate(p_chain, start=1):
            wnum, wa, wb = dspec.normalized_form(i - j)
            if wnum.is_zero():
                continue
            terms.append((wnum * pnum, wa + pa, wb + pb))
        integrand, aF, aG = _combine(base, terms)
        form = _rational_form(base, integrand, aF, aG)
        samples = []
        for cyc, chain in zip(cycles, chains):
            v, e = chain.integrate(form)
            samples.append({"level": complex(cyc.level), "value": -v, "error": e})

        def result(order, aborted):
            return MelnikovResult(
                order=order, samples=samples, chain=list(steps),
                normalization=dspec.resolved_normalization,
                requested_order=k_max, aborted=aborted,
                warnings=list(warnings), assumptions=list(assumptions))

        if i == k_max:
            return result(i, False)
        peak = max(abs(s["value"]) for s in samples)
        if peak > zero_tol:
            warnings.append(
                f"M_{i} is nonzero (max |M| = {peak:.3g} > {zero_tol:.3g}); "
                f"recursion stopped before order {k_max}")
            return result(i, True)
        # certify M_i == 0 exactly and extend the chain
        try:
            dec = decompose(-integrand, base,
                            bounds if bounds is not None
                            else default_bounds(base, order=i),
                            cfg, den=(aF, aG))
        except DecompositionInfeasible as err:
            raise DecompositionInfeasible(
                f"recursion step {i}: no exact chain within bounds; either "
                "the simplicity hypothesis fails, fibers are disconnected, "
                f"or the bounds are too small ({err})",
                certificate=err.certificate,
                float_residual=err.float_residual,
                attempts=err.attempts) from err
        pnum, paF, paG = dec.p_parts()
        gnum, gaF, gaG = dec.g_parts()
        steps.append(MelnikovStep(order=i, p_num=pnum, p_denF=paF, p_denG=paG,
                                  g_num=gnum, g_denF=gaF, g_denG=gaG))
        p_chain.append((pnum, paF, paG))
    raise AssertionError("unreachable")


def first_melnikov(dspec: DeformationSpec, levels, cfg: RunConfig | None = None,
                   index: int = 0, zero_tol: float | None = None) -> MelnikovResult:
    """M_1(t) = -int_{delta_t} w_1/s at each level.

    `levels` is either a list of complex levels (a vanishing-cycle family
    for critical point `index` is traced) or an already-traced list of
    Cycle objects.
    """
    return higher_melnikov(dspec, levels, 1, None, cfg, index, zero_tol)


def higher_melnikov(dspec: DeformationSpec, levels, k_max: int,
                    bounds: DecompositionBounds | None = None,
                    cfg: RunConfig | None = None, index: int = 0,
                    zero_tol: float | None = None) -> MelnikovResult:
    """M_k for k = k_max, or the first nonzero lower order encountered.

    Each recursion step certifies M_i == 0 by an exact decomposition of the
    accumulated integrand before continuing; the numeric samples are
    checked first and a nonzero order returns immediately with `aborted`
    set and its own samples.
    """
    cfg = cfg or RunConfig()
    if k_max < 1:
        raise ValueError("order must be at least 1")
    ztol = zero_tol if zero_tol is not None else cfg.zero_tol
    cycles, num, warnings, assumptions = _resolve_cycles(dspec, levels, index, cfg)
    if not cycles:
        raise ValueError("no cycles to integrate over")
    _holonomy_identity_notes(dspec, assumptions)
    return _melnikov_engine(dspec, cycles, num, k_max, bounds, cfg, ztol,
                            warnings, assumptions)


# ---------------------------------------------------------------------------
# zero counting
# ---------------------------------------------------------------------------


@dataclass
class ZeroReport:
    segment: tuple
    roots: list                   # {t, bracket, kind}
    identically_zero: bool
    multiplicity: dict | None
    imag_max: float
    samples_used: int
    note: str = "predicted fixed points of the holonomy near each listed zero"

    def to_dict(self) -> dict:
        return {
            "segment": [self.segment[0], self.segment[1]],
            "predicted_zeros": [
                {"t": r["t"], "bracket": [r["bracket"][0], r["bracket"][1]],
                 "kind": r["kind"]}
                for r in self.roots
            ],
            "identically_zero": self.identically_zero,
            "multiplicity": self.multiplicity,
            "max_imag_part": self.imag_max,
            "samples_used": self.samples_used,
            "note": self.note,
        }


def count_zeros(result, segment, multiplicity_at=None,
                cfg: RunConfig | None = None,
                max_gap_frac: float = 0.25) -> ZeroReport:
    """Sign changes of sampled M_k on a real segment, with brackets.

    `result` is a MelnikovResult or a plain list of {level, value, error}
    dicts.  Raises when adjacent samples of opposite sign are further apart
    than max_gap_frac of the segment (too sparse to trust a bracket).
    An optional least-squares monomial fit (order <= 4, condition guard)
    estimates the multiplicity at `multiplicity_at`.
    """
    cfg = cfg or RunConfig()
    samples = result.samples if isinstance(result, MelnikovResult) else list(result)
    a, b = float(segment[0]), float(segment[1])
    if not a < b:
        raise ValueError("segment must be an increasing real interval")
    rows = []
    for s in samples:
        t = complex(s["level"])
        if abs(t.imag) > 1e-9 * max(1.0, abs(t)):
            raise ValueError("count_zeros expects levels on the real axis")
        if a - 1e-12 <= t.real <= b + 1e-12:
            rows.append((t.real, complex(s["value"]), float(s["error"])))
    rows.sort(key=lambda r: r[0])
    if len(rows) < 2:
        raise ValueError("need at least two samples inside the segment")
    imag_max = max(abs(v.imag) for _, v, _ in rows)

    def sgn(v, err):
        # a sample is a zero when it sits below its own error bar
        if abs(v.real) <= max(3.0 * err, cfg.zero_tol):
            return 0
        return 1 if v.real > 0 else -1

    signs = [sgn(v, e) for _, v, e in rows]
    if all(s == 0 for s in signs):
        return ZeroReport(segment=(a, b), roots=[], identically_zero=True,
                          multiplicity=None, imag_max=imag_max,
                          samples_used=len(rows))

    roots = []
    for k in range(len(rows) - 1):
        t0, v0, _ = rows[k]
        t1, v1, _ = rows[k + 1]
        if signs[k] == 0:
            if not any(abs(r["t"] - t0) < 1e-12 for r in roots):
                roots.append({"t": t0, "bracket": (t0, t0), "kind": "on-node"})
            continue
        if signs[k + 1] == 0 or signs[k] * signs[k + 1] > 0:
            continue
        if (t1 - t0) > max_gap_frac * (b - a):
            raise ValueError(
                f"samples too sparse: sign change across gap {t1 - t0:.3g} "
                f"exceeds {max_gap_frac:.2f} of the segment")
        tstar = t0 - v0.real * (t1 - t0) / (v1.real - v0.real)
        roots.append({"t": tstar, "bracket": (t0, t1), "kind": "sign-change"})
    if signs[-1] == 0:
        t0 = rows[-1][0]
        if not any(abs(r["t"] - t0) < 1e-12 for r in roots):
            roots.append({"t": t0, "bracket": (t0, t0), "kind": "on-node"})

    fit = None
    if multiplicity_at is not None:
        fit = _multiplicity_fit(rows, float(multiplicity_at), cfg)
    return ZeroReport(segment=(a, b), roots=roots, identically_zero=False,
                      multiplicity=fit, imag_max=imag_max,
                      samples_used=len(rows))


def _multiplicity_fit(rows, t0: float, cfg: RunConfig) -> dict:
    """Least-squares monomial fit around t0; order <= 4, condition guard."""
    pts = sorted(rows, key=lambda r: abs(r[0] - t0))[:max(8, min(len(rows), 12))]
    ts = np.array([r[0] - t0 for r in pts])
    vs = np.array([r[1].real for r in pts])
    deg = min(4, len(pts) - 1)
    V = np.vander(ts, deg + 1, increasing=True)
    cond = float(np.linalg.cond(V))
    out = {"t0": t0, "condition": cond, "order_cap": deg}
    if cond > 1e10:
        out["multiplicity"] = None
        out["warning"] = "fit ill-conditioned; no multiplicity estimate"
        return out
    coef, *_ = np.linalg.lstsq(V, vs, rcond=None)
    scale = float(np.max(np.abs(coef)))
    mult = None
    if scale > 0:
        for k, c in enumerate(coef):
            if abs(c) > 1e-6 * scale:
                mult = k
                break
    out["coefficients"] = [float(c) for c in coef]
    out["multiplicity"] = mult
    return out
