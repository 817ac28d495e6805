"""Integration of rational 1-forms over fiber cycles; period vectors.

Every integral runs over a chordal Gauss-Legendre scaffold attached to
one cycle: each polyline edge is parametrized by the coordinate whose
fiber gradient keeps the implicit solve well-conditioned, quadrature
nodes are Newton-solved onto the fiber, and each leaf segment carries a
coarse rule plus its two-half refinement so every integral returns a
(value, error) pair.  The scaffold is form-independent: node positions
and dx/dy weights are shared by all forms, so period vectors evaluate
vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import BivarPoly, OneForm
from .config import RunConfig
from .fibration import Cycle, CriticalData, seed_indeterminacy_cycle
from .numeric import PencilNumeric, compile_poly

__all__ = [
    "RationalForm",
    "PeriodVector",
    "PoleProximity",
    "QuadratureFailure",
    "FiberChain",
    "integrate",
    "integrate_many",
    "periods",
    "monomial_basis",
    "residue_vanishing",
]


class PoleProximity(RuntimeError):
    """Denominator too close to zero on the cycle."""


class QuadratureFailure(RuntimeError):
    """Error estimate above tolerance after maximal refinement."""


@dataclass
class RationalForm:
    """(A dx + B dy) / den with a polynomial denominator."""

    num: OneForm
    den: BivarPoly | None = None

    def compiled(self):
        cache = getattr(self, "_compiled", None)
        if cache is None:
            cache = (
                compile_poly(self.num.A),
                compile_poly(self.num.B),
                compile_poly(self.den) if self.den is not None and self.den.degree > 0
                else None,
                complex(self.den.coeff(0, 0).to_complex()) if self.den is not None
                and self.den.degree == 0 else 1.0 + 0j,
            )
            self._compiled = cache
        return cache

    @staticmethod
    def polynomial(form: OneForm) -> "RationalForm":
        return RationalForm(form, None)


# ---------------------------------------------------------------------------
# the quadrature scaffold
# ---------------------------------------------------------------------------


class _Leaf:
    __slots__ = ("depth", "ends", "X", "Y", "CX", "CY", "Xf", "Yf", "CXf", "CYf")

    def __init__(self, depth, ends, X, Y, CX, CY, Xf, Yf, CXf, CYf):
        self.depth = depth
        self.ends = ends          # (xa, ya, xb, yb)
        self.X, self.Y, self.CX, self.CY = X, Y, CX, CY
        self.Xf, self.Yf, self.CXf, self.CYf = Xf, Yf, CXf, CYf


def _gl_nodes(order: int):
    s, w = np.polynomial.legendre.leggauss(order)
    return (s + 1.0) / 2.0, w / 2.0


def _solve_chord(num: PencilNumeric, t, axis, fixed, guess, cfg: RunConfig):
    """Solve f = t for one coordinate along a chord, vectorized.

    axis "x": fixed array holds x, guess holds y (solved); axis "y" is
    the mirror.  Returns (solution, ok_mask).
    """
    z = np.array(guess, dtype=complex)
    ok = np.zeros(z.shape, dtype=bool)
    for _ in range(cfg.newton_maxit):
        if axis == "x":
            f, _, d = num.value_grad(fixed, z)
        else:
            f, d, _ = num.value_grad(z, fixed)
        r = f - t
        ok = np.abs(r) <= cfg.tol_fiber
        if ok.all():
            break
        bad = d == 0
        d = np.where(bad, 1.0, d)
        z = z - np.where(ok | bad, 0.0, r / d)
    return z, ok


def _make_leaf(num, t, ends, depth, cfg, s_nodes, w_nodes):
    """Quadrature leaf over one chord, or None when the solve fails."""
    xa, ya, xb, yb = ends
    _, gx, gy = num.value_grad(np.array([xa, xb]), np.array([ya, yb]))
    if abs(xb - xa) == 0 and abs(yb - ya) == 0:
        return None
    if abs(xb - xa) == 0:
        axis = "y"
    elif abs(yb - ya) == 0:
        axis = "x"
    else:
        axis = "x" if min(abs(gy[0]), abs(gy[1])) >= min(abs(gx[0]), abs(gx[1])) else "y"

    chord = math.hypot(abs(xb - xa), abs(yb - ya))

    def nodes_on(span0, span1):
        # one GL panel on the sub-chord [span0, span1] of [0, 1]
        s = span0 + (span1 - span0) * s_nodes
        if axis == "x":
            fixed = xa + s * (xb - xa)
            guess = ya + s * (yb - ya)
        else:
            fixed = ya + s * (yb - ya)
            guess = xa + s * (xb - xa)
        sol, ok = _solve_chord(num, t, axis, fixed, guess, cfg)
        if not ok.all():
            return None
        if np.max(np.abs(sol - guess)) > 1.5 * max(chord, 1e-300):
            return None  # jumped to another branch of the fiber
        f, fx, fy = num.value_grad(*( (fixed, sol) if axis == "x" else (sol, fixed) ))
        w = w_nodes * (span1 - span0)
        if axis == "x":
            if np.any(fy == 0):
                return None
            cx = w * (xb - xa)
            cy = cx * (-fx / fy)
            return fixed, sol, cx, cy
        if np.any(fx == 0):
            return None
        cy = w * (yb - ya)
        cx = cy * (-fy / fx)
        return sol, fixed, cx, cy

    coarse = nodes_on(0.0, 1.0)
    left = nodes_on(0.0, 0.5)
    right = nodes_on(0.5, 1.0)
    if coarse is None or left is None or right is None:
        return None
    X, Y, CX, CY = coarse
    Xf = np.concatenate([left[0], right[0]])
    Yf = np.concatenate([left[1], right[1]])
    CXf = np.concatenate([left[2], right[2]])
    CYf = np.concatenate([left[3], right[3]])
    return _Leaf(depth, ends, X, Y, CX, CY, Xf, Yf, CXf, CYf)


class FiberChain:
    """Shared quadrature scaffold over one cycle."""

    def __init__(self, num: PencilNumeric, cycle: Cycle,
                 cfg: RunConfig | None = None, order: int | None = None):
        self.num = num
        self.cfg = cfg or RunConfig()
        self.t = complex(cycle.level)
        self.order = order or self.cfg.quad_order
        self.diameter = cycle.diameter()
        self._s, self._w = _gl_nodes(self.order)
        self.leaves: list = []
        n = len(cycle.x)
        for k in range(n):
            xa, ya = cycle.x[k], cycle.y[k]
            xb, yb = cycle.x[(k + 1) % n], cycle.y[(k + 1) % n]
            if xa == xb and ya == yb:
                continue
            self._build((complex(xa), complex(ya), complex(xb), complex(yb)), 0)
        if not self.leaves:
            raise QuadratureFailure("cycle has no nonzero-length edges")
        self._version = 0
        self._cache = {}

    def _midpoint(self, ends):
        xa, ya, xb, yb = ends
        mx, my, ok = self.num.project_fiber(
            (xa + xb) / 2.0, (ya + yb) / 2.0, self.t,
            tol=self.cfg.tol_fiber, maxit=self.cfg.newton_maxit,
        )
        if not ok:
            raise QuadratureFailure("fiber projection failed while splitting a segment")
        return complex(mx), complex(my)

    def _build(self, ends, depth):
        leaf = _make_leaf(self.num, self.t, ends, depth, self.cfg, self._s, self._w)
        if leaf is not None:
            self.leaves.append(leaf)
            return
        if depth >= self.cfg.quad_max_depth:
            raise QuadratureFailure(
                "fiber tracking failed on a segment at maximal subdivision depth"
            )
        mx, my = self._midpoint(ends)
        xa, ya, xb, yb = ends
        self._build((xa, ya, mx, my), depth + 1)
        self._build((mx, my, xb, yb), depth + 1)

    def _split(self, idx) -> bool:
        leaf = self.leaves[idx]
        if leaf.depth >= self.cfg.quad_max_depth:
            return False
        ends = leaf.ends
        mx, my = self._midpoint(ends)
        xa, ya, xb, yb = ends
        new = []
        for sub in ((xa, ya, mx, my), (mx, my, xb, yb)):
            lf = _make_leaf(self.num, self.t, sub, leaf.depth + 1, self.cfg,
                            self._s, self._w)
            if lf is None:
                return False
            new.append(lf)
        self.leaves[idx : idx + 1] = new
        self._version += 1
        self._cache.clear()
        return True

    def _arrays(self):
        key = "arrays"
        hit = self._cache.get(key)
        if hit is None:
            X = np.concatenate([lf.X for lf in self.leaves])
            Y = np.concatenate([lf.Y for lf in self.leaves])
            CX = np.concatenate([lf.CX for lf in self.leaves])
            CY = np.concatenate([lf.CY for lf in self.leaves])
            Xf = np.concatenate([lf.Xf for lf in self.leaves])
            Yf = np.concatenate([lf.Yf for lf in self.leaves])
            CXf = np.concatenate([lf.CXf for lf in self.leaves])
            CYf = np.concatenate([lf.CYf for lf in self.leaves])
            nc = self.order
            starts = np.arange(0, len(self.leaves) * nc, nc)
            startsf = np.arange(0, len(self.leaves) * 2 * nc, 2 * nc)
            hit = (X, Y, CX, CY, Xf, Yf, CXf, CYf, starts, startsf)
            self._cache[key] = hit
        return hit

    def _eval(self, form: RationalForm):
        """Per-leaf (fine, coarse) sums for one form."""
        X, Y, CX, CY, Xf, Yf, CXf, CYf, starts, startsf = self._arrays()
        cA, cB, cD, dconst = form.compiled()

        def combine(x, y, cx, cy, st):
            A = cA(x, y)
            B = cB(x, y)
            if cD is not None:
                D = cD(x, y)
                floor = self.cfg.pole_tol_frac * max(self.diameter, 1e-300)
                if np.min(np.abs(D)) < floor:
                    raise PoleProximity(
                        f"denominator falls below {floor:.3g} on the cycle"
                    )
                vals = (A * cx + B * cy) / D
            else:
                vals = (A * cx + B * cy) / dconst
            return np.add.reduceat(vals, st)

        coarse = combine(X, Y, CX, CY, starts)
        fine = combine(Xf, Yf, CXf, CYf, startsf)
        return fine, coarse

    def integrate(self, form: RationalForm, tol: float | None = None):
        """Adaptive integral of one form: returns (value, error bound)."""
        tol = tol if tol is not None else self.cfg.quad_tol
        for _ in range(80):
            fine, coarse = self._eval(form)
            errs = np.abs(fine - coarse)
            total = float(errs.sum())
            if total <= tol:
                return complex(fine.sum()), total
            # split every leaf holding an above-average share of the error,
            # from the highest index down so positions stay valid
            budget = tol / max(len(self.leaves), 1)
            offenders = [i for i in range(len(self.leaves)) if errs[i] > budget]
            split_any = False
            for i in reversed(offenders):
                if self._split(i):
                    split_any = True
            if not split_any:
                raise QuadratureFailure(
                    f"quadrature error {total:.3g} above tolerance {tol:.3g} "
                    "after maximal refinement"
                )
        raise QuadratureFailure("quadrature refinement did not converge")


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------


def integrate(
    form: RationalForm | OneForm,
    cycle: Cycle,
    num: PencilNumeric,
    cfg: RunConfig | None = None,
    tol: float | None = None,
    chain: FiberChain | None = None,
):
    """Integral of a rational 1-form over a cycle: (value, error bound)."""
    if isinstance(form, OneForm):
        form = RationalForm(form, None)
    chain = chain or FiberChain(num, cycle, cfg)
    return chain.integrate(form, tol)


def integrate_many(forms, cycle, num, cfg=None, tol=None):
    """Integrate several forms over one shared scaffold."""
    chain = FiberChain(num, cycle, cfg)
    out = []
    for form in forms:
        out.append(integrate(form, cycle, num, cfg, tol, chain=chain))
    return out


def monomial_basis(B: int):
    """Monomial 1-forms x^i y^j dx, x^i y^j dy, i + j <= B.

    Graded-lex ordering (total degree, then x-power descending), dx
    before dy for each monomial.
    """
    labels, forms = [], []
    zero = BivarPoly.zero()
    for g in range(B + 1):
        for i in range(g, -1, -1):
            j = g - i
            m = BivarPoly.monomial(i, j)
            name = ""
            if i:
                name += f"x^{i}" if i > 1 else "x"
            if j:
                name += ("*" if name else "") + (f"y^{j}" if j > 1 else "y")
            name = name or "1"
            labels.append(f"{name} dx")
            forms.append(RationalForm(OneForm(m, zero), None))
            labels.append(f"{name} dy")
            forms.append(RationalForm(OneForm(zero, m), None))
    return labels, forms


@dataclass
class PeriodVector:
    bound: int
    labels: list
    values: np.ndarray
    errors: np.ndarray
    level: complex
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.labels)

    def distance(self, other: "PeriodVector") -> float:
        if self.labels != other.labels:
            raise ValueError("period vectors use different bases")
        return float(np.max(np.abs(self.values - other.values)))

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "level": [self.level.real, self.level.imag],
            "entries": [
                {"form": lb, "value": [v.real, v.imag], "error": float(e)}
                for lb, v, e in zip(self.labels, self.values, self.errors)
            ],
            "provenance": self.provenance,
        }


def periods(
    cycle: Cycle,
    bound: int,
    num: PencilNumeric,
    cfg: RunConfig | None = None,
    tol: float | None = None,
) -> PeriodVector:
    """Period vector of the monomial basis over one shared scaffold."""
    labels, forms = monomial_basis(bound)
    chain = FiberChain(num, cycle, cfg)
    vals = np.empty(len(forms), dtype=complex)
    errs = np.empty(len(forms))
    for k, form in enumerate(forms):
        v, e = chain.integrate(form, tol)
        vals[k] = v
        errs[k] = e
    return PeriodVector(
        bound=bound, labels=labels, values=vals, errors=errs,
        level=complex(cycle.level), provenance=dict(cycle.provenance),
    )


def residue_vanishing(
    form: RationalForm,
    cdata: CriticalData,
    level: complex,
    cfg: RunConfig | None = None,
    m: int | None = None,
    tol: float | None = None,
):
    """Residue integrals around every indeterminacy point at one level.

    Returns a list of {point, value, error, vanishes} dicts; `vanishes`
    compares |value| against the zero tolerance.
    """
    cfg = cfg or RunConfig()
    ztol = tol if tol is not None else cfg.zero_tol
    out = []
    for k, q in enumerate(cdata.indeterminacy_points):
        cyc = seed_indeterminacy_cycle(cdata, k, level, m, cfg)
        v, e = integrate(form, cyc, cdata.num, cfg)
        out.append({
            "point": [q[0].real, q[0].imag, q[1].real, q[1].imag],
            "value": complex(v),
            "error": float(e),
            "vanishes": bool(abs(v) <= ztol),
        })
    return out
