"""Foliation descriptions: pencils, logarithmic forms, singular points.

A pencil foliation has first integral f = F^p / G^q and is induced by
the polynomial 1-form omega0 = p G dF - q F dG.  A logarithmic form
f1...fr sum(lambda_i dfi/fi) is polynomial once cleared; with the side
condition sum(d_i lambda_i) = 0 it has degree sum(d_i) - 2 in the
generic case.  Singular points of a polynomial 1-form A dx + B dy are
common zeros of (A, B), found through exact resultant elimination plus
Newton polishing, and classified by the linearization of the dual
vector field X = (B, -A).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import BivarPoly, GaussianRational, OneForm, exterior_d
from .config import RunConfig
from .linalg import resultant_wrt
from .numeric import compile_poly, newton_polish_system

__all__ = [
    "PencilSpec",
    "LogarithmicSpec",
    "FoliationForm",
    "SingularPoint",
    "pencil_form",
    "logarithmic_form",
    "singular_points",
    "have_common_factor",
    "KIND_CENTER",
    "KIND_INDETERMINACY",
    "KIND_OTHER",
    "KIND_DEGENERATE",
]

KIND_CENTER = "morse-center-candidate"
KIND_INDETERMINACY = "indeterminacy"
KIND_OTHER = "non-degenerate-other"
KIND_DEGENERATE = "degenerate"


def have_common_factor(F: BivarPoly, G: BivarPoly) -> bool:
    """Exact test for a nonconstant common factor."""
    if F.is_zero() or G.is_zero():
        return not (F.is_zero() and G.degree == 0) and not (G.is_zero() and F.degree == 0)
    if F.degree == 0 or G.degree == 0:
        return False

    def deg_wrt(p, var):
        return max((k[1] if var == "y" else k[0]) for k, _ in p.terms())

    checked = False
    for var in ("y", "x"):
        if deg_wrt(F, var) >= 1 and deg_wrt(G, var) >= 1:
            checked = True
            if len(resultant_wrt(F, G, var)) == 0:
                return True
    if not checked:
        # one is pure-x, the other pure-y: no nonconstant common factor
        return False
    return False


@dataclass
class PencilSpec:
    """First integral f = F^p / G^q (Hamiltonian when G = 1, p = q = 1).

    Construction validates gcd(p, q) = 1 and coprimality of F, G, checks
    the rescaled closedness identity exactly, and normalizes the
    Hamiltonian encoding (constant G) to (p, q) = (1, 1), f = F.
    """

    F: BivarPoly
    G: BivarPoly
    p: int = 1
    q: int = 1
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("pencil exponents must be positive")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"gcd(p, q) must be 1, got ({self.p}, {self.q})")
        if self.F.is_zero() or self.G.is_zero():
            raise ValueError("pencil polynomials must be nonzero")
        if self.G.degree == 0:
            # Hamiltonian encoding: constant G normalizes to f = F
            one = BivarPoly.const(1)
            if not (self.G == one and self.p == 1 and self.q == 1):
                self.warnings.append(
                    "constant G normalized to G = 1 with (p, q) = (1, 1), f = F"
                )
            self.G = one
            self.p = 1
            self.q = 1
        elif have_common_factor(self.F, self.G):
            raise ValueError("F and G must be relatively prime")
        if self.p * self.F.degree != self.q * self.G.degree and self.G.degree > 0:
            self.warnings.append(
                f"degree ratio deg F / deg G = {self.F.degree}/{self.G.degree} "
                f"differs from q/p = {self.q}/{self.p}"
            )
        self._verify_integrability()

    @property
    def degree(self) -> int:
        """Foliation degree d = deg F + deg G - 2."""
        return self.F.degree + self.G.degree - 2

    @property
    def is_hamiltonian(self) -> bool:
        return self.G.degree == 0

    def omega0(self) -> OneForm:
        pQ = BivarPoly.const(self.p)
        qQ = BivarPoly.const(self.q)
        dF = exterior_d(self.F)
        dG = exterior_d(self.G)
        return OneForm(
            pQ * self.G * dF.A - qQ * self.F * dG.A,
            pQ * self.G * dF.B - qQ * self.F * dG.B,
        )

    def _verify_integrability(self):
        # d(omega0 / FG) = 0 cleared of denominators:
        # dy(A) FG - A dy(FG) == dx(B) FG - B dx(FG)
        w = self.omega0()
        FG = self.F * self.G
        left = w.A.diff("y") * FG - w.A * FG.diff("y")
        right = w.B.diff("x") * FG - w.B * FG.diff("x")
        if not (left - right).is_zero():
            raise AssertionError("pencil closedness identity failed (internal error)")

    def to_dict(self) -> dict:
        return {
            "pencil": {
                "F": str(self.F),
                "G": str(self.G),
                "p": self.p,
                "q": self.q,
            }
        }


def pencil_form(F: BivarPoly, G: BivarPoly, p: int = 1, q: int = 1) -> OneForm:
    """The integrable 1-form p G dF - q F dG after exact validation."""
    return PencilSpec(F, G, p, q).omega0()


@dataclass
class LogarithmicSpec:
    """Cleared logarithmic form f1...fr sum(lambda_i dfi / fi)."""

    factors: list
    lambdas: list
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.factors) != len(self.lambdas) or not self.factors:
            raise ValueError("need matching nonempty factor and lambda lists")
        self.lambdas = [
            v if isinstance(v, GaussianRational) else GaussianRational(v)
            for v in self.lambdas
        ]
        side = GaussianRational(0)
        for f, lam in zip(self.factors, self.lambdas):
            if f.degree <= 0:
                raise ValueError("factors must be nonconstant polynomials")
            side = side + lam * Fraction(f.degree)
        if not side.is_zero():
            raise ValueError(
                f"side condition sum(d_i lambda_i) = 0 fails exactly (got {side})"
            )
        for a in range(len(self.factors)):
            for b in range(a + 1, len(self.factors)):
                if have_common_factor(self.factors[a], self.factors[b]):
                    raise ValueError(f"factors {a} and {b} share a component")
        d = self.expected_degree
        actual = self.form().degree
        # the top coefficient part of a degree-d foliation may reach d+1
        if actual not in (d, d + 1):
            self.warnings.append(
                f"cleared form degree {actual} differs from generic value "
                f"{d} (+1 for the radial part); configuration is non-generic"
            )

    @property
    def expected_degree(self) -> int:
        return sum(f.degree for f in self.factors) - 2

    @property
    def expected_center_count(self) -> int:
        """Generic count d^2 + d + 1 - sum_{i<j} d_i d_j."""
        d = self.expected_degree
        degs = [f.degree for f in self.factors]
        cross = sum(
            degs[a] * degs[b] for a in range(len(degs)) for b in range(a + 1, len(degs))
        )
        return d * d + d + 1 - cross

    def form(self) -> OneForm:
        total = OneForm.zero()
        for i, (fi, lam) in enumerate(zip(self.factors, self.lambdas)):
            rest = BivarPoly.const(1)
            for j, fj in enumerate(self.factors):
                if j != i:
                    rest = rest * fj
            dfi = exterior_d(fi)
            total = total + OneForm(rest * dfi.A, rest * dfi.B).scale(lam)
        return total

    def to_dict(self) -> dict:
        return {
            "logarithmic": {
                "factors": [str(f) for f in self.factors],
                "lambdas": [str(v) for v in self.lambdas],
            }
        }


def logarithmic_form(factors, lambdas) -> OneForm:
    return LogarithmicSpec(list(factors), list(lambdas)).form()


@dataclass
class FoliationForm:
    """A bare polynomial 1-form with an optional declared degree."""

    omega: OneForm
    degree: int | None = None
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if self.degree is not None and self.omega.degree > self.degree + 1:
            self.warnings.append(
                f"form degree {self.omega.degree} exceeds declared budget {self.degree} + 1"
            )

    def to_dict(self) -> dict:
        return {
            "form": {
                "dx": str(self.omega.A),
                "dy": str(self.omega.B),
                **({"degree": self.degree} if self.degree is not None else {}),
            }
        }


@dataclass(frozen=True)
class SingularPoint:
    point: tuple          # (x, y) complex
    kind: str
    eigenvalues: tuple    # (lam1, lam2) of the dual vector field linearization
    residual: float
    trace: complex
    det: complex

    def is_real(self, tol: float = 1e-8) -> bool:
        return abs(self.point[0].imag) <= tol and abs(self.point[1].imag) <= tol


def _univariate_at(coeff_lists, x0: complex):
    """Complex coefficients (ascending in the eliminated variable) at x = x0."""
    out = []
    for cdict in coeff_lists:
        v = 0j
        for e, c in cdict.items():
            v += c.to_complex() * x0 ** e if isinstance(c, GaussianRational) else complex(c) * x0 ** e
        out.append(v)
    return out


def _poly_roots(coeffs_ascending) -> np.ndarray:
    c = np.array(coeffs_ascending, dtype=complex)
    if c.size == 0:
        return np.array([], dtype=complex)
    mags = np.abs(c)
    top = mags.max()
    if top == 0:
        return np.array([], dtype=complex)
    nz = np.nonzero(mags > 1e-14 * top)[0]
    if nz.size == 0:
        return np.array([], dtype=complex)
    c = c[: nz.max() + 1]
    if c.size <= 1:
        return np.array([], dtype=complex)
    return np.roots(c[::-1])


def _coeff_lists(p: BivarPoly, var: str):
    out = {}
    for (i, j), v in p.terms():
        k = j if var == "y" else i
        other = i if var == "y" else j
        out.setdefault(k, {})[other] = v
    deg = max(out, default=-1)
    return [out.get(k, {}) for k in range(deg + 1)]


def _common_zeros(A: BivarPoly, B: BivarPoly, cfg: RunConfig, box: float):
    """All isolated common zeros of (A, B) inside the box, polished."""
    if A.is_zero() and B.is_zero():
        raise ValueError("the zero form has no isolated singular points")
    if A.is_zero() or B.is_zero():
        raise ValueError("singular locus is a curve (one component vanishes identically)")
    if have_common_factor(A, B):
        raise ValueError("non-isolated singularities: components share a factor")

    def deg_wrt(p, var):
        return max((k[1] if var == "y" else k[0]) for k, _ in p.terms())

    # eliminate y when both components involve it; otherwise eliminate x
    if deg_wrt(A, "y") >= 1 and deg_wrt(B, "y") >= 1:
        elim = "y"
    elif deg_wrt(A, "x") >= 1 and deg_wrt(B, "x") >= 1:
        elim = "x"
    else:
        # each component univariate in a different variable: direct product
        elim = None

    cA = compile_poly(A)
    cB = compile_poly(B)
    cAx, cAy = compile_poly(A.diff("x")), compile_poly(A.diff("y"))
    cBx, cBy = compile_poly(B.diff("x")), compile_poly(B.diff("y"))
    fns = (cA, cB)
    jac = ((cAx, cAy), (cBx, cBy))

    cands = []
    if elim is None:
        pa = A if deg_wrt(A, "x") >= 1 else B
        pb = B if pa is A else A
        xs = _poly_roots([_univariate_at([c], 1.0)[0] for c in _coeff_lists(pa, "x")])
        ys = _poly_roots([_univariate_at([c], 1.0)[0] for c in _coeff_lists(pb, "y")])
        cands = [(x, y) for x in xs for y in ys]
    else:
        res = resultant_wrt(A, B, elim)
        if len(res) == 0:
            raise ValueError("non-isolated singularities: resultant vanishes identically")
        base_roots = _poly_roots([v.to_complex() for v in res])
        lists_A = _coeff_lists(A, elim)
        lists_B = _coeff_lists(B, elim)
        for r in base_roots:
            for lists in (lists_A, lists_B):
                cs = _univariate_at(lists, r)
                for s in _poly_roots(cs):
                    cands.append((r, s) if elim == "y" else (s, r))

    scale = max(
        1.0,
        max((abs(v.to_complex()) for _, v in A.terms()), default=1.0),
        max((abs(v.to_complex()) for _, v in B.terms()), default=1.0),
    )

    def newton_step(x, y):
        # size of one Newton step: ~eps at simple roots, ~cluster radius at
        # multiple roots, so it doubles as a per-point uncertainty estimate
        a11, a12 = cAx(x, y), cAy(x, y)
        a21, a22 = cBx(x, y), cBy(x, y)
        det = a11 * a22 - a12 * a21
        fa, fb = cA(x, y), cB(x, y)
        if abs(det) < 1e-13 * scale * scale * max(1.0, abs(x) + abs(y)) ** 2:
            return 1e-3
        return abs((a22 * fa - a12 * fb) / det) + abs((a11 * fb - a21 * fa) / det)

    polished = []
    for x0, y0 in cands:
        if abs(x0) > box or abs(y0) > box:
            continue
        x, y, res, ok = newton_polish_system(fns, jac, (x0, y0), tol=cfg.newton_tol * scale)
        if not ok or abs(x) > box or abs(y) > box:
            continue
        polished.append((res, x, y, newton_step(x, y)))

    # keep the best-polished representative of each root cluster
    polished.sort(key=lambda t: t[0])
    found = []
    for res, x, y, step in polished:
        rel = 1e-7 * max(1.0, abs(x) + abs(y))
        for xf, yf, _, stepf in found:
            if abs(x - xf) + abs(y - yf) < 10.0 * (step + stepf) + rel:
                break
        else:
            found.append((x, y, res, step))
    found.sort(key=lambda t: (round(t[0].real, 9), round(t[0].imag, 9),
                              round(t[1].real, 9), round(t[1].imag, 9)))
    return found, jac


def _first_integral_probe(omega: OneForm, point, order: int, tol: float) -> bool:
    """Float-mode local first-integral test via low-order obstructions."""
    from .center import float_center_probe

    return float_center_probe(omega, point, order, tol)


def singular_points(
    target,
    cfg: RunConfig | None = None,
    box: float = 1e6,
    real_only: bool = False,
    integral_order: int = 6,
):
    """Isolated singular points of a foliation, classified.

    target may be a PencilSpec, LogarithmicSpec, or OneForm (or
    FoliationForm).  Classification of the linearization of
    X = (B, -A): eigenvalue pair (lam, -lam) with lam != 0 marks a Morse
    center candidate when a local first-integral test passes; for
    integrable inputs (pencil/logarithmic) the test is the known first
    integral itself.
    """
    cfg = cfg or RunConfig()
    integrable = True
    indeterminacy_test = None

    if isinstance(target, PencilSpec):
        omega = target.omega0()
        cF, cG = compile_poly(target.F), compile_poly(target.G)

        def indeterminacy_test(x, y):
            return abs(cF(x, y)) < 1e-8 and abs(cG(x, y)) < 1e-8

    elif isinstance(target, LogarithmicSpec):
        omega = target.form()
        curves = [compile_poly(f) for f in target.factors]

        def indeterminacy_test(x, y):
            return sum(1 for c in curves if abs(c(x, y)) < 1e-8) >= 2

    elif isinstance(target, FoliationForm):
        omega = target.omega
        integrable = False
    elif isinstance(target, OneForm):
        omega = target
        integrable = False
    else:
        raise TypeError(f"cannot take singular points of {type(target).__name__}")

    found, jac = _common_zeros(omega.A, omega.B, cfg, box)
    (cAx, cAy), (cBx, cBy) = jac
    coeff_scale = max(
        1e-300,
        max((abs(v.to_complex()) for _, v in omega.A.terms()), default=0.0),
        max((abs(v.to_complex()) for _, v in omega.B.terms()), default=0.0),
    )
    form_deg = max(omega.A.degree, omega.B.degree)

    out = []
    for x, y, res, step in found:
        # dual vector field X = (B, -A); J = [[Bx, By], [-Ax, -Ay]]
        j11, j12 = cBx(x, y), cBy(x, y)
        j21, j22 = -cAx(x, y), -cAy(x, y)
        tr = j11 + j22
        det = j11 * j22 - j12 * j21
        scale = max(abs(j11), abs(j12), abs(j21), abs(j22), 1e-300)
        disc = np.sqrt(complex(tr * tr - 4 * det))
        lam1 = (tr + disc) / 2
        lam2 = (tr - disc) / 2

        # natural entry size of the linearization at this point; a Jacobian
        # far below it means a vanishing linear part, not a small form
        natural = coeff_scale * max(1.0, abs(x), abs(y)) ** max(form_deg - 1, 0)

        if indeterminacy_test is not None and indeterminacy_test(x, y):
            kind = KIND_INDETERMINACY
        elif (
            abs(det) <= 1e-10 * scale * scale
            or scale <= 1e-6 * natural
            or step > 1e-6 * max(1.0, abs(x) + abs(y))
        ):
            kind = KIND_DEGENERATE
        elif abs(tr) <= 1e-8 * scale:
            # trace-zero non-degenerate: for integrable inputs this is
            # always a Morse center (even on F = 0 or a factor curve, the
            # point is then a Morse point of that curve's equation and the
            # local integral stays Morse); otherwise probe for a formal
            # first integral to low order
            if integrable:
                kind = KIND_CENTER
            else:
                passed = _first_integral_probe(omega, (x, y), integral_order, cfg.zero_tol)
                kind = KIND_CENTER if passed else KIND_OTHER
        else:
            kind = KIND_OTHER

        sp = SingularPoint(
            point=(complex(x), complex(y)),
            kind=kind,
            eigenvalues=(complex(lam1), complex(lam2)),
            residual=float(res),
            trace=complex(tr),
            det=complex(det),
        )
        if real_only and not sp.is_real():
            continue
        out.append(sp)
    return out
