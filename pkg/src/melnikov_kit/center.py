"""Center conditions at a Morse point: normalization and obstructions.

After a linear change of coordinates a nondegenerate antisymmetric
singular point has 1-jet d(xy).  Formal first integrals f = xy + f3 +
f4 + ... are built order by order through the operator
S_n(g) = d(xy) ^ dg, which is diagonal on monomials:
S_n(x^i y^j) = (j - i) x^i y^j dx^dy.  For odd n the order-n equation
is always solvable; for even n the single diagonal monomial (xy)^(n/2)
obstructs, and its right-hand-side coefficient is the obstruction
polynomial P_n.  Coefficients may be exact scalars, complex floats, or
parameter polynomials (symbolic mode), and the recursion is identical
in all three.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import BivarPoly, GaussianRational, OneForm, TwoForm, exterior_d
from .config import max_symbolic_degree
from .params import ParamPoly

__all__ = [
    "NormalizedGerm",
    "ObstructionReport",
    "normalize_linear_part",
    "s_apply",
    "s_solve",
    "obstructions",
    "symbolic_quadratic_germ",
    "float_center_probe",
    "D_XY",
]

D_XY = OneForm(BivarPoly.monomial(0, 1), BivarPoly.monomial(1, 0))  # y dx + x dy


@dataclass
class NormalizedGerm:
    """Result of bringing the linear part to d(xy) exactly (or to float tolerance)."""

    omega: OneForm
    linear_map: tuple        # ((m11, m12), (m21, m22)): (x, y) = M (u, v)
    scalar: object           # constant k divided out of the whole form
    mode: str                # "exact" | "float"
    condition: float = 1.0
    warnings: list = field(default_factory=list)


def _linear_coeffs(omega: OneForm):
    a = omega.A.coeff(1, 0)
    b = omega.A.coeff(0, 1)
    c = omega.B.coeff(1, 0)
    e = omega.B.coeff(0, 1)
    return a, b, c, e


def normalize_linear_part(omega: OneForm, exact: bool = True) -> NormalizedGerm:
    """Linear change making the 1-jet equal k d(xy), then division by k.

    The input must be singular at the origin.  The dual vector field
    X = (B, -A) must have opposite nonzero eigenvalues (trace zero,
    determinant nonzero).  In exact mode the eigenvalue sqrt must stay
    in Q(i); otherwise a ValueError directs the caller to float mode.
    """
    if exact:
        return _normalize_exact(omega)
    return _normalize_float(omega)


def _normalize_exact(omega: OneForm) -> NormalizedGerm:
    if not (omega.A.coeff(0, 0).is_zero() and omega.B.coeff(0, 0).is_zero()):
        raise ValueError("germ must be singular at the origin (translate first)")
    a, b, c, e = _linear_coeffs(omega)
    # X = (B, -A) linearization [[c, e], [-a, -b]]
    trace = c - b
    det = a * e - c * b  # det [[c, e], [-a, -b]] = -cb + ea
    if not trace.is_zero():
        raise ValueError(
            "linear part is not of center type: eigenvalues are not opposite "
            f"(trace {trace})"
        )
    if det == GaussianRational(0):
        raise ValueError("degenerate linear part (zero determinant)")
    lam2 = -det
    lam = lam2.sqrt() if isinstance(lam2, GaussianRational) else None
    if lam is None:
        raise ValueError(
            "eigen-data not representable exactly in Q(i); use float mode"
        )

    def eigvec(mu):
        # rows of (M - mu I): (c - mu, e), (-a, -b - mu)
        r1 = (c - mu, e)
        if not (r1[0].is_zero() and r1[1].is_zero()):
            v = (e, mu - c)
            if not (v[0].is_zero() and v[1].is_zero()):
                return v
        v = (b + mu, -a)
        if not (v[0].is_zero() and v[1].is_zero()):
            return v
        raise ValueError("degenerate eigenspace (internal error)")

    def unit_first(v):
        pivot = v[0] if not v[0].is_zero() else v[1]
        return (v[0] / pivot, v[1] / pivot)

    vp = unit_first(eigvec(lam))
    vm = unit_first(eigvec(-lam))
    m = ((vp[0], vm[0]), (vp[1], vm[1]))
    w = omega.pullback_linear(m)
    k = w.A.coeff(0, 1)
    ok = (
        w.A.coeff(1, 0).is_zero()
        and w.B.coeff(0, 1).is_zero()
        and w.B.coeff(1, 0) == k
        and not k.is_zero()
    )
    if not ok:
        raise AssertionError("linear normalization failed (internal error)")
    return NormalizedGerm(
        omega=w.scale(GaussianRational(1) / k),
        linear_map=m,
        scalar=k,
        mode="exact",
    )


def _normalize_float(omega: OneForm) -> NormalizedGerm:
    import numpy as np

    w0 = omega.to_float()
    if abs(complex(w0.A.coeff(0, 0))) > 1e-9 or abs(complex(w0.B.coeff(0, 0))) > 1e-9:
        raise ValueError("germ must be singular at the origin (translate first)")
    a, b, c, e = (complex(v) for v in _linear_coeffs(w0))
    scale = max(abs(a), abs(b), abs(c), abs(e), 1e-300)
    trace = c - b
    det = a * e - c * b
    warnings = []
    if abs(trace) > 1e-8 * scale:
        raise ValueError(f"linear part is not of center type (trace {trace:.3e})")
    if abs(det) <= 1e-12 * scale * scale:
        raise ValueError("degenerate linear part (near-zero determinant)")
    lam = np.sqrt(complex(-det))

    def eigvec(mu):
        v = (e, mu - c)
        if abs(v[0]) + abs(v[1]) > 1e-12 * scale:
            return v
        return (b + mu, -a)

    def unit_first(v):
        pivot = v[0] if abs(v[0]) >= abs(v[1]) else v[1]
        return (v[0] / pivot, v[1] / pivot)

    vp = unit_first(eigvec(lam))
    vm = unit_first(eigvec(-lam))
    M = np.array([[vp[0], vm[0]], [vp[1], vm[1]]], dtype=complex)
    cond = float(np.linalg.cond(M))
    m = ((vp[0], vm[0]), (vp[1], vm[1]))
    w = w0.pullback_linear(m)
    k = complex(w.A.coeff(0, 1))
    resid = max(
        abs(complex(w.A.coeff(1, 0))),
        abs(complex(w.B.coeff(0, 1))),
        abs(complex(w.B.coeff(1, 0)) - k),
    )
    if abs(k) < 1e-12 * scale or resid > 1e-6 * abs(k):
        raise ValueError("float normalization failed to reach d(xy) shape")
    if resid > 1e-9 * abs(k):
        warnings.append(f"normalization residual {resid:.3e} relative to |k| = {abs(k):.3e}")
    return NormalizedGerm(
        omega=w.scale(1.0 / k),
        linear_map=m,
        scalar=k,
        mode="float",
        condition=cond,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# the S operator
# ---------------------------------------------------------------------------


def _check_homogeneous(g: BivarPoly, n: int, what: str):
    for (i, j), _ in g.terms():
        if i + j != n:
            raise ValueError(f"{what} must be homogeneous of degree {n}, found x^{i}y^{j}")


def s_apply(n: int, g: BivarPoly) -> TwoForm:
    """S_n(g) = d(xy) ^ dg = sum (j - i) g_ij x^i y^j dx^dy (g homogeneous of degree n)."""
    _check_homogeneous(g, n, "argument of S_n")
    out = {}
    for (i, j), v in g.terms():
        if i != j:
            out[(i, j)] = v * Fraction(j - i)
    return TwoForm(BivarPoly(out))


def s_solve(n: int, rhs) -> tuple:
    """Solve S_n(f) = rhs on the solvable part; return (f, obstruction).

    rhs is a TwoForm (or its coefficient polynomial), homogeneous of
    degree n.  Off-diagonal monomials divide by (j - i); the diagonal
    coefficient at (xy)^(n/2) (even n only) is returned as the
    obstruction.  The kernel gauge pins f's diagonal coefficient to 0.
    """
    poly = rhs.C if isinstance(rhs, TwoForm) else rhs
    _check_homogeneous(poly, n, "right-hand side of S_n")
    coeffs = {}
    obstruction = None
    for (i, j), v in poly.terms():
        if i == j:
            obstruction = v
        else:
            coeffs[(i, j)] = v * Fraction(1, j - i)
    f = BivarPoly(coeffs)
    if obstruction is None:
        # a zero of the same coefficient ring as the data, when visible
        sample = next((v for _, v in poly.terms()), None)
        obstruction = sample * 0 if sample is not None else GaussianRational(0)
    return f, obstruction


# ---------------------------------------------------------------------------
# the obstruction recursion
# ---------------------------------------------------------------------------


@dataclass
class ObstructionReport:
    max_order: int
    obstructions: dict       # even n -> P_n (raw, coefficient-ring valued)
    jets: dict               # n -> f_n (from f = xy + f3 + ...)
    mode: str                # "exact" | "float" | "symbolic"
    normalized: dict = field(default_factory=dict)  # symbolic: content-cleared P_n
    warnings: list = field(default_factory=list)

    def all_zero(self, tol: float = 0.0) -> bool:
        for v in self.obstructions.values():
            if isinstance(v, GaussianRational):
                if not v.is_zero():
                    return False
            elif isinstance(v, ParamPoly):
                if not v.is_zero():
                    return False
            else:
                if abs(complex(v)) > tol:
                    return False
        return True


def _infer_mode(omega: OneForm) -> str:
    for poly in (omega.A, omega.B):
        for _, v in poly.terms():
            if isinstance(v, ParamPoly):
                return "symbolic"
            if isinstance(v, GaussianRational):
                continue
            return "float"
    return "exact"


def _assert_unit_linear_part(omega: OneForm, mode: str):
    a = omega.A.coeff(1, 0)
    b = omega.A.coeff(0, 1)
    c = omega.B.coeff(1, 0)
    e = omega.B.coeff(0, 1)
    if mode == "float":
        ok = (
            abs(complex(a)) <= 1e-8
            and abs(complex(e)) <= 1e-8
            and abs(complex(b) - 1) <= 1e-8
            and abs(complex(c) - 1) <= 1e-8
        )
    else:
        ok = a == 0 and e == 0 and b == 1 and c == 1
    if not ok:
        raise ValueError("germ is not normalized: linear part must be d(xy)")


def obstructions(omega: OneForm, max_order: int, kernel_gauge: dict | None = None) -> ObstructionReport:
    """Obstruction polynomials P_4, P_6, ... up to max_order.

    omega must have linear part d(xy) (see normalize_linear_part).  The
    recursion solves d(xy) ^ df_n = -sum_{m>=2} omega_m ^ df_{n+1-m}
    order by order, records the diagonal obstruction for even n, pins
    f_n's kernel coefficient to zero (plus any requested kernel gauge),
    and continues regardless of nonzero obstructions.
    """
    mode = _infer_mode(omega)
    _assert_unit_linear_part(omega, mode)
    if max_order < 2:
        raise ValueError("max_order must be at least 2")
    cap = max_symbolic_degree()
    warnings = []
    if mode == "symbolic" and max_order > cap:
        warnings.append(f"symbolic order capped at {cap} (MELNIKOV_KIT_MAXDEG)")
        max_order = cap

    parts = {n: omega.homogeneous_component(n) for n in range(2, max(omega.degree, 1) + 1)}
    parts = {n: w for n, w in parts.items() if not w.is_zero()}

    one = (1 + 0j) if mode == "float" else GaussianRational(1)
    xy = BivarPoly.monomial(1, 1, one)
    fs = {2: xy}
    obs = {}
    for n in range(3, max_order + 1):
        rhs = BivarPoly.zero()
        for m, wm in parts.items():
            k = n + 1 - m
            fk = fs.get(k)
            if fk is None:
                continue
            rhs = rhs - wm.wedge(exterior_d(fk)).C
        fn, pn = s_solve(n, rhs)
        if kernel_gauge and n in kernel_gauge and n % 2 == 0:
            fn = fn + BivarPoly.monomial(n // 2, n // 2, kernel_gauge[n])
        fs[n] = fn
        if n % 2 == 0:
            if mode == "float" and isinstance(pn, GaussianRational):
                pn = 0j
            obs[n] = pn

    normalized = {}
    if mode == "symbolic":
        normalized = {
            n: (v.integer_normalized() if isinstance(v, ParamPoly) else v)
            for n, v in obs.items()
        }
    return ObstructionReport(
        max_order=max_order,
        obstructions=obs,
        jets=fs,
        mode=mode,
        normalized=normalized,
        warnings=warnings,
    )


def symbolic_quadratic_germ():
    """Degree-2 germ with indeterminate coefficients.

    omega = d(xy) + omega_2 + omega_3 where omega_2 has six free
    quadratic coefficients and omega_3 = h (y dx - x dy) with h a free
    quadratic (the radial top part of a degree-2 foliation).  Returns
    (omega, names).
    """
    names = ("a20", "a11", "a02", "b20", "b11", "b02", "h20", "h11", "h02")

    def P(idx):
        return ParamPoly.param(names, idx)

    def C(v):
        return ParamPoly.const(names, v)

    one = C(1)
    A = BivarPoly({(0, 1): one})  # y
    B = BivarPoly({(1, 0): one})  # x
    A = A + BivarPoly({(2, 0): P(0), (1, 1): P(1), (0, 2): P(2)})
    B = B + BivarPoly({(2, 0): P(3), (1, 1): P(4), (0, 2): P(5)})
    h = BivarPoly({(2, 0): P(6), (1, 1): P(7), (0, 2): P(8)})
    y = BivarPoly({(0, 1): one})
    x = BivarPoly({(1, 0): one})
    A = A + h * y
    B = B - h * x
    return OneForm(A, B), names


def float_center_probe(omega: OneForm, point, order: int = 6, tol: float = 1e-8) -> bool:
    """Local first-integral probe at a singular point (float mode).

    Translates the form, normalizes the linear part, and checks the
    obstructions up to the given order against a relative tolerance.
    Returns False when normalization fails or an obstruction is large.
    """
    w = omega.to_float().translate(complex(point[0]), complex(point[1]))
    try:
        germ = normalize_linear_part(w, exact=False)
        rep = obstructions(germ.omega, order)
    except ValueError:
        return False
    scale = 1.0
    for _, wpart in germ.omega.homogeneous_parts():
        for poly in (wpart.A, wpart.B):
            for _, v in poly.terms():
                scale = max(scale, abs(complex(v)))
    return rep.all_zero(tol * scale)
