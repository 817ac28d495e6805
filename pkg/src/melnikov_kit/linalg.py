"""Exact linear algebra over the Gaussian rationals.

Gaussian elimination with exact field arithmetic: solving, nullspaces,
determinants, Lagrange interpolation, and Sylvester resultants of
bivariate polynomials (via evaluation and exact interpolation).
Infeasible systems come with a cokernel certificate that can be checked
independently: a row vector y with y*A = 0 and y*b != 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import BivarPoly, GaussianRational

__all__ = [
    "LinearSolution",
    "InfeasibleCertificate",
    "solve_linear",
    "det_exact",
    "lagrange_interpolate",
    "resultant_wrt",
]

_Z = GaussianRational(0)
_I = GaussianRational(1)


@dataclass(frozen=True)
class LinearSolution:
    """Particular solution (free variables pinned to zero) plus nullspace basis."""

    particular: list
    nullspace: list
    rank: int


@dataclass(frozen=True)
class InfeasibleCertificate:
    """Exact evidence of infeasibility: combination y with y*A = 0, y*b != 0."""

    combination: list
    residual: GaussianRational

    def check(self, rows, rhs) -> bool:
        m = len(rows)
        n = len(rows[0]) if rows else 0
        for j in range(n):
            s = _Z
            for i in range(m):
                s = s + self.combination[i] * rows[i][j]
            if not s.is_zero():
                return False
        s = _Z
        for i in range(m):
            s = s + self.combination[i] * rhs[i]
        return not s.is_zero()


def solve_linear(rows, rhs):
    """Solve A x = b exactly.

    Returns a LinearSolution or an InfeasibleCertificate.  Pivoting is
    deterministic (first nonzero entry in column order), so outputs are
    reproducible.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    A = [list(r) for r in rows]
    b = list(rhs)
    # R tracks row operations so certificates refer to the original rows
    R = [[_I if i == j else _Z for j in range(m)] for i in range(m)]

    pivots = []  # (row, col)
    prow = 0
    for col in range(n):
        sel = None
        for r in range(prow, m):
            if not A[r][col].is_zero():
                sel = r
                break
        if sel is None:
            continue
        if sel != prow:
            A[sel], A[prow] = A[prow], A[sel]
            b[sel], b[prow] = b[prow], b[sel]
            R[sel], R[prow] = R[prow], R[sel]
        inv = _I / A[prow][col]
        A[prow] = [v * inv for v in A[prow]]
        b[prow] = b[prow] * inv
        R[prow] = [v * inv for v in R[prow]]
        for r in range(m):
            if r != prow and not A[r][col].is_zero():
                f = A[r][col]
                A[r] = [vr - f * vp for vr, vp in zip(A[r], A[prow])]
                b[r] = b[r] - f * b[prow]
                R[r] = [vr - f * vp for vr, vp in zip(R[r], R[prow])]
        pivots.append((prow, col))
        prow += 1
        if prow == m:
            break

    for r in range(prow, m):
        if not b[r].is_zero():
            return InfeasibleCertificate(combination=list(R[r]), residual=b[r])

    x = [_Z] * n
    pivot_cols = set()
    for r, c in pivots:
        x[c] = b[r]
        pivot_cols.add(c)

    null = []
    for free in range(n):
        if free in pivot_cols:
            continue
        v = [_Z] * n
        v[free] = _I
        for r, c in pivots:
            v[c] = -A[r][free]
        null.append(v)
    return LinearSolution(particular=x, nullspace=null, rank=len(pivots))


def det_exact(M) -> GaussianRational:
    """Determinant by exact elimination."""
    n = len(M)
    A = [list(r) for r in M]
    det = _I
    for col in range(n):
        sel = None
        for r in range(col, n):
            if not A[r][col].is_zero():
                sel = r
                break
        if sel is None:
            return _Z
        if sel != col:
            A[sel], A[col] = A[col], A[sel]
            det = -det
        det = det * A[col][col]
        inv = _I / A[col][col]
        for r in range(col + 1, n):
            if not A[r][col].is_zero():
                f = A[r][col] * inv
                A[r] = [vr - f * vp for vr, vp in zip(A[r], A[col])]
    return det


def lagrange_interpolate(points) -> list:
    """Exact coefficients (ascending) of the polynomial through (x_k, y_k)."""
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    n = len(xs)
    coeffs = [_Z] * n
    for k in range(n):
        # basis numerator prod_{j != k} (X - x_j), expanded incrementally
        basis = [_I]
        denom = _I
        for j in range(n):
            if j == k:
                continue
            new = [_Z] * (len(basis) + 1)
            for d, c in enumerate(basis):
                new[d] = new[d] - c * xs[j]
                new[d + 1] = new[d + 1] + c
            basis = new
            denom = denom * (xs[k] - xs[j])
        scale = ys[k] / denom
        for d, c in enumerate(basis):
            coeffs[d] = coeffs[d] + c * scale
    while coeffs and coeffs[-1].is_zero():
        coeffs.pop()
    return coeffs


def _coeff_lists_wrt(p: BivarPoly, var: str):
    """y-coefficient polynomials of p (polynomials in the other variable)."""
    out = {}
    for (i, j), v in p.terms():
        k = j if var == "y" else i
        other = i if var == "y" else j
        out.setdefault(k, {})[other] = v
    deg = max(out, default=-1)
    return [out.get(k, {}) for k in range(deg + 1)], deg


def _eval_univariate(coeff_dict, x0: GaussianRational) -> GaussianRational:
    total = _Z
    for e, v in coeff_dict.items():
        t = v
        for _ in range(e):
            t = t * x0
        total = total + t
    return total


def resultant_wrt(p: BivarPoly, q: BivarPoly, var: str = "y") -> list:
    """Resultant of p, q with respect to var, as exact coefficients
    (ascending) in the remaining variable.

    Computed by evaluating the fixed-shape Sylvester determinant at
    enough sample points and interpolating exactly, which sidesteps
    degree-drop pitfalls of specialized resultants.
    """
    pc, dp = _coeff_lists_wrt(p, var)
    qc, dq = _coeff_lists_wrt(q, var)
    if dp < 0 or dq < 0:
        raise ValueError("resultant of the zero polynomial is undefined")
    other = "x" if var == "y" else "y"

    def other_deg(poly):
        lists, _ = _coeff_lists_wrt(poly, var)
        return max((max(d, default=0) for d in (list(c.keys()) for c in lists)), default=0)

    if dp == 0 and dq == 0:
        raise ValueError(f"neither polynomial involves {var}")
    if dp == 0:
        # Res(a, q) = a^{deg q}
        out = BivarPoly.const(_I)
        base = BivarPoly({(e, 0) if other == "x" else (0, e): v for e, v in pc[0].items()})
        for _ in range(dq):
            out = out * base
        return _unicoeffs(out, other)
    if dq == 0:
        out = BivarPoly.const(_I)
        base = BivarPoly({(e, 0) if other == "x" else (0, e): v for e, v in qc[0].items()})
        for _ in range(dp):
            out = out * base
        return _unicoeffs(out, other)

    bound = other_deg(p) * dq + other_deg(q) * dp
    samples = []
    k = 0
    while len(samples) < bound + 1:
        # sample points 0, 1, -1, 2, -2, ...
        v = Fraction((k + 1) // 2 * (1 if k % 2 else -1)) if k else Fraction(0)
        k += 1
        x0 = GaussianRational(v)
        a = [_eval_univariate(c, x0) for c in pc]
        bvals = [_eval_univariate(c, x0) for c in qc]
        size = dp + dq
        M = [[_Z] * size for _ in range(size)]
        for r in range(dq):
            for s, av in enumerate(a):
                M[r][r + (dp - s)] = av
        for r in range(dp):
            for s, bv in enumerate(bvals):
                M[dq + r][r + (dq - s)] = bv
        samples.append((x0, det_exact(M)))
    return lagrange_interpolate(samples)


def _unicoeffs(p: BivarPoly, var: str) -> list:
    d = p.degree
    out = [_Z] * (d + 1)
    for (i, j), v in p.terms():
        e = i if var == "x" else j
        out[e] = out[e] + v
    while out and out[-1].is_zero():
        out.pop()
    return out
