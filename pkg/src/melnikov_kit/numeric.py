"""Compiled float evaluation and low-level numeric kernels.

Bridges the exact algebra to vectorized numpy work: polynomial
compilation, evaluation of a pencil first integral and its gradient,
minimum-norm Newton projection onto fibers, root polishing for
polynomial systems, and a small adaptive Runge-Kutta integrator for
complex scalar ODEs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as npp

from .algebra import BivarPoly

__all__ = [
    "CompiledPoly",
    "compile_poly",
    "PencilNumeric",
    "newton_polish_system",
    "rk_integrate",
]


class CompiledPoly:
    """Vectorized evaluator for a BivarPoly (complex float view)."""

    __slots__ = ("C", "degree")

    def __init__(self, p: BivarPoly):
        self.C = p.coeff_matrix()
        self.degree = p.degree

    def __call__(self, x, y):
        return npp.polyval2d(x, y, self.C)


def compile_poly(p: BivarPoly) -> CompiledPoly:
    return CompiledPoly(p)


@dataclass
class PencilNumeric:
    """Float view of the first integral f = F^p / G^q with derivatives.

    Gradients are evaluated through polynomial numerators
    Nx = p G Fx - q F Gx, Ny = p G Fy - q F Gy (no cancellation near the
    base locus): grad f = F^(p-1) (Nx, Ny) / G^(q+1).
    """

    F: CompiledPoly
    G: CompiledPoly
    Nx: CompiledPoly
    Ny: CompiledPoly
    p: int
    q: int

    @staticmethod
    def build(F: BivarPoly, G: BivarPoly, p: int, q: int) -> "PencilNumeric":
        pQ = BivarPoly.const(p)
        qQ = BivarPoly.const(q)
        Nx = pQ * G * F.diff("x") - qQ * F * G.diff("x")
        Ny = pQ * G * F.diff("y") - qQ * F * G.diff("y")
        return PencilNumeric(
            F=compile_poly(F), G=compile_poly(G),
            Nx=compile_poly(Nx), Ny=compile_poly(Ny), p=p, q=q,
        )

    def value(self, x, y):
        Fv = self.F(x, y)
        Gv = self.G(x, y)
        return Fv ** self.p / Gv ** self.q

    def value_grad(self, x, y):
        Fv = self.F(x, y)
        Gv = self.G(x, y)
        f = Fv ** self.p / Gv ** self.q
        pref = Fv ** (self.p - 1) / Gv ** (self.q + 1)
        return f, pref * self.Nx(x, y), pref * self.Ny(x, y)

    def project_fiber(self, x, y, t, tol=1e-12, maxit=40):
        """Minimum-norm Newton projection of points onto the fiber f = t.

        Vectorized over numpy arrays; returns (x, y, ok) with ok a bool
        mask of converged entries.
        """
        x = np.array(x, dtype=complex)
        y = np.array(y, dtype=complex)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        y = np.atleast_1d(y)
        ok = np.zeros(x.shape, dtype=bool)
        for _ in range(maxit):
            f, fx, fy = self.value_grad(x, y)
            r = f - t
            ok = np.abs(r) <= tol
            if ok.all():
                break
            n2 = np.abs(fx) ** 2 + np.abs(fy) ** 2
            bad = n2 == 0
            if bad.any():
                n2 = np.where(bad, 1.0, n2)
            step = np.where(ok | bad, 0.0, r / n2)
            x = x - step * np.conj(fx)
            y = y - step * np.conj(fy)
        if scalar:
            return x[0], y[0], bool(ok[0])
        return x, y, ok


def newton_polish_system(fns, jac, z0, tol=1e-13, maxit=60):
    """Polish a root of a 2x2 complex polynomial system.

    fns = (A, B) callables; jac = ((Ax, Ay), (Bx, By)) callables.
    Returns (x, y, residual, converged).
    """
    x, y = complex(z0[0]), complex(z0[1])
    A, B = fns
    (Ax, Ay), (Bx, By) = jac
    res = float("inf")
    for _ in range(maxit):
        a, b = A(x, y), B(x, y)
        res = max(abs(a), abs(b))
        if res <= tol:
            return x, y, res, True
        j11, j12 = Ax(x, y), Ay(x, y)
        j21, j22 = Bx(x, y), By(x, y)
        det = j11 * j22 - j12 * j21
        if det == 0:
            return x, y, res, False
        dx = (a * j22 - b * j12) / det
        dy = (j11 * b - j21 * a) / det
        x, y = x - dx, y - dy
        if abs(dx) + abs(dy) < 1e-16 * (1 + abs(x) + abs(y)):
            a, b = A(x, y), B(x, y)
            res = max(abs(a), abs(b))
            return x, y, res, res <= tol * 10
    a, b = A(x, y), B(x, y)
    res = max(abs(a), abs(b))
    return x, y, res, res <= tol * 10


# Dormand-Prince 5(4) coefficients
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


class OdeFailure(RuntimeError):
    pass


def rk_integrate(rhs, t0: float, t1: float, y0, rtol=1e-11, atol=1e-13,
                 max_steps=100000, guard=None):
    """Adaptive Dormand-Prince integration of a complex scalar ODE.

    rhs(t, y) -> dy/dt over the real interval [t0, t1].  guard, when
    given, is called with each accepted (t, y) and may raise to abort.
    Returns (y1, stats) with step diagnostics.
    """
    t = float(t0)
    y = complex(y0)
    span = t1 - t0
    if span == 0:
        return y, {"steps": 0, "rejected": 0}
    h = span / 8.0
    steps = rejected = 0
    direction = 1.0 if span > 0 else -1.0
    while (t1 - t) * direction > 1e-300:
        if abs(h) > abs(t1 - t):
            h = t1 - t
        k = [rhs(t, y)]
        for s in range(1, 7):
            acc = 0.0j
            for a, kv in zip(_DP_A[s], k):
                acc += a * kv
            k.append(rhs(t + h * sum(_DP_A[s]), y + h * acc))
        y5 = y + h * sum(b * kv for b, kv in zip(_DP_B5, k))
        y4 = y + h * sum(b * kv for b, kv in zip(_DP_B4, k))
        err = abs(y5 - y4)
        scale = atol + rtol * max(abs(y), abs(y5))
        if err <= scale or abs(h) < 1e-14 * max(1.0, abs(span)):
            t += h
            y = y5
            steps += 1
            if guard is not None:
                guard(t, y)
        else:
            rejected += 1
        # standard PI-free step update with clamps
        fac = 0.9 * (scale / err) ** 0.2 if err > 0 else 5.0
        fac = min(5.0, max(0.2, fac))
        h *= fac
        if steps + rejected > max_steps:
            raise OdeFailure("step budget exhausted in leaf integration")
    return y, {"steps": steps, "rejected": rejected}
