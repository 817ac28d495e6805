"""Independent ground truth: holonomy by direct leaf following.

The return map h_eps(t) of the perturbed foliation w_eps = w0 + eps w1 + ...
is computed with no reference to Abelian integrals: starting from the
transverse section at a marked vertex of a traced guide cycle
(parameterized by t = f restricted to the section), the leaf through the
start point is continued around the guide, one chart per guide chord, and
the first return to the section is solved for.  Melnikov functions then
fall out of an eps-grid by divided differences with Richardson
extrapolation.  Agreement with the `melnikov` module is the central
cross-check of the whole pipeline.

Leaf continuation works in chord charts: along the guide edge from a to b,
points are written z = a + tau (b - a) + zeta m with m unit and
Hermitian-orthogonal to the chord, and the kernel condition
w_eps(dz) = 0 becomes the scalar ODE dzeta/dtau = -w(e)/w(m).  This
avoids choosing x or y as the time variable, which fails at folds.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import OneForm
from .config import RunConfig
from .fibration import Cycle
from .melnikov import DeformationSpec
from .numeric import PencilNumeric, rk_integrate

__all__ = [
    "TubeEscape",
    "NoReturn",
    "ExtrapolationFailure",
    "HolonomySample",
    "holonomy",
    "melnikov_fd",
    "melnikov_fd_scan",
]


class TubeEscape(RuntimeError):
    """Leaf left the safety tube around the guide cycle (eps too large)."""


class NoReturn(RuntimeError):
    """First-return solve failed within the iteration budget."""


class ExtrapolationFailure(RuntimeError):
    """Richardson tableau hit the noise floor before the requested order."""


@dataclass
class HolonomySample:
    t: complex
    eps: complex
    h: complex
    steps: int
    rejected: int
    leaf_residual_max: float

    def to_dict(self) -> dict:
        return {
            "t": [self.t.real, self.t.imag],
            "eps": [self.eps.real, self.eps.imag],
            "h": [self.h.real, self.h.imag],
            "displacement": [(self.h - self.t).real, (self.h - self.t).imag],
            "steps": self.steps,
            "rejected": self.rejected,
            "leaf_residual_max": self.leaf_residual_max,
        }


class _CompiledDeformation:
    """omega_eps component evaluator: (A, B) at a point for given eps."""

    def __init__(self, dspec: DeformationSpec):
        from .numeric import compile_poly

        forms = [dspec.base.omega0()] + list(dspec.forms)
        self.parts = [(compile_poly(w.A.to_float()), compile_poly(w.B.to_float()))
                      for w in forms]

    def __call__(self, x, y, eps):
        A = 0j
        B = 0j
        scale = 1.0 + 0j
        for cA, cB in self.parts:
            A += scale * cA(x, y)
            B += scale * cB(x, y)
            scale *= eps
        return A, B


def _chart_frame(a, b):
    """Chord vector e and unit transverse m with <e, m>_herm = 0."""
    e = (b[0] - a[0], b[1] - a[1])
    ln = math.hypot(abs(e[0]), abs(e[1]))
    if ln == 0:
        raise ValueError("degenerate guide chord")
    m = (-e[1].conjugate() / ln, e[0].conjugate() / ln)
    return e, m


def _decompose(a, e, m, z):
    """(tau, zeta) with z = a + tau e + zeta m."""
    det = e[0] * m[1] - e[1] * m[0]
    rx, ry = z[0] - a[0], z[1] - a[1]
    tau = (rx * m[1] - ry * m[0]) / det
    zeta = (e[0] * ry - e[1] * rx) / det
    return tau, zeta


class _LeafTracker:
    """Finite-difference kernel residual over accepted integrator steps."""

    def __init__(self, omega, eps):
        self.omega = omega
        self.eps = eps
        self.prev = None
        self.max_residual = 0.0

    def push(self, z):
        if self.prev is not None:
            dx, dy = z[0] - self.prev[0], z[1] - self.prev[1]
            norm = math.hypot(abs(dx), abs(dy))
            if norm > 0:
                mx = ((z[0] + self.prev[0]) / 2, (z[1] + self.prev[1]) / 2)
                A, B = self.omega(mx[0], mx[1], self.eps)
                den = max(abs(A), abs(B)) * norm
                if den > 0:
                    r = abs(A * dx + B * dy) / den
                    self.max_residual = max(self.max_residual, r)
        self.prev = z


def _integrate_chart(omega, eps, a, e, m, tau0, tau1, zeta0, tube, cfg,
                     tracker=None):
    """Advance zeta along the straight complex segment tau0 -> tau1."""
    dtau = tau1 - tau0

    def zderiv(tau, zeta):
        x = a[0] + tau * e[0] + zeta * m[0]
        y = a[1] + tau * e[1] + zeta * m[1]
        A, B = omega(x, y, eps)
        wm = A * m[0] + B * m[1]
        we = A * e[0] + B * e[1]
        if abs(wm) <= 1e-14 * (abs(we) + abs(wm)):
            raise TubeEscape("foliation tangent to the transverse direction")
        return -we / wm

    def guard(s, zeta):
        if abs(zeta) > tube:
            raise TubeEscape(
                f"leaf left the tube (|zeta| = {abs(zeta):.3g} > {tube:.3g})")
        if tracker is not None:
            tau = tau0 + s * dtau
            tracker.push((a[0] + tau * e[0] + zeta * m[0],
                          a[1] + tau * e[1] + zeta * m[1]))

    if dtau == 0:
        return zeta0, {"steps": 0, "rejected": 0}
    return rk_integrate(lambda s, zz: dtau * zderiv(tau0 + s * dtau, zz),
                        0.0, 1.0, zeta0,
                        rtol=cfg.ode_rtol, atol=cfg.ode_atol, guard=guard)


def holonomy(dspec: DeformationSpec, guide: Cycle, t, eps,
             cfg: RunConfig | None = None) -> HolonomySample:
    """First-return parameter of the leaf of w_eps through the section point
    with f-parameter t.

    The section is the complex disk {w0 + s conj(grad f(w0))} at the first
    guide vertex, radius 10% of the guide diameter; the leaf is continued
    chart by chart around the guide inside a tube of radius tube_frac times
    the diameter.
    """
    cfg = cfg or RunConfig()
    base = dspec.base
    num = PencilNumeric.build(base.F, base.G, base.p, base.q)
    omega = _CompiledDeformation(dspec)
    t = complex(t)
    eps = complex(eps)

    xs, ys = guide.x, guide.y
    nv = len(xs)
    diam = guide.diameter()
    tube = cfg.tube_frac * diam
    radius = 0.1 * diam
    w0 = (complex(xs[0]), complex(ys[0]))

    f0, fx, fy = num.value_grad(w0[0], w0[1])
    gn = math.hypot(abs(fx), abs(fy))
    if gn == 0:
        raise ValueError("guide base vertex is a critical point")
    n = (fx.conjugate() / gn, fy.conjugate() / gn)
    mu = (-n[1].conjugate(), n[0].conjugate())

    # place the start point on the section: f(w0 + s n) = t
    s = (t - f0) / gn
    for _ in range(cfg.newton_maxit):
        z = (w0[0] + s * n[0], w0[1] + s * n[1])
        fv, gx, gy = num.value_grad(z[0], z[1])
        if abs(fv - t) <= cfg.newton_tol * max(1.0, abs(t)):
            break
        ds = gx * n[0] + gy * n[1]
        if ds == 0:
            raise NoReturn("section parameterization degenerate")
        s = s - (fv - t) / ds
    else:
        raise NoReturn("could not place the start point on the section")
    if abs(s) > radius:
        raise ValueError(
            f"t is outside the section (|s| = {abs(s):.3g} > radius {radius:.3g})")
    z = (w0[0] + s * n[0], w0[1] + s * n[1])

    tracker = _LeafTracker(omega, eps)
    tracker.push(z)
    steps = rejected = 0
    for k in range(nv):
        a = (complex(xs[k]), complex(ys[k]))
        b = (complex(xs[(k + 1) % nv]), complex(ys[(k + 1) % nv]))
        e, m = _chart_frame(a, b)
        tau0, zeta0 = _decompose(a, e, m, z)
        if abs(zeta0) > tube:
            raise TubeEscape(
                f"chart entry off the tube at vertex {k} (|zeta| = {abs(zeta0):.3g})")
        zeta1, st = _integrate_chart(omega, eps, a, e, m, tau0, 1.0, zeta0,
                                     tube, cfg, tracker)
        steps += st["steps"]
        rejected += st["rejected"]
        z = (a[0] + e[0] + zeta1 * m[0], a[1] + e[1] + zeta1 * m[1])

    # first return: solve <mu, z(tau) - w0> = 0 in the last chart,
    # advancing along the leaf (never by raw linear steps)
    a = (complex(xs[-1]), complex(ys[-1]))
    e, m = _chart_frame(a, w0)
    tau, zeta = _decompose(a, e, m, z)
    scale = max(1.0, diam)
    for _ in range(30):
        z = (a[0] + tau * e[0] + zeta * m[0], a[1] + tau * e[1] + zeta * m[1])
        phi = (mu[0].conjugate() * (z[0] - w0[0])
               + mu[1].conjugate() * (z[1] - w0[1]))
        if abs(phi) <= 1e-13 * scale:
            break
        A, B = omega(z[0], z[1], eps)
        wm = A * m[0] + B * m[1]
        if wm == 0:
            raise NoReturn("transverse degeneracy at the return solve")
        zp = -(A * e[0] + B * e[1]) / wm
        v = (e[0] + zp * m[0], e[1] + zp * m[1])
        dphi = mu[0].conjugate() * v[0] + mu[1].conjugate() * v[1]
        if dphi == 0:
            raise NoReturn("section parallel to the leaf at the return solve")
        dtau = -phi / dphi
        cap = 0.5
        if abs(dtau) > cap:
            dtau *= cap / abs(dtau)
        zeta, st = _integrate_chart(omega, eps, a, e, m, tau, tau + dtau,
                                    zeta, tube, cfg, tracker)
        steps += st["steps"]
        rejected += st["rejected"]
        tau = tau + dtau
    else:
        raise NoReturn("first-return Newton did not converge")

    h = num.value(z[0], z[1])
    return HolonomySample(t=t, eps=eps, h=complex(h), steps=steps,
                          rejected=rejected,
                          leaf_residual_max=tracker.max_residual)


# ---------------------------------------------------------------------------
# finite-difference Melnikov extraction
# ---------------------------------------------------------------------------


def melnikov_fd(samples, k: int, lower: dict | None = None,
                ratio: float | None = None):
    """Richardson estimate of the eps^k coefficient of h_eps(t) - t.

    `samples` is a geometric eps-grid of HolonomySample at one level; the
    lower-order coefficients (i < k) are taken from `lower` or assumed 0.
    Returns (value, error_estimate, tableau_diagnostics).
    """
    if len(samples) < k + 2:
        raise ValueError(f"need at least {k + 2} eps samples for order {k}")
    samples = sorted(samples, key=lambda s: -abs(s.eps))
    t = samples[0].t
    eps = [s.eps for s in samples]
    ratios = [abs(eps[i + 1] / eps[i]) for i in range(len(eps) - 1)]
    rho = ratio if ratio is not None else ratios[0]
    if any(abs(r - rho) > 1e-9 * rho for r in ratios):
        raise ValueError("eps grid is not geometric")
    lower = lower or {}

    r = []
    for s in samples:
        d = s.h - t
        for i, mi in lower.items():
            d -= mi * s.eps ** i
        r.append(d / s.eps ** k)

    tableau = [list(r)]
    best = complex(r[-1])
    best_err = abs(r[-1] - r[-2]) if len(r) > 1 else float("inf")
    deltas = [best_err]
    col = list(r)
    m = 1
    while len(col) > 1:
        fac = rho ** m
        col = [(col[j + 1] - fac * col[j]) / (1 - fac)
               for j in range(len(col) - 1)]
        tableau.append(list(col))
        delta = abs(col[-1] - tableau[-2][-1])
        deltas.append(delta)
        if delta < best_err:
            best_err = delta
            best = complex(col[-1])
        m += 1
    if best_err > 0.5 * abs(best) and abs(best) > 0:
        raise ExtrapolationFailure(
            f"noise floor reached before order {k}: estimate {best:.6g} "
            f"with error {best_err:.3g}")
    best_err = max(best_err, 4 * np.finfo(float).eps * abs(best))
    diag = {"column_deltas": deltas, "rho": rho,
            "raw": [complex(v) for v in r]}
    return best, best_err, diag


def melnikov_fd_scan(dspec: DeformationSpec, guide: Cycle, t, k: int,
                     cfg: RunConfig | None = None, eps0: float | None = None,
                     grid: int | None = None, lower: dict | None = None):
    """Holonomy eps-grid plus sequential order-1..k extraction at one level.

    eps0 shrinks automatically until the largest leaf stays in the tube;
    lower orders are estimated from the same grid unless supplied.
    Returns a dict with the samples and one (value, error) per order.
    """
    cfg = cfg or RunConfig()
    grid = grid or cfg.fd_grid
    rho = cfg.fd_ratio
    eps = eps0 if eps0 is not None else 0.05
    samples = None
    for _ in range(40):
        try:
            first = holonomy(dspec, guide, t, eps, cfg)
        except TubeEscape:
            eps *= 0.5
            continue
        samples = [first]
        break
    if samples is None:
        raise TubeEscape("no epsilon kept the leaf inside the tube")
    for i in range(1, grid):
        samples.append(holonomy(dspec, guide, t, eps * rho ** i, cfg))

    known = dict(lower or {})
    orders = {}
    for i in range(1, k + 1):
        if i in known:
            orders[i] = {"value": known[i], "error": 0.0, "supplied": True}
            continue
        v, err, _ = melnikov_fd(samples, i, lower=known, ratio=rho)
        orders[i] = {"value": v, "error": err, "supplied": False}
        known[i] = v
    return {"t": complex(t), "eps0": eps, "ratio": rho,
            "samples": samples, "orders": orders}
