"""Numerical Picard-Lefschetz layer for a pencil first integral.

Critical data of f = F^p / G^q, Lefschetz vanishing cycles seeded from
the Morse normal form, residue cycles around indeterminacy points,
transport of cycles along paths in the value plane by
predictor-corrector continuation, and monodromy loops.

Cycles are polylines on a fiber, stored as parallel complex vertex
arrays and understood cyclically (the last vertex connects back to the
first).  Homology bookkeeping is deliberately absent: cycles are
compared through period vectors (see the quadrature module).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import BivarPoly
from .config import RunConfig
from .foliation import PencilSpec, _common_zeros
from .numeric import PencilNumeric, compile_poly, newton_polish_system

__all__ = [
    "CriticalPoint",
    "CriticalData",
    "Cycle",
    "TPath",
    "TransportError",
    "critical_data",
    "seed_vanishing_cycle",
    "seed_indeterminacy_cycle",
    "transport",
    "monodromy_loop",
    "trace_to_level",
    "trace_family",
    "plan_path",
]


class TransportError(RuntimeError):
    """Continuation failure: corrector divergence or margin violation."""


def _csqrt(z) -> complex:
    """Square root pinned to Re > 0 (or Re = 0, Im > 0).

    Immune to the sign of a zero imaginary part, which would otherwise
    flip cmath.sqrt across its branch cut and scramble seeded
    orientations.
    """
    s = cmath.sqrt(complex(z))
    if s.real < 0 or (s.real == 0 and s.imag < 0):
        s = -s
    return s


# ---------------------------------------------------------------------------
# critical data
# ---------------------------------------------------------------------------


@dataclass
class CriticalPoint:
    point: tuple
    value: complex
    hessian: np.ndarray          # Hessian of f at the point (2x2 complex)
    frame: np.ndarray | None     # columns C with f(p + C u) = c + u.u + O(|u|^3)
    non_degenerate: bool
    grad_residual: float


@dataclass
class CriticalData:
    spec: PencilSpec
    num: PencilNumeric
    points: list
    indeterminacy_points: list
    all_non_degenerate: bool
    values_distinct: bool
    warnings: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)

    @property
    def values(self):
        return [cp.value for cp in self.points]

    def forbidden_values(self):
        """Values transport paths must keep away from.

        Critical values, plus t = 0 for a genuine pencil (the F-fiber
        carries multiplicity p; cycles live over regular values only).
        """
        vals = list(self.values)
        if not self.spec.is_hamiltonian:
            vals.append(0j)
        out = []
        for v in vals:
            if all(abs(v - w) > 1e-12 * max(1.0, abs(v)) for w in out):
                out.append(complex(v))
        return out

    def min_gap(self) -> float:
        vals = self.forbidden_values()
        if len(vals) < 2:
            return max(1.0, max((abs(v) for v in vals), default=1.0))
        return min(
            abs(a - b) for i, a in enumerate(vals) for b in vals[i + 1 :]
        )

    def margin(self, cfg: RunConfig | None = None) -> float:
        cfg = cfg or RunConfig()
        return cfg.margin_frac * self.min_gap()

    def to_dict(self) -> dict:
        return {
            "critical_points": [
                {
                    "point": [cp.point[0].real, cp.point[0].imag,
                              cp.point[1].real, cp.point[1].imag],
                    "value": [cp.value.real, cp.value.imag],
                    "non_degenerate": cp.non_degenerate,
                    "grad_residual": cp.grad_residual,
                }
                for cp in self.points
            ],
            "indeterminacy_points": [
                [q[0].real, q[0].imag, q[1].real, q[1].imag]
                for q in self.indeterminacy_points
            ],
            "all_non_degenerate": self.all_non_degenerate,
            "values_distinct": self.values_distinct,
            "warnings": list(self.warnings),
            "assumptions": list(self.assumptions),
        }


def _hessian_frame(H: np.ndarray, tol: float):
    """Columns C with (Cu)^T H (Cu) = 2 u.u, via bilinear Gram-Schmidt.

    Deterministic candidate order and principal square roots pin the
    orientation of seeded cycles; None when H is (near) degenerate.
    For f = xy this yields C = [[1, i], [1, -i]], i.e. the seed
    (sqrt(t) e^{i theta}, sqrt(t) e^{-i theta}).
    """
    scale = max(abs(H[0, 0]), abs(H[0, 1]), abs(H[1, 0]), abs(H[1, 1]))
    if scale == 0 or abs(H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]) <= tol * scale**2:
        return None

    def B(u, v):
        return (u[0] * (H[0, 0] * v[0] + H[0, 1] * v[1])
                + u[1] * (H[1, 0] * v[0] + H[1, 1] * v[1]))

    cands = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 1.0j)]
    v1 = None
    for c in cands:
        if abs(B(c, c)) > 1e-4 * scale:
            s = _csqrt(2.0 / B(c, c))
            v1 = (s * c[0], s * c[1])
            break
    if v1 is None:
        return None
    for c in cands:
        if abs(c[0] * v1[1] - c[1] * v1[0]) > 1e-9:
            w = c
            break
    lam = B(v1, w) / 2.0
    v2 = (w[0] - lam * v1[0], w[1] - lam * v1[1])
    b22 = B(v2, v2)
    if abs(b22) <= 1e-10 * scale * max(abs(v2[0]), abs(v2[1]), 1e-300) ** 2:
        return None
    s = _csqrt(2.0 / b22)
    v2 = (s * v2[0], s * v2[1])
    return np.array([[v1[0], v2[0]], [v1[1], v2[1]]], dtype=complex)


def _curve_smooth_warning(F: BivarPoly, name: str, cfg: RunConfig):
    """Warning string when the curve {F = 0} has a singular point."""
    Fx, Fy = F.diff("x"), F.diff("y")
    if Fx.is_zero() and Fy.is_zero():
        return f"curve {{{name} = 0}} degenerate (constant polynomial)"
    if Fx.is_zero() or Fy.is_zero() or Fx.degree == 0 or Fy.degree == 0:
        return None  # gradient cannot vanish
    try:
        zeros, _ = _common_zeros(Fx, Fy, cfg, 1e9)
    except ValueError:
        return f"curve {{{name} = 0}} smoothness undecided (gradient has non-isolated zeros)"
    cF = compile_poly(F)
    scale = max((abs(v.to_complex()) for _, v in F.terms()), default=1.0)
    for x, y, _, _ in zeros:
        if abs(cF(x, y)) < 1e-7 * scale * max(1.0, abs(x), abs(y)) ** max(F.degree, 1):
            return f"curve {{{name} = 0}} is singular near ({x:.6g}, {y:.6g})"
    return None


def critical_data(spec: PencilSpec, cfg: RunConfig | None = None, box: float = 1e8) -> CriticalData:
    """Critical points/values of f = F^p/G^q with genericity flags.

    Solves p G Fx - q F Gx = 0, p G Fy - q F Gy = 0 by resultant
    elimination and Newton polishing; indeterminacy points (F = G = 0)
    are listed separately and excluded from the critical set.
    """
    cfg = cfg or RunConfig()
    num = PencilNumeric.build(spec.F, spec.G, spec.p, spec.q)
    w = spec.omega0()
    try:
        zeros, _ = _common_zeros(w.A, w.B, cfg, box)
    except ValueError as e:
        raise ValueError(f"non-isolated critical locus: {e}") from e

    cF, cG = num.F, num.G
    sF = max((abs(v.to_complex()) for _, v in spec.F.terms()), default=1.0)
    sG = max((abs(v.to_complex()) for _, v in spec.G.terms()), default=1.0)

    # second derivatives of the gradient numerator, for Hessians
    Nx = BivarPoly.const(spec.p) * spec.G * spec.F.diff("x") \
        - BivarPoly.const(spec.q) * spec.F * spec.G.diff("x")
    Ny = BivarPoly.const(spec.p) * spec.G * spec.F.diff("y") \
        - BivarPoly.const(spec.q) * spec.F * spec.G.diff("y")
    cJ = [[compile_poly(Nx.diff("x")), compile_poly(Nx.diff("y"))],
          [compile_poly(Ny.diff("x")), compile_poly(Ny.diff("y"))]]

    warnings = list(spec.warnings)
    pts, indet = [], []
    for x, y, res, step in zeros:
        loc = max(1.0, abs(x), abs(y))
        on_F = (not spec.is_hamiltonian) and \
            abs(cF(x, y)) < 1e-8 * sF * loc ** max(spec.F.degree, 1)
        on_G = (not spec.is_hamiltonian) and \
            abs(cG(x, y)) < 1e-8 * sG * loc ** max(spec.G.degree, 1)
        if on_F and on_G:
            indet.append((complex(x), complex(y)))
            continue
        if on_F or on_G:
            warnings.append(
                f"critical point ({x:.6g}, {y:.6g}) lies on an invariant curve; skipped"
            )
            continue
        Fv, Gv = cF(x, y), cG(x, y)
        value = Fv ** spec.p / Gv ** spec.q
        pref = Fv ** (spec.p - 1) / Gv ** (spec.q + 1)
        H = pref * np.array(
            [[cJ[0][0](x, y), cJ[0][1](x, y)], [cJ[1][0](x, y), cJ[1][1](x, y)]],
            dtype=complex,
        )
        H = (H + H.T) / 2.0
        frame = _hessian_frame(H, 1e-10)
        _, gx, gy = num.value_grad(x, y)
        pts.append(CriticalPoint(
            point=(complex(x), complex(y)),
            value=complex(value),
            hessian=H,
            frame=frame,
            non_degenerate=frame is not None,
            grad_residual=float(abs(gx) + abs(gy)),
        ))

    pts.sort(key=lambda c: (round(c.value.real, 9), round(c.value.imag, 9),
                            round(c.point[0].real, 9), round(c.point[0].imag, 9)))

    values = [c.value for c in pts]
    vscale = max(1.0, max((abs(v) for v in values), default=1.0))
    distinct = all(
        abs(values[i] - values[j]) > 1e-8 * vscale
        for i in range(len(values)) for j in range(i + 1, len(values))
    )
    all_nd = all(c.non_degenerate for c in pts)
    if not all_nd:
        warnings.append("degenerate critical point present (non-Morse)")
    if not distinct:
        warnings.append("critical values are not pairwise distinct")

    if not spec.is_hamiltonian:
        wF = _curve_smooth_warning(spec.F, "F", cfg)
        wG = _curve_smooth_warning(spec.G, "G", cfg)
        for ww in (wF, wG):
            if ww:
                warnings.append(ww)
        cFx, cFy = compile_poly(spec.F.diff("x")), compile_poly(spec.F.diff("y"))
        cGx, cGy = compile_poly(spec.G.diff("x")), compile_poly(spec.G.diff("y"))
        for (x, y) in indet:
            det = cFx(x, y) * cGy(x, y) - cFy(x, y) * cGx(x, y)
            if abs(det) < 1e-8 * max(sF, sG) ** 2:
                warnings.append(
                    f"{{F=0}} and {{G=0}} meet non-transversally near ({x:.6g}, {y:.6g})"
                )
    assumptions = ["H1 of the complement of the exceptional fiber is assumed trivial (not verified)"]
    if spec.F.degree + spec.G.degree <= 4:
        warnings.append(
            "deg F + deg G <= 4: the simplicity hypothesis for vanishing cycles fails; "
            "traced cycles may not generate the homology probed by exactness tests"
        )
    else:
        assumptions.append(
            "deg F + deg G > 4: vanishing cycles treated as simple (hypothesis holds, conclusion not re-verified)"
        )
    return CriticalData(
        spec=spec, num=num, points=pts, indeterminacy_points=indet,
        all_non_degenerate=all_nd, values_distinct=distinct,
        warnings=warnings, assumptions=assumptions,
    )


# ---------------------------------------------------------------------------
# cycles
# ---------------------------------------------------------------------------


@dataclass
class Cycle:
    level: complex
    x: np.ndarray
    y: np.ndarray
    orientation: str = "ccw-seed"
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.x)

    def diameter(self) -> float:
        spans = [
            float(np.ptp(self.x.real)), float(np.ptp(self.x.imag)),
            float(np.ptp(self.y.real)), float(np.ptp(self.y.imag)),
        ]
        return math.sqrt(sum(s * s for s in spans))

    def max_fiber_residual(self, num: PencilNumeric) -> float:
        return float(np.max(np.abs(num.value(self.x, self.y) - self.level)))

    def copy(self) -> "Cycle":
        return Cycle(self.level, self.x.copy(), self.y.copy(),
                     self.orientation, dict(self.provenance))

    def to_dict(self) -> dict:
        verts = [
            [float(a.real), float(a.imag), float(b.real), float(b.imag)]
            for a, b in zip(self.x, self.y)
        ]
        return {
            "level": [float(self.level.real), float(self.level.imag)],
            "vertices": verts,
            "orientation": self.orientation,
            "provenance": self.provenance,
        }

    @staticmethod
    def from_dict(d: dict) -> "Cycle":
        verts = d["vertices"]
        if len(verts) >= 2 and verts[0] == verts[-1]:
            verts = verts[:-1]
        x = np.array([complex(v[0], v[1]) for v in verts], dtype=complex)
        y = np.array([complex(v[2], v[3]) for v in verts], dtype=complex)
        lv = d["level"]
        return Cycle(
            level=complex(lv[0], lv[1]), x=x, y=y,
            orientation=d.get("orientation", "ccw-seed"),
            provenance=d.get("provenance", {}),
        )


def _refine(num: PencilNumeric, cyc: Cycle, cfg: RunConfig):
    """Insert chordal midpoints until spacing and turning stay in bounds."""
    turn_thr = math.radians(cfg.max_turn_deg)
    for _ in range(16):
        n = len(cyc.x)
        if n >= cfg.max_vertices:
            raise TransportError(f"cycle refinement exceeded {cfg.max_vertices} vertices")
        dx = np.roll(cyc.x, -1) - cyc.x
        dy = np.roll(cyc.y, -1) - cyc.y
        seg = np.sqrt(np.abs(dx) ** 2 + np.abs(dy) ** 2)
        diam = cyc.diameter()
        if diam == 0:
            return
        mark = seg > cfg.max_spacing_frac * diam

        # turning angle at vertex k (between edges k-1 and k), in real 4-space
        e = np.stack([dx.real, dx.imag, dy.real, dy.imag], axis=0)
        ep = np.roll(e, 1, axis=1)
        dot = np.sum(e * ep, axis=0)
        nn = seg * np.roll(seg, 1)
        cosang = np.clip(np.where(nn > 0, dot / np.where(nn > 0, nn, 1.0), 1.0), -1.0, 1.0)
        sharp = np.arccos(cosang) > turn_thr
        # a sharp corner at k refines both adjacent edges, but never below a
        # spacing floor: a transported cycle may carry a genuine hairpin
        # (pinched corridor), which subdivision cannot smooth away
        floor = 1e-6 * diam
        mark = (mark | sharp | np.roll(sharp, -1)) & (seg > floor)

        if not mark.any():
            return
        if n + int(mark.sum()) > cfg.max_vertices:
            raise TransportError(f"cycle refinement exceeded {cfg.max_vertices} vertices")
        mx = (cyc.x + np.roll(cyc.x, -1)) / 2.0
        my = (cyc.y + np.roll(cyc.y, -1)) / 2.0
        px, py, ok = num.project_fiber(
            mx[mark], my[mark], cyc.level, tol=cfg.tol_fiber, maxit=cfg.newton_maxit
        )
        if not np.all(ok):
            raise TransportError("refinement projection failed on the fiber")
        newx, newy = [], []
        j = 0
        for k in range(n):
            newx.append(cyc.x[k]); newy.append(cyc.y[k])
            if mark[k]:
                newx.append(px[j]); newy.append(py[j]); j += 1
        cyc.x = np.array(newx, dtype=complex)
        cyc.y = np.array(newy, dtype=complex)
    raise TransportError("cycle refinement did not stabilize")


def seed_vanishing_cycle(
    cdata: CriticalData,
    index: int,
    level: complex,
    m: int | None = None,
    cfg: RunConfig | None = None,
) -> Cycle:
    """Lefschetz vanishing cycle near critical point number `index`.

    Vertices come from the Morse model f(p + C u) = c + u.u at
    u = sqrt(level - c) (cos theta, sin theta), theta counterclockwise,
    then are Newton-projected onto {f = level}.
    """
    cfg = cfg or RunConfig()
    m = m or cfg.seed_vertices
    cp = cdata.points[index]
    if not cp.non_degenerate or cp.frame is None:
        raise ValueError("degenerate critical point cannot seed a vanishing cycle")
    c = cp.value
    s = _csqrt(complex(level) - c)
    theta = 2.0 * math.pi * np.arange(m) / m
    u1 = s * np.cos(theta)
    u2 = s * np.sin(theta)
    C = cp.frame
    x0 = cp.point[0] + C[0, 0] * u1 + C[0, 1] * u2
    y0 = cp.point[1] + C[1, 0] * u1 + C[1, 1] * u2
    x, y, ok = cdata.num.project_fiber(x0, y0, level, tol=cfg.tol_fiber,
                                       maxit=cfg.newton_maxit)
    if not np.all(ok):
        raise TransportError(
            f"seed projection failed at level {level}: too far from the critical value {c}"
        )
    cyc = Cycle(
        level=complex(level), x=x, y=y, orientation="ccw-seed",
        provenance={
            "seed": "vanishing",
            "critical_index": index,
            "critical_point": [cp.point[0].real, cp.point[0].imag,
                               cp.point[1].real, cp.point[1].imag],
            "critical_value": [c.real, c.imag],
            "vertices": int(m),
        },
    )
    model = math.sqrt(2.0) * abs(s) * max(1e-300, float(np.linalg.norm(C, 2)))
    moved = float(np.max(np.sqrt(np.abs(x - x0) ** 2 + np.abs(y - y0) ** 2)))
    if moved > 0.5 * model:
        raise TransportError(
            f"seed projection moved vertices by {moved:.3g} (model radius {model:.3g}); "
            "level too far from the critical value"
        )
    _refine(cdata.num, cyc, cfg)
    return cyc


def seed_indeterminacy_cycle(
    cdata: CriticalData,
    which: int,
    level: complex,
    m: int | None = None,
    cfg: RunConfig | None = None,
    eps: float | None = None,
) -> Cycle:
    """Residue cycle around indeterminacy point number `which` on {f = level}.

    Uses (F, G) as local coordinates (u, v): the local fiber of
    u^p / v^q = t is parametrized by u = t^{1/p} eps^q e^{i q theta},
    v = eps^p e^{i p theta}; vertices are pulled back by Newton on the
    map (F, G).
    """
    cfg = cfg or RunConfig()
    m = m or cfg.seed_vertices
    spec = cdata.spec
    if spec.is_hamiltonian:
        raise ValueError("Hamiltonian integrals have no indeterminacy points")
    q_pt = cdata.indeterminacy_points[which]
    t = complex(level)
    if t == 0:
        raise ValueError("residue cycles need a regular level t != 0")

    cFx = compile_poly(spec.F.diff("x")); cFy = compile_poly(spec.F.diff("y"))
    cGx = compile_poly(spec.G.diff("x")); cGy = compile_poly(spec.G.diff("y"))
    x0, y0 = q_pt
    J = np.array([[cFx(x0, y0), cFy(x0, y0)], [cGx(x0, y0), cGy(x0, y0)]], dtype=complex)
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    sJ = max(abs(J[0, 0]), abs(J[0, 1]), abs(J[1, 0]), abs(J[1, 1]), 1e-300)
    if abs(det) < 1e-8 * sJ * sJ:
        raise ValueError(
            f"indeterminacy point ({x0:.6g}, {y0:.6g}) is a non-transversal intersection"
        )

    if eps is None:
        # keep the local loop small against both the chart and |t|^(1/p)
        eps = 0.05 * min(1.0, 1.0 / max(abs(t) ** (1.0 / spec.p), 1e-6))
    tp = t ** (1.0 / spec.p)
    theta = 2.0 * math.pi * np.arange(m) / m
    u = tp * eps ** spec.q * np.exp(1j * spec.q * theta)
    v = eps ** spec.p * np.exp(1j * spec.p * theta)

    Jinv = np.linalg.inv(J)
    xs = np.empty(m, dtype=complex)
    ys = np.empty(m, dtype=complex)
    cF, cG = cdata.num.F, cdata.num.G
    fns_cache = {}
    for k in range(m):
        uk, vk = u[k], v[k]
        # first guess from the linearized chart, then full Newton on (F, G)
        gx = x0 + Jinv[0, 0] * uk + Jinv[0, 1] * vk
        gy = y0 + Jinv[1, 0] * uk + Jinv[1, 1] * vk
        key = (uk, vk)
        if key not in fns_cache:
            fns_cache[key] = (
                (lambda xx, yy, uu=uk: cF(xx, yy) - uu),
                (lambda xx, yy, vv=vk: cG(xx, yy) - vv),
            )
        fa, fb = fns_cache[key]
        xk, yk, res, ok = newton_polish_system(
            (fa, fb), ((cFx, cFy), (cGx, cGy)), (gx, gy), tol=1e-13 * max(1.0, abs(t))
        )
        if not ok:
            raise TransportError(
                f"residue seed failed near ({x0:.6g}, {y0:.6g}); try a smaller eps"
            )
        xs[k] = xk; ys[k] = yk
    cyc = Cycle(
        level=t, x=xs, y=ys, orientation="ccw-seed",
        provenance={
            "seed": "indeterminacy",
            "indeterminacy_index": which,
            "point": [x0.real, x0.imag, y0.real, y0.imag],
            "eps": float(eps),
            "vertices": int(m),
        },
    )
    _refine(cdata.num, cyc, cfg)
    return cyc


# ---------------------------------------------------------------------------
# paths and transport
# ---------------------------------------------------------------------------


@dataclass
class TPath:
    """Piecewise-linear path in the value plane."""

    waypoints: list

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise ValueError("a path needs at least two waypoints")
        self.waypoints = [complex(w) for w in self.waypoints]

    @property
    def start(self) -> complex:
        return self.waypoints[0]

    @property
    def end(self) -> complex:
        return self.waypoints[-1]

    @property
    def is_loop(self) -> bool:
        return abs(self.start - self.end) < 1e-14 * max(1.0, abs(self.start))

    @staticmethod
    def segment(a, b) -> "TPath":
        return TPath([a, b])

    @staticmethod
    def circle(center, radius: float, base_angle: float = 0.0,
               turns: float = 1.0, n: int = 96) -> "TPath":
        """Closed (or partial) counterclockwise circle as a fine polyline."""
        k = max(8, int(math.ceil(abs(turns) * n)))
        ang = base_angle + 2.0 * math.pi * turns * np.arange(k + 1) / k
        return TPath([complex(center) + radius * cmath.exp(1j * a) for a in ang])

    @staticmethod
    def loop_around(value, base, radius: float | None = None,
                    gap: float | None = None, n: int = 96) -> "TPath":
        """Radial approach from base, full ccw circle around value, return."""
        value = complex(value); base = complex(base)
        d = abs(base - value)
        if d == 0:
            raise ValueError("loop base must differ from the encircled value")
        if radius is None:
            radius = 0.4 * gap if gap else 0.5 * d
            radius = min(radius, 0.9 * d)
        ang = cmath.phase(base - value)
        inner = value + radius * cmath.exp(1j * ang)
        circ = TPath.circle(value, radius, base_angle=ang, n=n)
        pts = [base, inner] + circ.waypoints[1:] + [base]
        return TPath(pts)

    def min_distance(self, value) -> float:
        """Distance from the polyline to a point of the value plane."""
        v = complex(value)
        best = float("inf")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            ab = b - a
            L2 = abs(ab) ** 2
            if L2 == 0:
                best = min(best, abs(v - a))
                continue
            s = ((v - a).real * ab.real + (v - a).imag * ab.imag) / L2
            s = min(1.0, max(0.0, s))
            best = min(best, abs(v - (a + s * ab)))
        return best

    def check_margin(self, forbidden, margin: float, exempt=()):
        for c in forbidden:
            if any(abs(c - e) <= 1e-12 * max(1.0, abs(c)) for e in exempt):
                continue
            d = self.min_distance(c)
            if d < margin:
                raise TransportError(
                    f"path passes within {d:.3g} of the forbidden value {c} "
                    f"(margin {margin:.3g})"
                )


def plan_path(a, b, forbidden, margin: float, exempt=()) -> TPath:
    """Polyline from a to b keeping distance >= margin from forbidden values.

    Straight segments are bent around offending values by inserting a
    detour vertex on the side of shorter deviation.
    """
    a = complex(a); b = complex(b)
    live = [
        c for c in forbidden
        if not any(abs(c - e) <= 1e-12 * max(1.0, abs(c)) for e in exempt)
    ]

    def offender(p, q):
        worst, worst_d = None, margin
        ab = q - p
        L2 = abs(ab) ** 2
        for c in live:
            if L2 == 0:
                d = abs(c - p)
            else:
                s = ((c - p).real * ab.real + (c - p).imag * ab.imag) / L2
                s = min(1.0, max(0.0, s))
                d = abs(c - (p + s * ab))
            if d < worst_d:
                worst, worst_d = c, d
        return worst

    pts = [a, b]
    for _ in range(32):
        new_pts = [pts[0]]
        changed = False
        for p, q in zip(pts, pts[1:]):
            c = offender(p, q)
            if c is None:
                new_pts.append(q)
                continue
            ab = q - p
            if abs(ab) == 0:
                new_pts.append(q)
                continue
            nrm = 1j * ab / abs(ab)
            side = (c - p).real * nrm.real + (c - p).imag * nrm.imag
            push = -nrm if side > 0 else nrm
            detour = c + push * (2.5 * margin)
            new_pts.extend([detour, q])
            changed = True
        pts = new_pts
        if not changed:
            path = TPath(pts)
            path.check_margin(forbidden, margin, exempt)
            return path
    raise TransportError("path planning failed to clear the forbidden values")


def _hop(num: PencilNumeric, x, y, t_to, cfg: RunConfig):
    f, fx, fy = num.value_grad(x, y)
    n2 = np.abs(fx) ** 2 + np.abs(fy) ** 2
    if np.any(n2 == 0):
        return x, y, False
    dt = t_to - f
    x1 = x + dt * np.conj(fx) / n2
    y1 = y + dt * np.conj(fy) / n2
    x2, y2, ok = num.project_fiber(x1, y1, t_to, tol=cfg.tol_fiber, maxit=cfg.newton_maxit)
    if not np.all(ok):
        return x, y, False
    # a corrector jump comparable to the predictor displacement signals
    # a fold or a vertex hopping between fiber branches
    size = max(
        float(np.ptp(x.real)), float(np.ptp(x.imag)),
        float(np.ptp(y.real)), float(np.ptp(y.imag)), 1e-12,
    )
    pred = np.sqrt(np.abs(x1 - x) ** 2 + np.abs(y1 - y) ** 2)
    corr = np.sqrt(np.abs(x2 - x1) ** 2 + np.abs(y2 - y1) ** 2)
    if np.any(corr > 0.5 * pred + 1e-7 * size):
        return x, y, False
    return x2, y2, True


def transport(
    cdata: CriticalData,
    cycle: Cycle,
    path: TPath,
    cfg: RunConfig | None = None,
    exempt=(),
    margin: float | None = None,
) -> Cycle:
    """Continue a cycle along a path of regular values.

    Per sub-step: predictor moves every vertex by the minimum-norm
    solution of df . v = dt, the corrector Newton-projects back onto the
    moving fiber, and the step is halved on failure.  Vertex insertion
    keeps spacing and turning below the configured thresholds.
    """
    cfg = cfg or RunConfig()
    if abs(complex(cycle.level) - path.start) > 1e-9 * max(1.0, abs(path.start)):
        raise ValueError(
            f"path starts at {path.start} but the cycle lives at level {cycle.level}"
        )
    forbidden = cdata.forbidden_values()
    if margin is None:
        margin = cdata.margin(cfg)
    path.check_margin(forbidden, margin, exempt)

    out = cycle.copy()
    t = complex(cycle.level)
    for target in path.waypoints[1:]:
        target = complex(target)
        while t != target:
            dist = min((abs(t - c) for c in forbidden), default=float("inf"))
            dtmax = cfg.step_frac * dist
            rem = target - t
            t_to = target if abs(rem) <= dtmax else t + dtmax * rem / abs(rem)
            ok = False
            for _ in range(cfg.max_step_halvings + 1):
                x2, y2, ok = _hop(cdata.num, out.x, out.y, t_to, cfg)
                if ok:
                    break
                t_to = t + (t_to - t) / 2.0
                if t_to == t:
                    break
            if not ok:
                raise TransportError(f"corrector divergence near t = {t_to}")
            t = t_to
            out.x, out.y = x2, y2
            out.level = t
            _refine(cdata.num, out, cfg)
    prov = dict(out.provenance)
    hist = list(prov.get("transport", []))
    hist.append([[w.real, w.imag] for w in path.waypoints])
    prov["transport"] = hist
    out.provenance = prov
    return out


def monodromy_loop(cdata: CriticalData, cycle: Cycle, loop: TPath,
                   cfg: RunConfig | None = None, exempt=()) -> Cycle:
    """Transport around a closed path based at the cycle's level."""
    if not loop.is_loop:
        raise ValueError("monodromy needs a closed path")
    return transport(cdata, cycle, loop, cfg, exempt=exempt)


def trace_to_level(
    cdata: CriticalData,
    index: int,
    level: complex,
    m: int | None = None,
    cfg: RunConfig | None = None,
) -> Cycle:
    """Seed near critical value number `index` and transport to `level`."""
    cfg = cfg or RunConfig()
    cp = cdata.points[index]
    c = cp.value
    target = complex(level)
    if abs(target - c) == 0:
        raise ValueError("target level equals the critical value")
    gap = cdata.min_gap()
    r0 = min(0.05 * gap, 0.5 * abs(target - c))
    if cp.frame is not None:
        # the Morse model places vertices at p + C u with |u| = sqrt(r0);
        # a flat frame (|C| large) would make this "local" seed macroscopic,
        # so cap its physical radius by the distance to other special points
        others = [q.point for i, q in enumerate(cdata.points) if i != index]
        others += list(cdata.indeterminacy_points)
        if others:
            D = min(
                math.sqrt(abs(q[0] - cp.point[0]) ** 2 + abs(q[1] - cp.point[1]) ** 2)
                for q in others
            )
            nC = max(float(np.linalg.norm(cp.frame, 2)), 1e-300)
            r0 = min(r0, (0.1 * D / (math.sqrt(2.0) * nC)) ** 2)
    t0 = c + r0 * (target - c) / abs(target - c)
    cyc = seed_vanishing_cycle(cdata, index, t0, m, cfg)
    if abs(target - t0) == 0:
        return cyc
    margin = cdata.margin(cfg)
    path = plan_path(t0, target, cdata.forbidden_values(), margin, exempt=(c,))
    return transport(cdata, cyc, path, cfg, exempt=(c,), margin=margin)


def trace_family(
    cdata: CriticalData,
    index: int,
    levels,
    m: int | None = None,
    cfg: RunConfig | None = None,
):
    """Cycles at several levels, continued incrementally along the list."""
    cfg = cfg or RunConfig()
    levels = [complex(t) for t in levels]
    if not levels:
        return []
    out = []
    cyc = trace_to_level(cdata, index, levels[0], m, cfg)
    out.append(cyc)
    c = cdata.points[index].value
    margin = cdata.margin(cfg)
    for t_prev, t_next in zip(levels, levels[1:]):
        path = plan_path(t_prev, t_next, cdata.forbidden_values(), margin, exempt=(c,))
        cyc = transport(cdata, cyc, path, cfg, exempt=(c,), margin=margin)
        out.append(cyc)
    return out
