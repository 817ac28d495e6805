"""Relative exactness and tangent-cone membership.

A 1-form is relatively exact for f = F^p/G^q when its restriction to every
regular leaf is exact there.  Two faces of that property live here.  The
semantic test integrates the form over traced vanishing cycles (one per
critical point, moved to each requested level) and over small cycles around
the indeterminacy points; it is the ground truth and always reports explicit
error bounds.  The algebraic constructions run exact linear algebra over
polynomial coefficients: `decompose` builds w = dg + p df inside degree and
pole bounds, `tangent_membership` builds (P, Q) with
w = pG dP - qP dG + pQ dF - qF dQ.  Both are certifying: a returned solution
reproduces the form exactly, and infeasibility carries a cokernel functional
(plus a float least-squares residual as a numerical diagnostic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .abelian import FiberChain, RationalForm
from .algebra import BivarPoly, GaussianRational, OneForm, exterior_d, format_poly
from .config import RunConfig
from .fibration import CriticalData, critical_data, seed_indeterminacy_cycle, trace_family
from .foliation import PencilSpec
from .linalg import InfeasibleCertificate, LinearSolution, solve_linear

__all__ = [
    "DecompositionBounds",
    "DecompositionInfeasible",
    "Decomposition",
    "RationalScalar",
    "TangentWitness",
    "TangentResult",
    "ExactnessContext",
    "ExactnessEvidence",
    "default_bounds",
    "decompose",
    "tangent_form",
    "tangent_membership",
    "is_relatively_exact",
]

_Z = GaussianRational(0)
_ONE = GaussianRational(1)


class DecompositionInfeasible(RuntimeError):
    """No (g, p) exists within the allowed ansatz; carries the evidence."""

    def __init__(self, message, certificate=None, float_residual=None, attempts=None):
        super().__init__(message)
        self.certificate = certificate
        self.float_residual = float_residual
        self.attempts = list(attempts or [])


@dataclass(frozen=True)
class DecompositionBounds:
    """Ansatz sizes for w = dg + p df.

    `g_degree` and `p_degree` bound numerator degrees; `den_total` is the
    largest alpha + beta tried for denominators F^alpha G^beta (pencil case
    only); a failed solve grows all three `max_increments` times before
    giving up.
    """

    g_degree: int
    p_degree: int
    den_total: int = 0
    max_increments: int = 2

    def __post_init__(self):
        lo = min(self.g_degree, self.p_degree, self.den_total, self.max_increments)
        if lo < 0:
            raise ValueError("bounds must be nonnegative")

    def at_round(self, r: int, quantum: int):
        return (self.g_degree + r * quantum,
                self.p_degree + r * quantum,
                self.den_total + r)


def default_bounds(spec: PencilSpec, order: int = 1, max_increments: int = 2) -> DecompositionBounds:
    """Pole-divisor ansatz for recursion step `order`.

    A pole divisor k-times the exceptional fiber translates to affine
    numerator degree k*m with m = deg F + deg G; g gets one order more
    than p.  The translation has slack, which the growth policy absorbs.
    """
    m = spec.F.degree + spec.G.degree
    den = 0 if spec.is_hamiltonian else order
    return DecompositionBounds(
        g_degree=(order + 1) * m,
        p_degree=order * m,
        den_total=den,
        max_increments=max_increments,
    )


@dataclass(frozen=True)
class RationalScalar:
    """num / den with exact polynomial entries; den == 1 means polynomial."""

    num: BivarPoly
    den: BivarPoly

    @property
    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def eval(self, x, y):
        dv = self.den.eval(0, 0) if self.den.degree == 0 else self.den.eval(x, y)
        return self.num.eval(x, y) / dv

    def __str__(self):
        if self.is_polynomial:
            c = self.den.coeff(0, 0)
            num = self.num if c == _ONE else self.num.scale(_ONE / c)
            return format_poly(num)
        return f"({format_poly(self.num)}) / ({format_poly(self.den)})"


# ---------------------------------------------------------------------------
# shared coefficient-matching machinery
# ---------------------------------------------------------------------------


def _monomials(deg: int):
    out = []
    for g in range(deg + 1):
        for i in range(g, -1, -1):
            out.append((i, g - i))
    return out


def _require_exact(form: OneForm, who: str):
    for poly in (form.A, form.B):
        for _, v in poly.terms():
            if not isinstance(v, GaussianRational):
                raise TypeError(f"{who} needs exact (Gaussian-rational) coefficients")


def _linear_system(columns, rhs: OneForm):
    """Rows indexed by (component, monomial) over the union of supports."""
    keys = []
    seen = set()
    for w in list(columns) + [rhs]:
        for comp, poly in (("dx", w.A), ("dy", w.B)):
            for k, _ in poly.terms():
                kk = (comp, k)
                if kk not in seen:
                    seen.add(kk)
                    keys.append(kk)
    keys.sort()

    def entry(w, kk):
        comp, (i, j) = kk
        poly = w.A if comp == "dx" else w.B
        return poly.coeff(i, j)

    rows = [[entry(w, kk) for w in columns] for kk in keys]
    b = [entry(rhs, kk) for kk in keys]
    return rows, b, keys


def _float_residual(rows, b) -> float:
    if not rows:
        return 0.0
    A = np.array([[complex(v) for v in r] for r in rows])
    rhs = np.array([complex(v) for v in b])
    if A.shape[1] == 0:
        return float(np.linalg.norm(rhs))
    x, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return float(np.linalg.norm(A @ x - rhs))


def _gather(solution, monos, offset):
    c = {}
    for k, m in enumerate(monos):
        v = solution[offset + k]
        if not v.is_zero():
            c[m] = v
    return BivarPoly(c)


# ---------------------------------------------------------------------------
# decompose: w = dg + p df
# ---------------------------------------------------------------------------


@dataclass
class Decomposition:
    """Certified solution of w = dg + p df.

    Hamiltonian case: g and p are polynomials and the identity holds on the
    nose.  Pencil case: g = A/(F^a G^b) and p is rational; the identity is
    checked after clearing denominators, in the form
    F^(a+1) G^(b+1) w = FG dA - A(aG dF + bF dG) + B w0.
    `den_in` records the denominator exponents of the input: the solved form
    is w = num/(F^dF G^dG) with `num` the OneForm handed to the solver.
    """

    spec: PencilSpec
    A: BivarPoly
    B: BivarPoly
    alpha: int
    beta: int
    bounds_used: tuple
    rounds: int
    den_in: tuple = (0, 0)

    @property
    def g(self) -> RationalScalar:
        if self.alpha == 0 and self.beta == 0:
            return RationalScalar(self.A, BivarPoly.const(_ONE))
        den = self.spec.F ** self.alpha * self.spec.G ** self.beta
        return RationalScalar(self.A, den)

    @property
    def p(self) -> RationalScalar:
        # p df = B w0 / (F^(a+1) G^(b+1)) and df = F^(p-1) G^(-q-1) w0
        num, aF, aG = self.p_parts()
        if aF == 0 and aG == 0:
            return RationalScalar(num, BivarPoly.const(_ONE))
        return RationalScalar(num, self.spec.F ** aF * self.spec.G ** aG)

    def residual(self, omega1: OneForm) -> OneForm:
        """Cleared-identity defect; the zero form for a valid decomposition.

        `omega1` is the numerator handed to the solver (the input form is
        omega1 / (F^dF G^dG) per den_in).
        """
        spec = self.spec
        aF, aG = self.den_in
        if spec.is_hamiltonian:
            rhs = exterior_d(self.A) + self.B * exterior_d(spec.F)
            return omega1 - rhs * (spec.F ** aF)
        F, G = spec.F, spec.G
        lhs = omega1 * (F ** (self.alpha + 1 - aF) * G ** (self.beta + 1 - aG))
        dA = exterior_d(self.A)
        dF, dG = exterior_d(F), exterior_d(G)
        rhs = dA * (F * G) \
            - (dF * G.scale(GaussianRational(self.alpha))
               + dG * F.scale(GaussianRational(self.beta))) * self.A \
            + self.B * spec.omega0()
        return lhs - rhs

    def g_parts(self):
        """(numerator, F-exponent, G-exponent) of g."""
        return self.A, self.alpha, self.beta

    def p_parts(self):
        """(numerator, F-exponent, G-exponent) of p."""
        if self.spec.is_hamiltonian:
            return self.B, 0, 0
        extra = self.spec.q - self.beta
        num = self.B * self.spec.G ** extra if extra > 0 else self.B
        return num, self.alpha + self.spec.p, max(-extra, 0)

    def check(self, omega1: OneForm) -> bool:
        return self.residual(omega1).is_zero()

    def to_dict(self) -> dict:
        return {
            "g": str(self.g),
            "p": str(self.p),
            "alpha": self.alpha,
            "beta": self.beta,
            "g_degree_bound": self.bounds_used[0],
            "p_degree_bound": self.bounds_used[1],
            "growth_rounds": self.rounds,
            "residual": "0",
        }


def _pin_gauge(spec: PencilSpec, A: BivarPoly, B: BivarPoly, g_bound: int):
    """Zero g's coefficients along {F^j}; p absorbs d(F^j) = j F^(j-1) dF.

    Determinism gauge for the Hamiltonian case: the decomposition is unique
    only up to g -> g + u(F), p -> p - u'(F).  Reduction may enlarge p's
    support beyond the search bound; the identity stays exact.
    """
    F = spec.F
    a = F.degree
    kF = F.leading_key()
    lcF = F.coeff(*kF)
    for j in range(g_bound // a, -1, -1):
        key = (j * kF[0], j * kF[1])
        c = A.coeff(*key)
        if c.is_zero():
            continue
        scale = c / lcF ** j
        A = A - (F ** j).scale(scale)
        if j > 0:
            B = B + (F ** (j - 1)).scale(scale * GaussianRational(j))
    return A, B


def _decompose_attempt(spec: PencilSpec, omega1: OneForm, gb: int, pb: int,
                       alpha: int, beta: int, den):
    aF, aG = den
    g_monos = _monomials(gb)
    p_monos = _monomials(pb)
    columns = []
    if spec.is_hamiltonian:
        dF = exterior_d(spec.F)
        clear = spec.F ** aF
        for (i, j) in g_monos:
            columns.append(exterior_d(BivarPoly.monomial(i, j)) * clear)
        for (i, j) in p_monos:
            columns.append(dF * (BivarPoly.monomial(i, j) * clear))
        rhs = omega1
    else:
        F, G = spec.F, spec.G
        FG = F * G
        dF, dG = exterior_d(F), exterior_d(G)
        hang = dF * G.scale(GaussianRational(alpha)) + dG * F.scale(GaussianRational(beta))
        w0 = spec.omega0()
        for (i, j) in g_monos:
            m = BivarPoly.monomial(i, j)
            columns.append(exterior_d(m) * FG - hang * m)
        for (i, j) in p_monos:
            columns.append(w0 * BivarPoly.monomial(i, j))
        rhs = omega1 * (F ** (alpha + 1 - aF) * G ** (beta + 1 - aG))
    rows, b, _ = _linear_system(columns, rhs)
    sol = solve_linear(rows, b)
    return sol, rows, b, g_monos, p_monos


def decompose(omega1: OneForm, spec: PencilSpec,
              bounds: DecompositionBounds | None = None,
              cfg: RunConfig | None = None,
              den: tuple = (0, 0)) -> Decomposition:
    """Exact solve of w = dg + p df over the bounded ansatz.

    `omega1` is the numerator of w = omega1 / (F^den[0] G^den[1]); the
    default den = (0, 0) is the plain polynomial case.  Bounds grow per the
    policy in `bounds` when a round is infeasible.  Raises
    DecompositionInfeasible with the last cokernel certificate and the
    float least-squares residual when every round fails.
    """
    cfg = cfg or RunConfig()
    bounds = bounds or default_bounds(spec)
    _require_exact(omega1, "decompose")
    aF, aG = den
    if min(aF, aG) < 0:
        raise ValueError("denominator exponents must be nonnegative")
    if spec.is_hamiltonian and aG != 0:
        raise ValueError("Hamiltonian input cannot carry G-denominators")
    cap = cfg.maxdeg
    quantum = spec.F.degree + spec.G.degree
    attempts = []
    last = None  # (certificate, rows, b)
    for r in range(bounds.max_increments + 1):
        gb, pb, smax = bounds.at_round(r, quantum)
        if gb > cap or pb > cap:
            break
        if spec.is_hamiltonian:
            dens = [(0, 0)]
        else:
            # the cleared identity needs alpha+1 >= aF and beta+1 >= aG
            dens = [(al, s - al) for s in range(smax + 1) for al in range(s + 1)
                    if al + 1 >= aF and s - al + 1 >= aG]
        for alpha, beta in dens:
            sol, rows, b, g_monos, p_monos = _decompose_attempt(
                spec, omega1, gb, pb, alpha, beta, den)
            attempts.append({"alpha": alpha, "beta": beta,
                             "g_degree": gb, "p_degree": pb})
            if isinstance(sol, InfeasibleCertificate):
                last = (sol, rows, b)
                continue
            A = _gather(sol.particular, g_monos, 0)
            B = _gather(sol.particular, p_monos, len(g_monos))
            if spec.is_hamiltonian:
                A, B = _pin_gauge(spec, A, B, gb)
            else:
                # constant gauge direction: dg ignores constants in A/(F^a G^b)
                # only when a = b = 0; otherwise pin the leading F^a G^b multiple
                pin = spec.F ** alpha * spec.G ** beta
                kk = pin.leading_key()
                c = A.coeff(*kk)
                if alpha == 0 and beta == 0:
                    A = A - BivarPoly.const(A.coeff(0, 0))
                elif not c.is_zero():
                    A = A - pin.scale(c / pin.coeff(*kk))
            out = Decomposition(spec=spec, A=A, B=B, alpha=alpha, beta=beta,
                                bounds_used=(gb, pb), rounds=r, den_in=(aF, aG))
            if not out.check(omega1):
                raise AssertionError("decomposition failed its exact re-check")
            return out
    cert = last[0] if last else None
    rho = _float_residual(last[1], last[2]) if last else float("nan")
    raise DecompositionInfeasible(
        f"no decomposition within bounds after {len(attempts)} attempts "
        f"(float least-squares residual {rho:.3g})",
        certificate=cert, float_residual=rho, attempts=attempts)


# ---------------------------------------------------------------------------
# tangent-cone membership
# ---------------------------------------------------------------------------


def tangent_form(spec: PencilSpec, P: BivarPoly, Q: BivarPoly) -> OneForm:
    """Derivative of w0 along the pencil perturbation (F, G) -> (F+eP, G+eQ)."""
    pQ = BivarPoly.const(GaussianRational(spec.p))
    qQ = BivarPoly.const(GaussianRational(spec.q))
    dF, dG = exterior_d(spec.F), exterior_d(spec.G)
    dP, dQ = exterior_d(P), exterior_d(Q)
    return (dP * (pQ * spec.G) - dG * (qQ * P)
            + dF * (pQ * Q) - dQ * (qQ * spec.F))


@dataclass(frozen=True)
class TangentWitness:
    """(P, Q) with w1 = pG dP - qP dG + pQ dF - qF dQ, exactly."""

    P: BivarPoly
    Q: BivarPoly

    def reproduces(self, omega1: OneForm, spec: PencilSpec) -> bool:
        return (tangent_form(spec, self.P, self.Q) - omega1).is_zero()


@dataclass
class TangentResult:
    witness: TangentWitness | None
    certificate: InfeasibleCertificate | None = None
    cokernel: list = field(default_factory=list)
    pairing: GaussianRational | None = None

    @property
    def in_tangent_cone(self) -> bool:
        return self.witness is not None

    def to_dict(self) -> dict:
        if self.witness is not None:
            return {
                "in_tangent_cone": True,
                "P": format_poly(self.witness.P),
                "Q": format_poly(self.witness.Q),
            }
        return {
            "in_tangent_cone": False,
            "cokernel": [
                {"component": comp, "monomial": [i, j], "coefficient": str(v)}
                for comp, (i, j), v in self.cokernel
            ],
            "pairing": str(self.pairing),
        }


def tangent_membership(omega1: OneForm, spec: PencilSpec) -> TangentResult:
    """Exact solve for a tangent witness (P, Q), deg P <= deg F, deg Q <= deg G.

    The witness is not unique (e.g. (F, -G) is in the kernel); the solver's
    deterministic particular solution is returned and only reproduction of
    omega1 is guaranteed.  On infeasibility the cokernel functional y
    (y . columns = 0, y . omega1 != 0) certifies non-membership.
    """
    _require_exact(omega1, "tangent_membership")
    p_monos = _monomials(spec.F.degree)
    q_monos = _monomials(spec.G.degree)
    pQ = BivarPoly.const(GaussianRational(spec.p))
    qQ = BivarPoly.const(GaussianRational(spec.q))
    dF, dG = exterior_d(spec.F), exterior_d(spec.G)
    columns = []
    for (i, j) in p_monos:
        m = BivarPoly.monomial(i, j)
        columns.append(exterior_d(m) * (pQ * spec.G) - dG * (qQ * m))
    for (i, j) in q_monos:
        m = BivarPoly.monomial(i, j)
        columns.append(dF * (pQ * m) - exterior_d(m) * (qQ * spec.F))
    rows, b, keys = _linear_system(columns, omega1)
    sol = solve_linear(rows, b)
    if isinstance(sol, InfeasibleCertificate):
        cok = [(comp, mono, v)
               for (comp, mono), v in zip(keys, sol.combination)
               if not v.is_zero()]
        return TangentResult(witness=None, certificate=sol,
                             cokernel=cok, pairing=sol.residual)
    P = _gather(sol.particular, p_monos, 0)
    Q = _gather(sol.particular, q_monos, len(p_monos))
    wit = TangentWitness(P, Q)
    if not wit.reproduces(omega1, spec):
        raise AssertionError("tangent witness failed its exact re-check")
    return TangentResult(witness=wit)


# ---------------------------------------------------------------------------
# semantic test: periods over traced cycles
# ---------------------------------------------------------------------------


def _newton_walk(num, t, a, b, cfg: RunConfig, steps: int = 16) -> bool:
    """Follow the fiber from a to b along reprojected chord steps."""
    cx, cy = complex(a[0]), complex(a[1])
    bx, by = complex(b[0]), complex(b[1])
    for s in range(steps):
        left = steps - s
        gx = cx + (bx - cx) / left
        gy = cy + (by - cy) / left
        steplen = math.hypot(abs(gx - cx), abs(gy - cy))
        px, py, ok = num.project_fiber(gx, gy, t, cfg.newton_tol, cfg.newton_maxit)
        if not bool(ok):
            return False
        move = math.hypot(abs(px - gx), abs(py - gy))
        if move > 0.75 * steplen + 1e-12:
            return False
        cx, cy = complex(px), complex(py)
    return True


def _component_warning(num, entries, level, cfg: RunConfig):
    """Newton-connectivity heuristic among cycles traced at one level.

    Disconnected fibers (which can hide non-exact directions) cannot be
    detected in general; failure to connect the traced samples only
    downgrades confidence, never the verdict.
    """
    cycles = [e["cycle"] for e in entries if e["level"] == level]
    n = len(cycles)
    if n < 2:
        return None
    reps = []
    for c in cycles:
        k = max(1, len(c.x) // 8)
        reps.append(list(zip(c.x[::k], c.y[::k])))
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if find(i) == find(j):
                continue
            pair = min(
                ((a, b) for a in reps[i] for b in reps[j]),
                key=lambda ab: abs(ab[0][0] - ab[1][0]) + abs(ab[0][1] - ab[1][1]),
            )
            if _newton_walk(num, level, pair[0], pair[1], cfg):
                parent[find(i)] = find(j)
    roots = {find(i) for i in range(n)}
    if len(roots) > 1:
        return (f"traced cycles at level {level:.6g} form {len(roots)} "
                "Newton-connected groups; fiber connectivity unconfirmed "
                "(a disconnected fiber can hide non-exact directions)")
    return None


class ExactnessContext:
    """Traced cycles and quadrature scaffolds, reusable across many forms."""

    def __init__(self, spec: PencilSpec, levels, cfg: RunConfig | None = None,
                 m: int | None = None, cdata: CriticalData | None = None):
        self.spec = spec
        self.cfg = cfg or RunConfig()
        self.levels = [complex(t) for t in levels]
        if not self.levels:
            raise ValueError("at least one level is required")
        self.cdata = cdata if cdata is not None else critical_data(spec, self.cfg)
        self.warnings = list(self.cdata.warnings)
        self.entries = []
        for k, cp in enumerate(self.cdata.points):
            if not cp.non_degenerate:
                self.warnings.append(
                    f"no vanishing cycle traced at degenerate critical point "
                    f"({cp.point[0]:.6g}, {cp.point[1]:.6g})")
                continue
            fam = trace_family(self.cdata, k, self.levels, m, self.cfg)
            for t, cyc in zip(self.levels, fam):
                self.entries.append(
                    {"kind": "vanishing", "index": k, "level": t, "cycle": cyc})
        for k in range(len(self.cdata.indeterminacy_points)):
            cyc = seed_indeterminacy_cycle(self.cdata, k, self.levels[0], m, self.cfg)
            self.entries.append(
                {"kind": "indeterminacy", "index": k, "level": self.levels[0],
                 "cycle": cyc})
        if not self.entries:
            self.warnings.append(
                "no cycles available (no tractable critical or indeterminacy "
                "points); exactness evidence is vacuous")
        else:
            w = _component_warning(self.cdata.num, self.entries,
                                   self.levels[0], self.cfg)
            if w:
                self.warnings.append(w)
        self._chains = {}

    def integrate_all(self, form, tol=None):
        """(entry, value, error) per traced cycle, over cached scaffolds."""
        if isinstance(form, OneForm):
            form = RationalForm(form, None)
        out = []
        for idx, e in enumerate(self.entries):
            chain = self._chains.get(idx)
            if chain is None:
                chain = FiberChain(self.cdata.num, e["cycle"], self.cfg)
                self._chains[idx] = chain
            v, err = chain.integrate(form, tol)
            out.append((e, v, err))
        return out


@dataclass
class ExactnessEvidence:
    verdict: bool
    integrals: list
    max_abs: float
    tol: float
    warnings: list
    assumptions: list

    def witnesses(self):
        """Entries whose integral fails to vanish."""
        return [row for row in self.integrals if not row["vanishes"]]

    def to_dict(self) -> dict:
        return {
            "relatively_exact": self.verdict,
            "tolerance": self.tol,
            "max_abs_integral": self.max_abs,
            "integrals": [
                {
                    "kind": r["kind"],
                    "index": r["index"],
                    "level": [r["level"].real, r["level"].imag],
                    "value": [r["value"].real, r["value"].imag],
                    "error": r["error"],
                    "vanishes": r["vanishes"],
                }
                for r in self.integrals
            ],
            "warnings": list(self.warnings),
            "assumptions": list(self.assumptions),
        }


def is_relatively_exact(omega1, spec: PencilSpec, levels, tol: float | None = None,
                        cfg: RunConfig | None = None,
                        context: ExactnessContext | None = None) -> ExactnessEvidence:
    """Integral test for relative exactness.

    Integrates omega1 (polynomial or rational) over one vanishing cycle per
    critical point at every level and one cycle around each indeterminacy
    point; the verdict is true iff every integral vanishes within tol.
    Pass a shared ExactnessContext to amortize tracing across many forms.
    """
    cfg = cfg or RunConfig()
    tol = tol if tol is not None else cfg.zero_tol
    ctx = context if context is not None else ExactnessContext(spec, levels, cfg)
    rows = []
    for e, v, err in ctx.integrate_all(omega1):
        rows.append({
            "kind": e["kind"],
            "index": e["index"],
            "level": e["level"],
            "value": v,
            "error": err,
            "vanishes": bool(abs(v) <= tol),
        })
    max_abs = max((abs(r["value"]) for r in rows), default=0.0)
    verdict = all(r["vanishes"] for r in rows)
    return ExactnessEvidence(
        verdict=verdict, integrals=rows, max_abs=max_abs, tol=tol,
        warnings=list(ctx.warnings), assumptions=list(ctx.cdata.assumptions))
