import time

from melnikov_kit.algebra import BivarPoly, GaussianRational, OneForm, exterior_d, parse_poly
from melnikov_kit.foliation import PencilSpec
from melnikov_kit.relexact import (
    DecompositionBounds, DecompositionInfeasible, ExactnessContext, decompose,
    default_bounds, is_relatively_exact, tangent_form, tangent_membership,
)

t0 = time.time()
one = BivarPoly.const(GaussianRational(1))
xy = parse_poly("x*y")
spec = PencilSpec(F=xy, G=one, p=1, q=1)

# 1. constructed decomposition
g0 = parse_poly("x^2*y")
p0 = parse_poly("x")
w1 = exterior_d(g0) + p0 * exterior_d(xy)
dec = decompose(w1, spec)
print("case 1: g =", dec.g, "| p =", dec.p, "| check:", dec.check(w1), "| rounds:", dec.rounds)

# 2. exact form
w2 = exterior_d(xy)
dec2 = decompose(w2, spec)
print("case 2: g =", dec2.g, "| p =", dec2.p, "| check:", dec2.check(w2))

# 3. y dx: obstructed
w3 = OneForm(parse_poly("y"), BivarPoly.zero())
try:
    decompose(w3, spec, DecompositionBounds(4, 2, 0, 2))
    print("case 3: FAIL (solved)")
except DecompositionInfeasible as e:
    print(f"case 3: infeasible as expected | float residual {e.float_residual:.3g} "
          f"| cert rows {len(e.certificate.combination) if e.certificate else 0} "
          f"| attempts {len(e.attempts)}")

# 4. tangent membership on a genuine pencil
F = parse_poly("x^3 - 3*x + y^2 + 1/2")
G = parse_poly("x*y + x - 1/4")
# needs p*degF == q*degG: degF=3, degG=2 -> p=2,q=3
pen = PencilSpec(F=F, G=G, p=2, q=3)
w4 = pen.omega0() + pen.omega0()
res4 = tangent_membership(w4, pen)
print("case 4: in cone:", res4.in_tangent_cone,
      "| reproduces:", res4.witness.reproduces(w4, pen))

w5 = tangent_form(pen, BivarPoly.const(GaussianRational(1)), BivarPoly.zero())
res5 = tangent_membership(w5, pen)
print("case 5 (-q dG): in cone:", res5.in_tangent_cone,
      "| reproduces:", res5.witness.reproduces(w5, pen))

# full-degree random-ish form: generically not tangent
w6 = OneForm(parse_poly("x^4 + y^3 - 2*x*y"), parse_poly("y^4 - x^2 + 7"))
res6 = tangent_membership(w6, pen)
print("case 6: in cone:", res6.in_tangent_cone,
      "| pairing:", res6.pairing, "| cokernel size:", len(res6.cokernel))

# 5. semantic test on f = xy
levels = [0.7, 1.1 + 0.3j]
ctx = ExactnessContext(spec, levels)
ev_bad = is_relatively_exact(w3, spec, levels, context=ctx)
print("y dx exact?", ev_bad.verdict)
for r in ev_bad.integrals:
    import cmath
    tgt = 2j * cmath.pi * r["level"]
    print(f"  {r['kind']}[{r['index']}] t={r['level']:.3g} I={r['value']:.6g} "
          f"err={r['error']:.2e} |I - 2 pi i t|={abs(r['value'] - tgt):.2e}")
ev_good = is_relatively_exact(w1, spec, levels, context=ctx)
print("dg + p df exact?", ev_good.verdict, "| max |I| =", f"{ev_good.max_abs:.2e}")
print("warnings:", ev_good.warnings)
print(f"elapsed {time.time() - t0:.2f}s")
