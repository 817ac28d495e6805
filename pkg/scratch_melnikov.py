import math
import time

from melnikov_kit.abelian import integrate
from melnikov_kit.algebra import BivarPoly, GaussianRational, OneForm, exterior_d, parse_poly
from melnikov_kit.fibration import critical_data, trace_family
from melnikov_kit.foliation import PencilSpec
from melnikov_kit.melnikov import DeformationSpec, count_zeros, first_melnikov, higher_melnikov
from melnikov_kit.relexact import tangent_form

t0 = time.time()
one = BivarPoly.const(GaussianRational(1))

# --- van der Pol: f = (x^2+y^2)/2, w1 = (x^2-1) y dx ---
F = parse_poly("1/2*x^2 + 1/2*y^2")
spec = PencilSpec(F=F, G=one, p=1, q=1)
w1 = OneForm(parse_poly("x^2*y - y"), BivarPoly.zero())
dspec = DeformationSpec(base=spec, forms=[w1])
print("normalization:", dspec.resolved_normalization, "| s =", dspec.s_label())

levels = [0.1 + 0.1 * k for k in range(24)]
res = first_melnikov(dspec, levels)
worst = 0.0
for s in res.samples:
    t = s["level"].real
    closed = -math.pi * (2 * t) * (1 - t / 2)
    err = abs(s["value"] - closed) / max(abs(closed), 1e-12)
    worst = max(worst, err if abs(closed) > 1e-12 else abs(s["value"] - closed))
print(f"vdP M1 vs closed form: worst rel err = {worst:.3e}  ({len(levels)} levels, {time.time()-t0:.1f}s)")

zr = count_zeros(res, (0.1, 2.4), multiplicity_at=2.0)
print("zeros:", [(f"{r['t']:.6g}", r["kind"]) for r in zr.roots],
      "| multiplicity at 2:", zr.multiplicity["multiplicity"],
      "| cond:", f"{zr.multiplicity['condition']:.2e}")

# --- higher order: w1 = dg, M2 should equal -int w2 ---
t1 = time.time()
g = parse_poly("x^2*y - 1/3*y^3 + x*y")
w1e = exterior_d(g)
w2 = OneForm(parse_poly("x*y^2"), parse_poly("x^2 - y"))
d2 = DeformationSpec(base=spec, forms=[w1e, w2])
lv2 = [0.4, 0.9, 1.6]
r2 = higher_melnikov(d2, lv2, 2)
print("order:", r2.order, "| aborted:", r2.aborted,
      "| chain p1 =", r2.chain[0].p_num, "| g1 =", r2.chain[0].g_num)
cdata = critical_data(spec)
fam = trace_family(cdata, 0, lv2)
worst2 = 0.0
for s, cyc in zip(r2.samples, fam):
    direct, _ = integrate(w2, cyc, cdata.num)
    worst2 = max(worst2, abs(s["value"] - (-direct)))
print(f"M2 vs -int w2: worst abs diff = {worst2:.3e}  ({time.time()-t1:.1f}s)")

# --- w1 = p df: p1 = -p, g1 = 0, M2 = -int w2 again ---
t1 = time.time()
pm = parse_poly("x + 2*y")
w1p = exterior_d(F) * pm
d3 = DeformationSpec(base=spec, forms=[w1p, w2])
r3 = higher_melnikov(d3, lv2, 2)
print("p df case: p1 =", r3.chain[0].p_num, "| g1 =", r3.chain[0].g_num)
worst3 = 0.0
for s, s2 in zip(r3.samples, r2.samples):
    worst3 = max(worst3, abs(s["value"] - s2["value"]))
print(f"M2 agreement dg-case vs pdf-case: {worst3:.3e}  ({time.time()-t1:.1f}s)")

# --- pencil tangent direction: M1 == 0 within 1e-7 ---
t1 = time.time()
Fp = parse_poly("x^3 - 3*x + y^2 + 1/2")
Gp = parse_poly("x*y + x - 1/4")
pen = PencilSpec(F=Fp, G=Gp, p=2, q=3)
cd = critical_data(pen)
print("pencil: crit pts:", len(cd.points), "| indet:", len(cd.indeterminacy_points),
      "| warnings:", cd.warnings)
P = parse_poly("x^2 - y + 1/3")
Q = parse_poly("x - 2*y + 1")
wt = tangent_form(pen, P, Q)
dpen = DeformationSpec(base=pen, forms=[wt])
lvp = [0.8 + 0.3j, 1.9 - 0.4j]
rp = first_melnikov(dpen, lvp)
print(f"tangent pencil M1: max |M1| = {rp.max_abs():.3e}  ({time.time()-t1:.1f}s)")
print(f"total {time.time()-t0:.1f}s")
