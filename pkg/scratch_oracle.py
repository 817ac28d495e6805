import time

import numpy as np

from melnikov_kit.algebra import parse_poly, OneForm, exterior_d
from melnikov_kit.config import RunConfig
from melnikov_kit.fibration import critical_data, trace_to_level
from melnikov_kit.foliation import PencilSpec
from melnikov_kit.melnikov import DeformationSpec, higher_melnikov
from melnikov_kit.oracle import holonomy, melnikov_fd, melnikov_fd_scan

t0 = time.time()
cfg = RunConfig()

F = parse_poly("1/2*x^2 + 1/2*y^2")
G = parse_poly("1")
base = PencilSpec(F, G, 1, 1)
w1 = OneForm(parse_poly("(x^2 - 1)*y"), parse_poly("0"))
dspec = DeformationSpec(base, [w1])

cdata = critical_data(base, cfg=cfg)
print("critical values:", [c.value for c in cdata.points])
guide = trace_to_level(cdata, 0, 2.0, cfg=cfg)
print("guide verts:", len(guide.x), "diam:", guide.diameter())

# unperturbed return: h0(t) = t
for t in (2.0, 1.9, 2.15, 2.0 + 0.05j):
    s = holonomy(dspec, guide, t, 0.0, cfg)
    print(f"h0({t}) - t = {abs(s.h - s.t):.3e}  steps={s.steps} rej={s.rejected} "
          f"resid={s.leaf_residual_max:.2e}")

# closed form M1(t) = -pi r^2 (1 - r^2/4), r^2 = 2t
def m1_exact(t):
    r2 = 2 * t
    return -np.pi * r2 * (1 - r2 / 4)

# displacement vs eps*M1 at t=1 (M1(1) = -pi); t=2 is the zero of M1
guide1 = trace_to_level(cdata, 0, 1.0, cfg=cfg)
for eps in (1e-2, 1e-3):
    s = holonomy(dspec, guide1, 1.0, eps, cfg)
    d = s.h - s.t
    print(f"eps={eps}: (h-t)/eps = {d/eps:.8f}  M1 = {m1_exact(1.0):.8f}  "
          f"rel = {abs(d/eps - m1_exact(1.0))/abs(m1_exact(1.0)):.2e}")

# finite-difference M1 via Richardson
scan = melnikov_fd_scan(dspec, guide1, 1.0, 1, cfg)
v = scan["orders"][1]["value"]
err = scan["orders"][1]["error"]
rel = abs(v - m1_exact(1.0)) / abs(m1_exact(1.0))
print(f"fd M1(1) = {v:.10f} err~{err:.2e} rel vs exact = {rel:.2e} eps0={scan['eps0']}")

# near the M1 zero: displacement at eps=0.01 should vanish near t=2
for t in (1.95, 2.0, 2.05):
    s = holonomy(dspec, guide, t, 0.01, cfg)
    print(f"eps=0.01 t={t}: h - t = {(s.h - s.t):.6e}")

# order-2 check: w1 = dg -> M1 = 0, M2 = -int w2
g = parse_poly("x^2*y - 1/3*y^3 + x*y")
w1b = exterior_d(g)
w2 = OneForm(parse_poly("0"), parse_poly("x"))
dspec2 = DeformationSpec(base, [w1b, w2])
res = higher_melnikov(dspec2, [2.0], 2, cfg=cfg)
m2_analytic = res.samples[0]["value"]
print("analytic M2(2):", m2_analytic)
scan2 = melnikov_fd_scan(dspec2, guide, 2.0, 2, cfg)
from melnikov_kit.oracle import melnikov_fd as mfd
_, _, diag = mfd(scan2["samples"], 2, lower={1: scan2["orders"][1]["value"]})
print("deltas:", ["%.2e" % d for d in diag["column_deltas"]])
v2 = scan2["orders"][2]["value"]
e2 = scan2["orders"][2]["error"]
print(f"fd M2(2) = {v2:.10f} err~{e2:.2e} "
      f"rel vs analytic = {abs(v2 - m2_analytic)/abs(m2_analytic):.2e}")
print(f"fd M1 estimate on dg-case: {scan2['orders'][1]['value']:.3e}")

print(f"total {time.time()-t0:.1f}s")
