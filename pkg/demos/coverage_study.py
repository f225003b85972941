r"""
Coverage of a UE in an indoor THz cell
--------------------------------------
Analytic coverage probability next to Monte Carlo estimates, followed by the
two design trends: coverage against room size and against AP density. The
simulation uses 100k scenes per point to keep the run short; the acceptance
suite uses 10^6.
"""
import numpy as np

from thzcov.analysis import CoverageModel
from thzcov.config import default_scenario
from thzcov.montecarlo import SimConfig, simulate_coverage


def model(**kw):
    sc = default_scenario(**kw)
    return sc, CoverageModel(sc.room, sc.sys, sc.ap, sc.ue, sc.ftr, sc.ctl)


#%%
# Coverage against the SINR threshold for a centred and a corner UE.
beta_db = np.arange(0, 31, 5)
for placement in ("center", "corner"):
    sc, m = model(placement=placement)
    sim, se = simulate_coverage(sc.room, sc.sys, sc.ap, sc.ue, sc.ftr, 10 ** (beta_db / 10),
                                SimConfig(trials=100_000, seed=0))
    print(placement)
    for b, s, e in zip(beta_db, sim, se):
        print(f"  {b:3d} dB  analytic {m.coverage(10 ** (b / 10)).coverage:.4f}  sim {s:.4f} +- {e:.4f}")

#%%
# Small rooms hold few APs and often none in LoS; large rooms add
# interferers. At 20 dB the centred UE does best in a medium-sized room.
for r_x in (5, 8, 11, 20, 40):
    _, m = model(r_x=float(r_x), r_y_ratio=0.75)
    print(f"R_X={r_x:3d} m  P_c={m.coverage(100.0).coverage:.4f}")

#%%
# Denser deployments help until interference takes over. A corner UE sees
# fewer APs, so its best density is roughly twice that of a centred UE.
lam = np.round(np.arange(0.05, 0.51, 0.05), 2)
for placement in ("center", "corner"):
    pc = [model(placement=placement, lambda_a=x)[1].coverage(10.0).coverage for x in lam]
    print(placement, "best lambda_A =", lam[int(np.argmax(pc))], np.round(pc, 5))
