r"""
Arcs, segments and beam hitting in a rectangular room
-----------------------------------------------------
Access points at horizontal distance d from the UE lie on a circle that the
room walls cut into arcs. The arc angle sets the AP intensity per metre of
radius; the arc segments set how likely an interferer shares the UE's beam.
"""
import numpy as np

from thzcov.analysis import ue_horizontal_hit_prob
from thzcov.config import PLACEMENTS, default_scenario
from thzcov.geometry import RoomGeometry, arc_angle, intersection_counts, segment_angles
from thzcov.montecarlo import SimConfig, simulate_hitting

room = RoomGeometry(20.0, 15.0, 0.5, 0.5)

#%%
# Up to the nearest wall the whole circle is inside; past the far corners
# nothing is.
for d in (3.0, 7.5, 8.0, 10.5, 12.0, 12.6):
    seg = segment_angles(room, d)
    print(f"d={d:5.2f}  theta={arc_angle(room, d):6.4f}  segments={np.round(seg.angles, 4)}"
          f"  crossings={intersection_counts(room, d)[-1]}")

#%%
# The UE's 33 degree receive beam catches an interferer on the same circle
# with a probability that depends on how the arc is split. Compare the
# segment approximation with direct angle sampling.
for name in PLACEMENTS:
    sc = default_scenario(placement=name)
    print(name)
    for d0 in (1.0, 4.0, 8.0, 11.0):
        approx = ue_horizontal_hit_prob(sc.room, sc.ue, d0)
        sim, se = simulate_hitting(sc.room, sc.sys, sc.ue, d0, SimConfig(trials=50_000, seed=3))
        print(f"  d0={d0:4.1f}  approx {approx:.4f}  simulated {sim:.4f} +- {se:.4f}")
