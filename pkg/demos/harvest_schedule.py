"""Power schedule of a transmitter that harvests energy block by block.

Energy can be saved for later blocks but not borrowed from the future. The
optimal schedule is a staircase: blocks between two tight budget points share
one marginal rate, and that marginal decreases from group to group.
"""
import numpy as np

from layercast import harvest as hv
from layercast import rayleigh_power

rng = np.random.default_rng(2)
hp = hv.HarvestProfile(rng.exponential(2.0, (8, 2)))
law = rayleigh_power(1.0)
res, total = hv.end_to_end(law, hp)
naive = sum(hv.block_rate(law, float(p)) for p in hv.equal_split(hp.gamma))

print(f"{'block':>5} {'harvest':>8} {'budget':>8} {'power':>8} {'spent':>8}")
for b in range(hp.B):
    print(f"{b + 1:5d} {hp.g[b].sum():8.3f} {hp.gamma[b]:8.3f} {res.p[b]:8.3f} "
          f"{res.cumulative()[b]:8.3f}")
print("groups:", res.groups)
print("marginals:", np.round(res.v, 4))
print(f"total rate {total:.4f} nats vs {naive:.4f} spending each harvest at once")
