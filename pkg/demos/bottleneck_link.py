"""A fading hop followed by a wired link of capacity C = 4 nats.

At low SNR the wired link is rarely the limit and the schemes nearly agree.
At high SNR a relay that decodes must cap its layered rate at C, and the
price of that cap (lambda) becomes positive.
"""
from layercast import bottleneck as bn
from layercast import rayleigh_power

law = rayleigh_power(1.0)
print(f"{'P':>8} {'oblivious':>10} {'decoding':>10} {'lambda':>8} {'erg. obl.':>10} {'erg. DF':>8}")
for P in (1.0, 10.0, 100.0, 1e3, 1e4):
    cfg = bn.BottleneckConfig(P, law, C=4.0)
    cp, r_non = bn.nonoblivious_broadcast(cfg)
    print(f"{P:8g} {bn.oblivious_broadcast(cfg)[1]:10.5f} {r_non:10.5f} {cp.lambda_opt:8.4f} "
          f"{bn.oblivious_ergodic(cfg):10.5f} {bn.df_ergodic(cfg):8.5f}")
