"""Two-hop relaying with equal source and relay power.

Decoding schemes, amplify-and-forward and quantize-and-forward are compared
against the cut-set style bounds. Rates in nats.
"""
from layercast import relay

cols = ("DF1", "Scheme1", "AF", "BAQ", "FCSI", "ergodic_cutset")
print(f"{'P_dB':>5} " + " ".join(f"{c:>14}" for c in cols))
for db in (0, 10, 20):
    P = 10 ** (db / 10)
    cfg = relay.RelayConfig(P, P)
    vals = [relay.df_single_level(cfg)[1], relay.scheme1_outage_broadcast(cfg)[2],
            relay.af_broadcast_rate(cfg, relay.af_law(cfg, seed=1))[1], relay.baq_rate(cfg)[1],
            relay.fcsi_upper(cfg), relay.ergodic_cutset(cfg)]
    print(f"{db:5d} " + " ".join(f"{v:14.4f}" for v in vals))
