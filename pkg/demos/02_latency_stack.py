"""The per-stage latency stack.

Evaluates each delay stage at the documented defaults, shows the
end-to-end breakdown, and sweeps the reception thresholds to show how
retransmissions inflate the stage delays.
"""

from mcrnet.latency import (access_delay, access_success_prob, deli_delay,
                            deli_success_prob, fiber_delay, total_latency,
                            uplink_success_prob)
from mcrnet.multipath import multipath_backhaul_delay
from mcrnet.popularity import hit_probability, zipf
from mcrnet.scenario import load_scenario

s = load_scenario()
print("=== stage success probabilities at defaults ===")
print(f"uplink request : {uplink_success_prob(s):.6f}")
print(f"routing info   : {deli_success_prob(s):.6f}")
print(f"access hop     : {access_success_prob(s):.6f}")

print()
print("=== end-to-end breakdown (psi = 144) ===")
p_hit = hit_probability(zipf(s.beta, s.k_total), 144)
d = total_latency(s, p_hit, multipath_backhaul_delay(s))
for name, value in [
    ("uplink tx", d.d_ul_req_tx), ("uplink queue", d.d_ul_req_queue),
    ("routing delivery", d.d_dl_deli), ("cooperative backhaul", d.d_dl_bh),
    ("access hop", d.d_dl_as), ("fiber miss term", d.d_fiber_term),
]:
    print(f"  {name:<22} {value * 1e3:8.3f} ms")
print(f"  {'total':<22} {d.total * 1e3:8.3f} ms   "
      f"(budget {s.d_max * 1e3:.0f} ms)")

print()
print("=== interference threshold vs delivery delay ===")
for theta_db in (-3.0, 0.0, 3.0, 6.0):
    si = s.with_params(theta2=10 ** (theta_db / 10))
    print(f"  theta2 = {theta_db:+.0f} dB: success "
          f"{deli_success_prob(si):.4f}, delay {deli_delay(si) * 1e6:.1f} us")

print()
print("=== fiber round trip ===")
print(f"  {s.l_fiber / 1e3:.0f} km at {s.v_fiber:.1e} m/s -> "
      f"{fiber_delay(s) * 1e3:.1f} ms, paid only on cache misses")
print(f"  access-stage delay at defaults: {access_delay(s) * 1e6:.1f} us")
