"""Content popularity and edge caching.

Walks through the Zipf request model, the closed-form edge hit
probability, and a request-driven comparison of the three cache
replacement policies.
"""

from mcrnet.montecarlo import substream
from mcrnet.popularity import (FIFO, LRU, POPULARITY_PRIORITY, CacheState,
                               hit_probability, run_requests, zipf)

LIBRARY = 500
CACHE = 144

print("=== Zipf popularity ===")
for beta in (0.4, 0.8, 1.2):
    model = zipf(beta, LIBRARY)
    print(f"beta={beta}: q1={model.q[0]:.4f}, q10={model.q[9]:.4f}, "
          f"hit({CACHE})={hit_probability(model, CACHE):.4f}")

print()
print("=== hit probability vs cache size (beta=0.8) ===")
model = zipf(0.8, LIBRARY)
for psi in (0, 50, 144, 300, 500):
    print(f"  psi={psi:3d}  P(in edge cache) = {hit_probability(model, psi):.4f}")

# the same i.i.d. request stream drives all three policies
print()
print("=== policy comparison on 50k Zipf requests (cache 20/200) ===")
model = zipf(0.8, 200)
rng = substream(7, 0)
stream = rng.choice(200, size=50_000, p=model.q) + 1
analytic = hit_probability(model, 20)
for policy in (FIFO, LRU, POPULARITY_PRIORITY):
    _, hits = run_requests(CacheState(psi=20, policy=policy), stream)
    print(f"  {policy:<12} empirical hit rate {hits.mean():.4f}")
print(f"  analytic popularity-priority rate  {analytic:.4f}")
