"""A tour of the Funk ball: one-way distances on the unit disc.

The Funk distance charges travel toward the boundary much more than
travel back toward the center (distances back to 0 never exceed log 2,
while distances outward blow up).  This script samples the disc, checks
the closed forms at the center, and watches the reversibility constant
climb as we allow points closer to the rim.
"""

import numpy as np

from qmspace import FunkBall, SampleSpec, funk_distance, reversibility, sample

x = np.array([0.6, 0.0])
print("distance 0 -> x at |x| = 0.6 :", funk_distance(np.zeros(2), x))
print("  closed form -log(1 - 0.6)  :", -np.log(0.4))
print("distance x -> 0              :", funk_distance(x, np.zeros(2)))
print("  closed form  log(1 + 0.6)  :", np.log(1.6))
print("uniform bound on return trips:", np.log(2.0))
print()

# reversibility of the clipped ball: sup d(x,y)/d(y,x) over the sample.
# For the ball clipped at forward radius r the exact value is 2 e^r - 1.
for r in (0.25, 0.5, 1.0):
    ms = sample(FunkBall(dim=2),
                SampleSpec(strategy="radial-shells", count=600, seed=0,
                           clip_radius=r))
    lam = reversibility(ms.space)
    print(f"clip radius {r:4.2f}: n = {ms.n:4d}  "
          f"reversibility = {lam:.4f}  (exact {2 * np.exp(r) - 1:.4f})")
