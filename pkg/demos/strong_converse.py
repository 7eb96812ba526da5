"""Above the assisted capacity, success probability decays exponentially.

For the noiseless qubit with a maximally entangled assist, the sandwiched
Renyi bound gives an explicit exponent for any rate above 2 bits.
"""

import numpy as np

from qcap import identity_channel, max_sandwiched_divergence, maximally_entangled, strong_converse_exponent

div = max_sandwiched_divergence(identity_channel(2), maximally_entangled(2), np.eye(2) / 2, alpha=2.0, restarts=4)
print(f"max sandwiched divergence (alpha=2) = {div.value:.6f}")
for rate in (1.8, 2.2, 2.5, 3.0):
    sc = strong_converse_exponent(rate, 2.0, div.value)
    thr = sc.threshold(0.01)
    tail = f"success < 1% from n={thr}" if thr else "no decay guaranteed"
    print(f"R={rate}: exponent {sc.exponent:+.4f}, bound at n=50: {sc.succ_bound(50):.3g}, {tail}")
