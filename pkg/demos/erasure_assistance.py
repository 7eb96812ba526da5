"""How much does a partially entangled assist help an erasure channel?

Walks from no entanglement to a maximally entangled assist on the qubit
erasure channel, comparing the numeric optimizer with the closed form, and
shows the rate left on the table by simply feeding the assist into the channel.
"""

import numpy as np

from qcap import (
    BipartitePureState,
    assisted_mutual,
    channel_mutual_information,
    erasure_assisted_capacity,
    erasure_channel,
    holevo_information,
    shor_rate,
)

p = 0.3
n = erasure_channel(2, p)
chi = holevo_information(n, restarts=4).value
i_n = channel_mutual_information(n).value
print(f"erasure p={p}: chi = {chi:.6f}, I = {i_n:.6f}")
print()
print(" lambda   numeric I_rho   closed form   identity encoding")
for lam in np.linspace(0, 0.5, 6):
    phi = BipartitePureState.from_schmidt([lam, 1 - lam])
    est = assisted_mutual(n, phi, ensemble_size=8, restarts=4)
    exact = erasure_assisted_capacity(2, p, [lam, 1 - lam])
    print(f"  {lam:.1f}     {est.value:.6f}        {exact:.6f}      {shor_rate(n, phi):.6f}")
print()
print("At lambda=0 the assist is useless and the rate is chi; at lambda=0.5 it reaches I.")
