"""From photon arrival-time separation to two-photon contrast.

The wavepacket is an exponentially modified Gaussian set by the emitter
lifetime and the excitation pulse width. Delaying one photon lowers the
overlap, which lowers the |1,1> contrast towards the 1/3 floor.
"""

import numpy as np

from fringelab import WavepacketParams, contrast_decay_constant, contrast_vs_separation, overlap_curve

packet = WavepacketParams(T1=59.0, w_p=8.86)
taus = np.array([0, 10, 30, 59, 120, 240, 480])
overlaps = overlap_curve(taus, packet)
curve = contrast_vs_separation(taus, packet)

print(f"T1 = {packet.T1} ps, w_p = {packet.w_p} ps (K = {packet.K:.2f})")
print("  tau/ps   overlap   contrast")
for tau, ov, (_, c) in zip(taus, overlaps, curve):
    print(f"  {tau:6.0f}   {ov:.4f}    {c:.4f}")

print(f"\ntail decay constant of (C - 1/3): {contrast_decay_constant(packet):.1f} ps")
