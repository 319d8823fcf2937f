"""Fringes of the four input states and how source imperfections wash them out.

Run with ``python3 demos/fringes_and_contrast.py``.
"""

import numpy as np

from fringelab import FITTED, IDEAL, InputConfig, contrast, parameter_sweep, scan

# An ideal source gives full-contrast fringes whose period shrinks with photon number.
print("ideal source")
for config in InputConfig:
    f = scan(config, IDEAL)
    report = contrast(f)
    print(f"  {config!s:6} peak P = {f.probs.max():.4f}  pairs = {len(report.pairs):2d}  C = {report.mean_contrast:.4f}")

# With the fitted source and loss parameters the contrast drops, most of all
# for |2,2>, whose multi-photon admixtures leak into the (3,1) channel.
print("\nfitted source")
for config in InputConfig:
    report = contrast(scan(config, FITTED))
    extra = ""
    if report.deep_contrast is not None:
        extra = f"  deep {report.deep_contrast:.3f}  shallow {report.shallow_contrast:.3f}"
    print(f"  {config!s:6} C = {report.mean_contrast:.3f}{extra}")

# Partial distinguishability only touches the shallow |2,2> minima; the
# minima at multiples of pi stay dark for any overlap.
print("\n|2,2> versus indistinguishability (g2 = 0, no loss)")

def fmt(value):
    # fully distinguishable pairs have no minima near pi/2 at all
    return "  -  " if value is None else f"{value:.3f}"


grid = np.linspace(0, 1, 6)
for value, report in zip(grid, parameter_sweep("22", "3,1", "indist", grid)):
    print(f"  I = {value:.1f}  deep {fmt(report.deep_contrast)}  shallow {fmt(report.shallow_contrast)}")

# Multi-photon emission is far more damaging than partial distinguishability.
print("\n|1,1> versus g2 (I = 1)")
g2_grid = [0.0, 0.01, 0.02, 0.05, 0.1]
for value, report in zip(g2_grid, parameter_sweep("11", "1,1", "g2", g2_grid)):
    print(f"  g2 = {value:.2f}  C = {report.mean_contrast:.3f}")
