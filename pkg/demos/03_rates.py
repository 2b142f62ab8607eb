#!/usr/bin/env python3
"""Convergence rates in epsilon: layer data, perturbed data, and the rate function psi.

Run:  python demos/03_rates.py [outdir]      (a few minutes)
"""

import sys
from pathlib import Path

import numpy as np

from fractal_burgers.config import ExperimentConfig, InitialSpec
from fractal_burgers.diagnostics import psi_value, rate_fit
from fractal_burgers.harness import cmd_sweep
from fractal_burgers.profiles import ViscousProfile

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")

# Layer initial data: the distance to the inviscid shock is the layer's own L2 gap,
# which scales like eps^(beta/2) = eps for alpha = 1.5.
layer = ExperimentConfig(initial=InitialSpec(kind="layer"), epsilons=(0.5, 0.25, 0.125, 0.05))
rep = cmd_sweep(layer, out)
fit = rate_fit(rep.epsilons, rep.sup_dist)
print("layer data")
for e, d in zip(rep.epsilons, rep.sup_dist):
    print(f"  eps={e:<6g} sup dist={d:.4f}")
print(f"  slope {fit.slope:.3f}  (95% CI {fit.ci95[0]:.3f} .. {fit.ci95[1]:.3f})")

# Large perturbations: dist(t) - dist(0) against psi(eps); C is the worst ratio.
pert = ExperimentConfig()
rep = cmd_sweep(pert, out)
print("perturbed data")
for e, s, d0, p in zip(rep.epsilons, rep.sup_dist, rep.dist0, rep.psi):
    print(f"  eps={e:<6g} dist0={d0:.4f} sup dist={s:.4f} psi={p:.4f}")
print(f"  C = {rep.C:.3g}")

# psi is dominated by the profile tails.  With exponential tails (a tanh layer)
# its slope approaches 1 / (2 (2 alpha - 1)) = 1/4 for alpha = 1.5.
xi = np.linspace(-4096, 4096, 2**16 + 1)
synth = ViscousProfile(alpha=1.5, u_minus=1.0, u_plus=-1.0, sigma=0.0, xi=xi, values=-np.tanh(xi / 2),
                       residual=0.0, tol=0.0)
eps = np.geomspace(1e-2, 1e-5, 7)
psi = [psi_value(e, synth, delta_grid=np.geomspace(4, 1e6, 400))[0] for e in eps]
print(f"psi slope with exponential tails: {rate_fit(eps, psi).slope:.3f}")
