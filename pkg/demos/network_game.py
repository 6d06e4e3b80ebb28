"""Zero-sum game between two networks.

Two teams of three agents play a bilinear game with log-sum-exp regularizers.
Each agent sees only its own cost and its neighbours, so the Nash equilibrium
has to be reached through consensus inside each team.  The demo prints the
team consensus errors along the trajectory and the final distance to the
equilibrium computed by extragradient.

Run with ``python demos/network_game.py``.
"""

import numpy as np

from saddleflow.config import validate
from saddleflow.experiments import build_experiment, run_experiment, solve_reference

config = validate({
    "experiment": "zerosum",
    "seed": 0,
    "baseline": False,
    "instance": {"n1": 3, "n2": 3, "p": 2, "q": 2, "rho": 20, "m": 8, "edge_prob": 0.6},
    "integrator": {"rtol": 1e-6, "atol": 1e-8, "t_end": 100, "samples": 60},
    "oracle": {"tol": 1e-10},
})

exp = build_experiment(config)
ref = solve_reference(exp)
inst = exp.instance
print("equilibrium strategy, team 1:", np.round(inst.split_min(ref.x_star)[0][:2], 4))
print("equilibrium strategy, team 2:", np.round(inst.split_max(ref.y_star)[0][:2], 4))

rec = run_experiment(exp, ref)["accelerated"]
t = rec.times
print(f"\n{'t':>8} {'|L1 x|':>11} {'|L2 y|':>11} {'payoff gap':>11}")
for i in np.linspace(0, len(t) - 1, 8).astype(int):
    c = rec.columns
    print(f"{t[i]:8.2f} {c['consensus1'][i]:11.2e} {c['consensus2'][i]:11.2e} "
          f"{abs(c['subopt'][i]):11.2e}")
