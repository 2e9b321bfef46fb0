"""How long should the laser stay on?

Monte Carlo MSE of photon summation and the flat-prior posterior as the
readout window grows. Photon summation has a sweet spot: past it, extra bins
carry background but little contrast. The posterior keeps (weakly) improving
because it learns to ignore those bins.

    python demos/readout_time_sweep.py [--trials 100] [--plot]
"""
import argparse

from nvbayes import load_config, rate_parameters
from nvbayes.bench import SweepConfig, run_mse_sweep

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--trials", type=int, default=100)
parser.add_argument("--seed", type=int, default=1)
parser.add_argument("--plot", action="store_true", help="show a log-log plot (needs matplotlib)")
args = parser.parse_args()

params = rate_parameters(load_config())
values = [100, 200, 300, 400, 600, 800, 1200, 1600, 2400, 3200]
result = run_mse_sweep(SweepConfig("readout_time", values, params, dt=1.0, trials_per_point=args.trials,
                                   methods=("PS", "BayesFlat"), seed=args.seed))

print(f"{'t_R (ns)':>9}  {'PS MSE':>10}  {'Bayes MSE':>10}")
_, ps, _ = result.series("PS")
_, bayes, _ = result.series("BayesFlat")
for t, a, b in zip(values, ps, bayes):
    print(f"{t:9d}  {a:10.2e}  {b:10.2e}")
for key, value in result.summary.items():
    print(f"{key}: {value}")

if args.plot:
    import matplotlib.pyplot as plt

    for method in ("PS", "BayesFlat"):
        x, y, e = result.series(method)
        plt.errorbar(x, y, yerr=e, marker="o", label=method)
    plt.xscale("log")
    plt.yscale("log")
    plt.xlabel("readout time (ns)")
    plt.ylabel("MSE")
    plt.legend()
    plt.show()
