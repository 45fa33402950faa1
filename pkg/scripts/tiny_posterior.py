"""Compare one-bit GAMP with the exact 2-D posterior mean on N=2 instances.

Prints the fraction of instances within 0.1 (l-inf) for a clean channel and
for a channel with sign flips, where GAMP's Gaussian approximation is looser.
"""

import argparse

import numpy as np

from onebit_si import SignalPrior, run_noisy1bg
from onebit_si.channel import ChannelParams
from onebit_si.sim import ScenarioConfig, make_trial
from onebit_si.validation import grid_posterior_mean


def agreement(ch, instances, seed, tol=0.1):
    sc = ScenarioConfig(N=2, M=200, prior=SignalPrior(0.5, 5.5), ch=ch, seed=seed)
    errs = []
    for k in range(instances):
        d = make_trial(sc, k)
        ref = grid_posterior_mean(d.A, d.y, sc.prior.lam, sc.prior.v_x, ch.v, ch.gamma)
        errs.append(np.max(np.abs(run_noisy1bg(d.A, d.y, sc.prior, ch).x_hat - ref)))
    errs = np.array(errs)
    return np.mean(errs <= tol), np.median(errs)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--seed", type=int, default=9)
    args = ap.parse_args()
    for gamma in (1.0, 0.85):
        frac, med = agreement(ChannelParams(0.15, gamma), args.instances, args.seed)
        print(f"flip prob {1 - gamma:.2f}: {frac:.0%} within 0.1, median l-inf error {med:.3f}")


if __name__ == "__main__":
    main()
