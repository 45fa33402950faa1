"""Trace the EM estimate of v_s across a slowly varying sequence.

For each epoch, LaplacianSI is fed the previous LaplacianSI estimate and,
separately, the true previous signal. Prints the per-outer-iteration v_s
history next to plain one-bit GAMP, which shows v_s shrinking towards zero
when most side-information entries sit (nearly) exactly at zero.
"""

import argparse

import numpy as np

from onebit_si import SignalPrior, nmse, run_noisy1bg, run_with_si
from onebit_si.channel import ChannelParams
from onebit_si.sim import ScenarioConfig, SideInformation, SlowVarying, make_trial


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trial", type=int, default=0)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--epochs", type=int, default=5)
    args = ap.parse_args()
    sc = ScenarioConfig(N=200, M=600, prior=SignalPrior(0.1, 5.5), ch=ChannelParams(0.15, 0.85),
                        si_protocol=SlowVarying(epochs=args.epochs), seed=args.seed)
    d = make_trial(sc, args.trial)
    x0, y0 = d.epoch_sequence[0]
    prev = run_noisy1bg(d.A, y0, sc.prior, sc.ch).x_hat
    print(f"epoch 0: Noisy1bG nmse {nmse(x0, prev):.3f}")
    np.set_printoptions(precision=4)
    for e in range(1, args.epochs):
        x, y = d.epoch_sequence[e]
        plain = nmse(x, run_noisy1bg(d.A, y, sc.prior, sc.ch).x_hat)
        own = run_with_si(d.A, y, sc.prior, sc.ch, SideInformation(prev, None).laplacian(1.0))
        oracle = run_with_si(d.A, y, sc.prior, sc.ch, SideInformation(d.epoch_sequence[e - 1][0], None).laplacian(1.0))
        print(f"epoch {e}: Noisy1bG {plain:.3f} | SI=own estimate {nmse(x, own.x_hat):.3f} "
              f"v_s {np.array(own.param_history)} | SI=true previous {nmse(x, oracle.x_hat):.3f} "
              f"v_s {np.array(oracle.param_history)}")
        prev = own.x_hat


if __name__ == "__main__":
    main()
