"""Compare the closed-form amplifier laws with brute-force filtration on random inputs.

    python scripts/closed_form_check.py --cases 500 --seed 1
"""

import argparse
import math

import numpy as np

from hnla_lab.fock_core import SqueezedCoherentParams, coherent_squeezed_coeffs, fidelity
from hnla_lab.hnla_transform import auto_cutoff, filter_state, transform


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-r", type=float, default=1.0)
    ap.add_argument("--max-gain", type=float, default=1.3)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    infid, weight_err = [], []
    while len(infid) < args.cases:
        r, g = rng.uniform(0, args.max_r), rng.uniform(1, args.max_gain)
        if g * g * math.tanh(r) >= 0.95:
            continue
        params = SqueezedCoherentParams(complex(*rng.normal(size=2)), r, rng.uniform(0, 2 * math.pi))
        res = transform(params, g)
        n_max = max(auto_cutoff(params, 1e-14), auto_cutoff(res.params_out, 1e-14))
        brute, weight = filter_state(params, g, n_max)
        infid.append(1 - fidelity(brute, coherent_squeezed_coeffs(res.params_out, n_max)))
        weight_err.append(abs(weight / res.rel_success_weight - 1))
    print(f"{args.cases} cases: max infidelity {max(infid):.2e}, "
          f"max relative weight error {max(weight_err):.2e}")


if __name__ == "__main__":
    main()
