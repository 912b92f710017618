"""Compare the brute-force quadrature oracles with the coefficient-space engine.

Runs the kappa*Y_10 family and a few random band-limited densities and prints
relative differences for I1(q) and J1(q, p).
"""
import argparse
import math

import numpy as np

from sphere_sumrules import DensitySpec, SpectralEngine, oracle_I1, oracle_J1


def random_density(rng, band_limit, amplitude=0.8):
    coeffs = {}
    for l in range(1, band_limit + 1):
        coeffs[(l, 0)] = complex(rng.normal())
        for m in range(1, l + 1):
            c = complex(rng.normal(), rng.normal())
            coeffs[(l, m)], coeffs[(l, -m)] = c, (-1) ** m * c.conjugate()
    bound = sum(abs(c) * math.sqrt((2 * l + 1) / (4 * math.pi)) for (l, _), c in coeffs.items())
    return DensitySpec({k: amplitude * v / bound for k, v in coeffs.items()})


def report(label, d):
    eng = SpectralEngine(d)
    for q in (0, 1, 2):
        o, e = oracle_I1(d, q), eng.i1(q).value
        print(f"{label:>14}  I1({q})    oracle {o.value: .12f}  exact {e: .12f}  rel {abs(o.value / e - 1):.1e}")
    for q, p in ((0, 0), (1, 0), (1, 1)):
        o, e = oracle_J1(d, q, p), eng.j1(q, p).value
        print(f"{label:>14}  J1({q},{p})  oracle {o.value: .12f}  exact {e: .12f}  rel {abs(o.value / e - 1):.1e}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--random", type=int, default=2, help="number of random densities")
    args = ap.parse_args(argv)
    for k in (0.5, 1.0, 2.0):
        report(f"kappa={k}", DensitySpec.kappa_y10(k))
    rng = np.random.default_rng(args.seed)
    for i in range(args.random):
        report(f"random Lc={2 + i % 2}", random_density(rng, 2 + i % 2))


if __name__ == "__main__":
    main()
