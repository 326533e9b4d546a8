"""Second moment of short length increments, against the eps*|ln eps| law.

Over a short step of size eps, the total tree length of a large
stationary ensemble moves by an amount whose second moment behaves like
4 * eps * |ln eps| as eps shrinks. Dividing by eps alone would
therefore blow up: the process is too rough to carry an ordinary
diffusion coefficient. At step sizes a simulation can afford, the
normalized ratio sits well above 4 and declines only logarithmically;
the table below shows the slow descent. Rare exits of very old lines
carry a lot of the second moment, hence the growing replicate counts
for smaller steps.
"""

import math

import numpy as np

from kingman.rng import make_stream
from kingman.treelength import sample_stationary_length_increments

SEED = 0
N = 3000
RUNS = ((0.05, 8000), (0.01, 12000), (0.002, 20000))


def main():
    print(f"N = {N}")
    print()
    print("  eps      reps   E[inc^2]    ratio to eps*|ln eps|")
    for i, (eps, reps) in enumerate(RUNS):
        stream = make_stream(SEED, 31 + i)
        inc = sample_stationary_length_increments(N, eps, reps, stream)
        second = float(np.mean(inc * inc))
        ratio = second / (eps * abs(math.log(eps)))
        print(f"  {eps:<7.3f}  {reps:>5d}  {second:10.6f}  {ratio:8.3f}")
    print()
    print("the mean increment stays near zero, so this is pure fluctuation;")
    print("the 1/|ln eps| corrections fade too slowly for the ratio to get")
    print("close to its limit of 4 at these step sizes.")


if __name__ == "__main__":
    main()
