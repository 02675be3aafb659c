# The staircase search versus the exact O(n^2) search.
#
#   python demos/02_fast_search_at_scale.py [n]
#
# Each exact iteration scores every pair of samples. The fast step only looks
# at the two staircases of the points (y_i, v_i), v the current fitted values,
# so an iteration costs a sort update plus a few bisections.
import sys

import numpy as np

from mmregress import SolverConfig, build_staircases, evaluate, gen_instance, solve, staircase_argmin

rng = np.random.default_rng(0)
y, v = rng.standard_normal(2000), rng.standard_normal(2000)
idx = build_staircases(y, v)
print("2000 random points: %d left-top, %d right-bottom" % (len(idx.s_lt), len(idx.s_rb)))
i, j, val = staircase_argmin(idx, y, v)
full = ((y[:, None] - y) * (v[:, None] - v)).min()
print("staircase min %.6f, brute force %.6f" % (val, full))

n = int(sys.argv[1]) if len(sys.argv) > 1 else 100_000
inst = gen_instance(n, 100, 50, 0.0, seed=0)
rep = solve(inst, SolverConfig(R=50, mode="fast"))
m = evaluate(rep, inst)
print("n=%d: %.2fs total (%.2fs QR), %d iterations, hamming %d" % (
    n, rep.total_s, rep.qr_s, rep.iterations, m.hamming))

small = gen_instance(5000, 100, 50, 0.0, seed=0)
ex = solve(small, SolverConfig(R=50))
fa = solve(small, SolverConfig(R=50, mode="fast"))
print("n=5000: exact %.1fs, fast %.3fs (%.0fx)" % (ex.total_s, fa.total_s, ex.total_s / fa.total_s))
