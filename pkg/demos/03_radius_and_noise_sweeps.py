# Plot data for two sweeps, written as CSV next to this script's output dir.
#
#   python demos/03_radius_and_noise_sweeps.py [outdir]
#
# 1. relative objective as the radius R grows past the true mismatch count
# 2. Hamming distance as the noise level grows
import os
import sys

from mmregress import bench

out = sys.argv[1] if len(sys.argv) > 1 else "sweeps"
os.makedirs(out, exist_ok=True)

radius = bench.parse_grid("""
n = 1000
d = 10
r = 10
sigma = 0.1
R = 2, 5, 1r, 2r, 4r, 8r
methods = fast
replications = 5
""")
noise = bench.parse_grid("""
n = 500
d = 10
r = 50
sigma = 0, 0.02, 0.05, 0.1, 0.2
R = r
methods = exact, altmin
replications = 5
""")

for name, grid in (("radius", radius), ("noise", noise)):
    rows = bench.run_grid(grid)
    bench.write_rows(rows, os.path.join(out, name + ".csv"))
    agg = bench.aggregate(rows)
    bench.write_rows(agg, os.path.join(out, name + "_aggregate.csv"), bench.AGGREGATE_COLUMNS)
    print(name)
    for a in agg:
        rel = a["relative_obj_mean"]
        print("  R=%-4d sigma=%-5g %-6s hamming %6.1f +- %4.1f  rel obj %s" % (
            a["R"], a["sigma"], a["method"], a["hamming_mean"], a["hamming_se"],
            "-" if rel is None else "%.3f" % rel))
