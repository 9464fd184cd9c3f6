"""Derive the frozen statistical bounds used by the test-suite.

Runs the generator + closed-form least squares (``ols_reference``, not the
iterative fit) over many independent seeds and reports the spread of each
statistic. The tests freeze a bound beyond the worst replicate and check a
single seed-fixed instance against it.

    python tools/oracle_bounds.py [--replicates 200]
"""

import argparse
import time

import numpy as np

from memdecay.core import VideoScoreTable
from memdecay.fitting import ols_reference
from memdecay.metrics import evaluate_predictions, split_half_consistency
from memdecay.simulate import SimSpec, const, simulate_dataset, uniform


def recovery_errors(spec):
    sim = simulate_dataset(spec)
    recs = sim.records
    dm, da = [], []
    for code, vid in enumerate(recs.video_ids):
        fit = ols_reference(recs.take(np.flatnonzero(recs.video_codes == code)), spec.ref_lag)
        dm.append(abs(fit.m_T - sim.truth[vid].m_T))
        da.append(abs(fit.alpha - sim.truth[vid].alpha))
    return float(np.mean(dm)), float(np.mean(da))


def pipeline_r2(spec):
    sim = simulate_dataset(spec)
    recs = sim.records
    curves = tuple(
        (vid, ols_reference(recs.take(np.flatnonzero(recs.video_codes == code)), spec.ref_lag))
        for code, vid in enumerate(recs.video_ids)
    )
    return evaluate_predictions(sim.truth, VideoScoreTable(curves)).r2_by_lag[80]


def describe(name, values):
    v = np.asarray(values)
    q = np.quantile(v, [0.0, 0.001, 0.01, 0.5, 0.99, 0.999, 1.0])
    print(f"{name:<34s} n={len(v):4d} min={q[0]:.5g} q0.1%={q[1]:.5g} q1%={q[2]:.5g} "
          f"median={q[3]:.5g} q99%={q[4]:.5g} q99.9%={q[5]:.5g} max={q[6]:.5g}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--replicates", type=int, default=200)
    ap.add_argument("--large-replicates", type=int, default=20)
    args = ap.parse_args()
    t0 = time.perf_counter()

    rec90 = [recovery_errors(SimSpec(seed=1000 + s)) for s in range(args.replicates)]
    describe("recovery m80 @90/video", [r[0] for r in rec90])
    describe("recovery alpha @90/video", [r[1] for r in rec90])

    big = [recovery_errors(SimSpec(annotations_per_video=10_000, seed=2000 + s)) for s in range(args.large_replicates)]
    describe("recovery m80 @1e4/video", [r[0] for r in big])
    describe("recovery alpha @1e4/video", [r[1] for r in big])

    describe("pipeline R2 at lag 80", [pipeline_r2(SimSpec(seed=s)) for s in range(args.replicates)])

    het = [
        split_half_consistency(simulate_dataset(SimSpec(m80_dist=uniform(0.4, 1.0), seed=3000 + s)).records, 25, seed=s).mean_rho
        for s in range(args.replicates)
    ]
    describe("split-half rho heterogeneous", het)
    null = [
        split_half_consistency(
            simulate_dataset(SimSpec(m80_dist=const(0.7), alpha_dist=const(0.0), seed=4000 + s)).records, 25, seed=s
        ).mean_rho
        for s in range(args.replicates)
    ]
    describe("split-half rho null", null)
    print(f"elapsed {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
