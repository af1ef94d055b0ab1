#!/usr/bin/env python3
"""Monte Carlo sweep of the default-count distribution over capital ratios.

A desk-size version of the headline experiment: homogeneous versus
heterogeneous markets at the same loan volume. Prints the percentile table
and, if matplotlib is importable, saves the curves next to this script.
"""

import time
from pathlib import Path

from knockon import LossRule, ScenarioConfig, sweep

REPLICATIONS = 2000        # the headline experiments use 10000

common = dict(
    n_banks=500,
    density=0.005,
    loan_fraction=0.1,
    capital_ratio_grid=(0.01, 0.02, 0.03, 0.04, 0.05, 0.07, 0.10, 0.14),
    replications=REPLICATIONS,
    master_seed=2026,
    loss_rule=LossRule.CAPPED,
)

results = {}
for kind, powers in (("homogeneous", 0.0), ("heterogeneous", 2.0)):
    cfg = ScenarioConfig(
        topology_kind=kind, lender_power=powers, borrower_power=powers, **common
    )
    start = time.perf_counter()
    results[kind] = sweep(cfg, workers=2)
    print(f"{kind}: {REPLICATIONS} replications x "
          f"{len(common['capital_ratio_grid'])} ratios "
          f"in {time.perf_counter() - start:.1f}s")

for kind, result in results.items():
    print(f"\n{kind} market, default counts over {REPLICATIONS} replications:")
    print(f"{'R':>6} {'mean':>7} {'p90':>5} {'p95':>5} {'p99':>5} {'max':>5} {'knock-on':>9}")
    for rec in result.records:
        print(f"{rec.capital_ratio:>6.3f} {rec.mean:>7.3f} {rec.p90:>5} "
              f"{rec.p95:>5} {rec.p99:>5} {rec.max_defaults:>5} "
              f"{rec.knock_on_fraction:>9.4f}")

print("\nnote the contrast: raising the capital ratio quickly kills")
print("knock-on defaults in the homogeneous market, while the worst-case")
print("percentiles of the heterogeneous market decay far more slowly.")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, (kind, result) in zip(axes, results.items()):
        grid = [rec.capital_ratio for rec in result.records]
        for field, label in (("p99", "99th pct"), ("p95", "95th pct"),
                             ("p90", "90th pct"), ("mean", "mean")):
            ax.plot(grid, [getattr(rec, field) for rec in result.records],
                    marker="o", label=label)
        ax.set_title(f"{kind} (N=500, p=0.005)")
        ax.set_xlabel("equity capital ratio R")
        ax.set_yscale("log")
    axes[0].set_ylabel("defaults per cascade")
    axes[0].legend()
    out = Path(__file__).with_name("capital_ratio_sweep.png")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print(f"saved {out}")
