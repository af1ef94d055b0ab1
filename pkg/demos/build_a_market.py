#!/usr/bin/env python3
"""Build an interbank market from scratch and inspect its balance sheets.

Walks through the full construction pipeline: sample a topology, assign
loan amounts, complete the balance sheets, and check every accounting
identity. Run it directly; it prints tables to stdout.
"""

import numpy as np

from knockon import (
    RngStream,
    build_balance_sheets,
    compute_weights,
    degree_stats,
    gen_erdos_renyi,
    gen_preferential_attachment,
    validate,
)

N_BANKS = 40
LOAN_FRACTION = 0.1      # interbank loans as a share of total assets
CAPITAL_RATIO = 0.05     # equity as a share of liabilities
TOTAL_EXTERNAL = 1.0

rng = RngStream(master_seed=7, stream_index=0)

print("=" * 64)
print("1. Homogeneous market: every pair equally likely to trade")
print("=" * 64)
topology = gen_erdos_renyi(N_BANKS, density=0.08, rng=rng)
stats = degree_stats(topology)
print(f"banks {topology.n_banks}, edges {topology.n_edges}, "
      f"density {stats.density:.4f}")
print(f"out-degree: mean {stats.out_degree.mean():.2f} max {stats.out_degree.max()}")

weights = compute_weights(topology, lender_power=0.0, borrower_power=0.0,
                          loan_fraction=LOAN_FRACTION, total_external=TOTAL_EXTERNAL)
print(f"interbank total {weights.amounts.sum():.6f} "
      f"(= {LOAN_FRACTION}/{1 - LOAN_FRACTION} x external total)")
print(f"every edge carries {weights.amounts[0]:.6f} (equal powers -> equal loans)")

sheets = build_balance_sheets(weights, LOAN_FRACTION, CAPITAL_RATIO, TOTAL_EXTERNAL)
print("\nfirst five balance sheets (E external, I loans, B borrowings,")
print("C net worth, D deposits, A assets):")
print(f"{'bank':>4} {'E':>9} {'I':>9} {'B':>9} {'C':>9} {'D':>9} {'A':>9}")
for i in range(5):
    print(f"{i:>4} {sheets.external_assets[i]:>9.5f} {sheets.interbank_loans[i]:>9.5f} "
          f"{sheets.interbank_borrowings[i]:>9.5f} {sheets.net_worth[i]:>9.5f} "
          f"{sheets.deposits[i]:>9.5f} {sheets.assets[i]:>9.5f}")
print(f"\nvalidation: {validate(sheets)}")

print()
print("=" * 64)
print("2. Heterogeneous market: growth with preferential attachment")
print("=" * 64)
topology = gen_preferential_attachment(N_BANKS, density=0.08, rng=RngStream(7, 1))
stats = degree_stats(topology)
print(f"banks {topology.n_banks}, edges {topology.n_edges}, "
      f"density {stats.density:.4f}")
print(f"out-degree: median {np.median(stats.out_degree):.0f} "
      f"max {stats.out_degree.max()}  (a few banks dominate)")

weights = compute_weights(topology, lender_power=2.0, borrower_power=2.0,
                          loan_fraction=LOAN_FRACTION, total_external=TOTAL_EXTERNAL)
share = np.sort(weights.loans)[::-1][:4].sum() / weights.loans.sum()
print(f"top 4 lenders hold {share:.0%} of all interbank loans")

sheets = build_balance_sheets(weights, LOAN_FRACTION, CAPITAL_RATIO, TOTAL_EXTERNAL)
print(f"validation: {validate(sheets)}")
