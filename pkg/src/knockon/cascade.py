"""Knock-on default propagation through a credit network.

A shock of a bank's full external asset value strikes one bank. In each
synchronous round, every live bank whose accumulated distress reaches its
net worth defaults; each new defaulter with outstanding borrowings then
sends distress to its creditors pro rata to their exposures. Shares aimed
at creditors that have already defaulted (including same-round defaulters)
are discarded, not redistributed. Rounds repeat until one produces no new
default. Each bank defaults at most once, so termination is guaranteed.

Two rules size the transmitted total for a defaulter with residual distress
``S - C`` and borrowings ``B``:

* ``CAPPED``: ``min(S - C, B)``. Creditors lose at most what they lent,
  i.e. zero recovery on exposures, never more.
* ``AMPLIFIED``: ``max(S - C, B)``. Creditors lose at least their full
  exposure; residuals beyond B are passed through undiminished, a
  deliberately pessimistic stress variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .balance import BalanceSheetSet, WeightMatrix
from .errors import InvalidParameterError


class LossRule(str, Enum):
    """How much distress a defaulted bank passes to its creditors."""

    AMPLIFIED = "amplified"
    CAPPED = "capped"


@dataclass
class ShockState:
    """Mutable working state of one cascade: accumulated distress per bank,
    default flags, the number of rounds already executed, and the bank the
    shock originally struck."""

    distress: np.ndarray
    defaulted: np.ndarray
    round: int = 0
    initial_bank: int = 0


@dataclass(frozen=True)
class DefaultEvent:
    bank: int
    round: int
    distress: float
    transmitted: float


@dataclass(frozen=True)
class CascadeResult:
    """Outcome of one :func:`propagate` call.

    ``n_defaults`` counts every bank defaulted during the call, the
    initially shocked bank included; it is 0 when the initial bank absorbs
    the shock. ``total_loss_transmitted`` sums the distress actually
    delivered to live creditors (discarded shares excluded).
    """

    initial_bank: int
    n_defaults: int
    rounds: int
    total_loss_transmitted: float
    defaults: tuple[DefaultEvent, ...]

    @property
    def default_set(self) -> tuple[tuple[int, int], ...]:
        return tuple((e.bank, e.round) for e in self.defaults)


def initial_shock(sheets: BalanceSheetSet, bank: int) -> ShockState:
    """Strike ``bank`` with its full external asset value (any surcharge
    increment included, since the surcharge is booked as external assets)."""
    n = sheets.n_banks
    if not 0 <= int(bank) < n:
        raise InvalidParameterError(f"bank index {bank} out of range 0..{n - 1}")
    distress = np.zeros(n)
    distress[int(bank)] = float(sheets.external_assets[int(bank)])
    return ShockState(
        distress=distress,
        defaulted=np.zeros(n, dtype=bool),
        round=0,
        initial_bank=int(bank),
    )


def transmit_shares(weights: WeightMatrix, debtor: int, residual: float) -> dict[int, float]:
    """Pro-rata split of ``residual`` across the debtor's creditors.

    Creditor j receives ``amount(j, debtor) / borrowings(debtor) * residual``.
    Returns an empty mapping when the debtor has no borrowings.
    """
    if residual < 0.0:
        raise InvalidParameterError(f"residual must be non-negative, got {residual}")
    total = float(weights.borrowings[debtor])
    if total == 0.0:
        return {}
    creditors, amounts = weights.creditors_of(debtor)
    return {
        int(c): float(a) / total * residual for c, a in zip(creditors, amounts)
    }


def propagate(
    sheets: BalanceSheetSet,
    weights: WeightMatrix,
    state: ShockState,
    rule: LossRule = LossRule.AMPLIFIED,
) -> CascadeResult:
    """Run the cascade to quiescence, advancing ``state`` in place.

    A live bank defaults when its net worth no longer strictly exceeds its
    accumulated distress. Calling propagate again on the final state yields
    zero further defaults.
    """
    rule = LossRule(rule)
    worth = sheets.net_worth
    distress = state.distress
    defaulted = state.defaulted
    borrowings = weights.borrowings

    events: list[DefaultEvent] = []
    total_sent = 0.0
    rounds_run = 0

    while True:
        hit = np.flatnonzero(~defaulted & (worth <= distress))
        if hit.size == 0:
            break
        rounds_run += 1
        state.round += 1
        defaulted[hit] = True
        for d in hit:
            at_default = float(distress[d])
            owed = float(borrowings[d])
            delivered = 0.0
            if owed > 0.0:
                residual = at_default - float(worth[d])
                if rule is LossRule.AMPLIFIED:
                    outgoing = max(residual, owed)
                else:
                    outgoing = min(residual, owed)
                creditors, amounts = weights.creditors_of(int(d))
                live = ~defaulted[creditors]
                if np.any(live):
                    shares = amounts[live] / owed * outgoing
                    distress[creditors[live]] += shares
                    delivered = float(shares.sum())
            total_sent += delivered
            events.append(
                DefaultEvent(
                    bank=int(d), round=state.round,
                    distress=at_default, transmitted=delivered,
                )
            )

    return CascadeResult(
        initial_bank=state.initial_bank,
        n_defaults=len(events),
        rounds=rounds_run,
        total_loss_transmitted=total_sent,
        defaults=tuple(events),
    )
