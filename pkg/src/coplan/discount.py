"""Discount factors for epoch-weighted operating costs and investment costs."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:  # pragma: no cover
    from .scenario import EpochSpec


def discount_sum(r: float, first_year: int, last_year: int) -> float:
    """Return ``sum((1 + r) ** -t for t in first_year..last_year)`` (inclusive)."""
    if r < 0:
        raise ValueError(f"discount rate must be >= 0, got {r}")
    if last_year < first_year:
        return 0.0
    base = 1.0 + r
    return sum(base ** -t for t in range(first_year, last_year + 1))


def epoch_weight(r: float, epoch: "EpochSpec") -> float:
    """Weight applied to the operating year of ``epoch``.

    The single modeled year stands in for every year of the epoch, so its
    costs are scaled by the discount factors summed over those years.
    """
    return discount_sum(r, epoch.start_year_offset, epoch.operating_year_offset)


def discounted_investment_cost(
    annualized_cost: float, epoch: "EpochSpec", horizon_end: int, r: float
) -> float:
    """Present value of paying ``annualized_cost`` every year from the epoch's
    investment year through ``horizon_end`` (inclusive)."""
    if annualized_cost < 0:
        raise ValueError("annualized cost must be >= 0")
    if epoch.start_year_offset > horizon_end:
        raise ValueError("epoch starts after the planning horizon")
    return annualized_cost * discount_sum(r, epoch.start_year_offset, horizon_end)


def annualize(overnight_cost: float, crf: float) -> float:
    """Annualized capital cost from an overnight cost and a capital recovery factor."""
    return overnight_cost * crf
