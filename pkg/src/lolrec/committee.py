"""Committees of local linear experts and their voting functions."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .regression import DEFAULT_RIDGE, ExpertSpec

MODE_BIN_WIDTH = 0.01
# 1.01 / 0.01 evaluates to 100.999..., which would drop exact bin edges one bin low
_BIN_SLACK = 1e-9


class Voting(str, enum.Enum):
    AVERAGE = "average"
    MEDIAN = "median"
    MODE = "mode"


@dataclass(frozen=True)
class CommitteeSpec:
    K: tuple[int, ...]
    W: tuple[int, ...]
    voting: Voting = Voting.AVERAGE
    ridge: float = DEFAULT_RIDGE

    def __post_init__(self):
        K = tuple(sorted(set(int(k) for k in self.K)))
        W = tuple(sorted(set(int(w) for w in self.W)))
        if not K or not W:
            raise ValueError("a committee needs at least one k and one w")
        if K[0] < 1 or W[0] < 1:
            raise ValueError("k and w values must be positive")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "voting", Voting(self.voting))

    @property
    def size(self) -> int:
        return len(self.K) * len(self.W)

    @property
    def max_window(self) -> int:
        return self.W[-1]

    def experts(self) -> list[ExpertSpec]:
        """Member experts, ordered by ``w`` then ``k``."""
        return [ExpertSpec(k, w, self.ridge) for w, k in itertools.product(self.W, self.K)]


@dataclass(frozen=True)
class CommitteeState:
    wealth: float = 1.0
    asset: Optional[str] = None


def mode_vote(estimates, bin_width: float = MODE_BIN_WIDTH) -> float:
    """Midpoint of the most populated fixed-width bin.

    Bins are ``[j * bin_width, (j + 1) * bin_width)``. Ties go to the bin whose
    midpoint is nearest the median, then to the lower bin.
    """
    e = np.asarray(estimates, dtype=float)
    idx = np.floor(e / bin_width + _BIN_SLACK).astype(np.int64)
    bins, counts = np.unique(idx, return_counts=True)
    best = bins[counts == counts.max()]
    if len(best) == 1:
        return (best[0] + 0.5) * bin_width
    mids = (best + 0.5) * bin_width
    gap = np.abs(mids - float(np.median(e)))
    # distances equal up to rounding count as a tie; mids are ascending, so take the first
    return float(mids[np.flatnonzero(gap <= gap.min() + 1e-12)[0]])


def vote(estimates, voting) -> float:
    e = np.asarray(estimates, dtype=float)
    if e.size == 0:
        raise ValueError("cannot vote on an empty list of estimates")
    if not np.all(np.isfinite(e)):
        raise ValueError("estimates must be finite")
    voting = Voting(voting)
    if voting is Voting.AVERAGE:
        return float(e.mean())
    if voting is Voting.MEDIAN:
        return float(np.median(e))
    return float(mode_vote(e))


def vote_rows(panel: np.ndarray, voting) -> np.ndarray:
    """Vote along each row of an estimate panel; rows containing NaN give NaN."""
    out = np.full(panel.shape[0], np.nan)
    ok = ~np.isnan(panel).any(axis=1)
    for i in np.flatnonzero(ok):
        out[i] = vote(panel[i], voting)
    return out


def invests(voted_estimate) -> bool:
    """The committee holds its asset only when it predicts growth."""
    return voted_estimate is not None and not math.isnan(voted_estimate) and voted_estimate > 1.0


def update_committee_wealth(state: CommitteeState, voted_estimate, realized_relative: float) -> CommitteeState:
    if realized_relative < 0:
        raise ValueError("price relatives are non-negative")
    if invests(voted_estimate):
        return replace(state, wealth=state.wealth * realized_relative)
    return state


def committee_wealth_path(voted: np.ndarray, relatives: np.ndarray) -> np.ndarray:
    """Committee wealth before each period and after the last, ``len + 1`` values.

    ``voted`` may hold NaN for warm-up periods, which count as cash.
    """
    state = CommitteeState()
    path = [state.wealth]
    for v, x in zip(voted, relatives):
        state = update_committee_wealth(state, float(v), float(x))
        path.append(state.wealth)
    return np.array(path)
