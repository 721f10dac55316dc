"""Singular-value rank determination."""

from dataclasses import dataclass

import numpy as np

from . import config


@dataclass(frozen=True)
class RankResult:
    rank: int
    singular_values: np.ndarray
    gap: float
    certified: bool


def rank_by_gap(matrix, gap_threshold=config.RANK_GAP, rtol=config.RANK_RTOL) -> RankResult:
    """Rank read off the largest gap in the singular values.

    Candidate rank k has gap s_k / s_{k+1}.  Full rank counts as an infinite
    gap when the smallest singular value clears ``rtol * s_max`` and as no gap
    otherwise.  The winner is certified when its gap reaches ``gap_threshold``.
    """
    a = np.atleast_2d(np.asarray(matrix, dtype=config.COMPLEX))
    if a.size == 0:
        return RankResult(0, np.zeros(0), float("inf"), True)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return RankResult(0, s, float("inf"), True)
    with np.errstate(divide="ignore"):
        gaps = list(s[:-1] / s[1:])
    gaps.append(float("inf") if s[-1] > rtol * s[0] else 0.0)
    r = int(np.argmax(gaps)) + 1
    gap = float(gaps[r - 1])
    return RankResult(r, s, gap, gap >= gap_threshold)


def numerical_rank(matrix, rtol=config.RANK_RTOL) -> int:
    return rank_by_gap(matrix, rtol=rtol).rank
