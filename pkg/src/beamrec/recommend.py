"""Beam subset selection from predicted powers, plus comparison baselines.

The main recommender greedily picks the highest predicted power at the UE
position from the completed tensor, which for scalar scores equals the
top-N_tr set. Ties break toward the smaller (i, then j) index so results
are reproducible. The fingerprint baseline recommends the stored top beams
of the nearest observed position; exhaustive search returns the full
codebook.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class RecommendationSet:
    """Ordered candidate beams for one position.

    beams is a list of 1-based (i, j) pairs; predicted holds the scores the
    ordering was derived from (None for exhaustive search; for the
    fingerprint baseline the scores are non-increasing only within one
    source position, since padding appends farther positions' beams after
    nearer ones).
    """

    position: tuple
    beams: list
    source: str
    predicted: np.ndarray = None


def select_beams(t_hat, p, n_tr: int) -> RecommendationSet:
    """Top n_tr beams by predicted power at label p from a completed tensor.

    Greedy repeated argmax over the remaining beams, which for fixed scores
    equals sorting once and taking a prefix; sets for growing n_tr are
    therefore nested.
    """
    values = t_hat.values
    l_x, l_y = values.shape[0], values.shape[1]
    p_x, p_y = int(p[0]), int(p[1])
    if not (1 <= p_x <= l_x and 1 <= p_y <= l_y):
        raise ValueError(f"position {(p_x, p_y)} outside the label grid")
    if not (1 <= n_tr <= values.shape[2] * values.shape[3]):
        raise ValueError(f"n_tr must be in 1..|W|, got {n_tr}")
    plane = values[p_x - 1, p_y - 1]
    ii, jj = np.meshgrid(np.arange(1, plane.shape[0] + 1),
                         np.arange(1, plane.shape[1] + 1), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    flat = plane.ravel()
    order = np.lexsort((jj, ii, -flat))[:n_tr]
    beams = [(int(ii[k]), int(jj[k])) for k in order]
    return RecommendationSet((p_x, p_y), beams, "tensor-completion",
                             flat[order].copy())


def fingerprint_baseline(db, grid, p, n_tr: int) -> RecommendationSet:
    """Type-B fingerprint: top stored beams of the nearest observed position.

    Distance is Euclidean in label space with ties toward the smaller
    (p_x, p_y). If the nearest position has fewer than n_tr recorded beams,
    the next-nearest positions' best not-yet-chosen beams pad the list.
    """
    positions = db.positions()
    if not positions:
        raise ValueError("database is empty: no position to fingerprint from")
    p_x, p_y = int(p[0]), int(p[1])
    ranked = sorted(positions,
                    key=lambda q: ((q[0] - p_x) ** 2 + (q[1] - p_y) ** 2,
                                   q[0], q[1]))
    beams = []
    predicted = []
    chosen = set()
    for q in ranked:
        stored = db.beams_at(q)
        for (i, j) in sorted(stored, key=lambda b: (-stored[b], b[0], b[1])):
            if (i, j) in chosen:
                continue
            beams.append((i, j))
            predicted.append(stored[(i, j)])
            chosen.add((i, j))
            if len(beams) == n_tr:
                return RecommendationSet((p_x, p_y), beams, "fingerprint",
                                         np.array(predicted))
    return RecommendationSet((p_x, p_y), beams, "fingerprint",
                             np.array(predicted))


def exhaustive(c_theta: int, c_phi: int, p=None) -> RecommendationSet:
    """All |W| beams in index order (the sweep trains every one)."""
    beams = [(i, j) for i in range(1, c_theta + 1)
             for j in range(1, c_phi + 1)]
    return RecommendationSet(p if p is not None else (0, 0), beams,
                             "exhaustive", None)
