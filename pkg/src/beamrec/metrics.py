"""Alignment and throughput metrics.

Power loss probability is the fraction of evaluated coordinates whose true
best beam is missing from the recommended set; the frame split between
training and data transmission converts rates into average throughput.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scene import SPEED_OF_LIGHT


@dataclass(frozen=True)
class LinkBudget:
    """Bandwidth, carrier, noise density, efficiency, and link distance."""

    bandwidth_hz: float = 1.76e9
    carrier_hz: float = 58.68e9
    noise_psd_dbm_hz: float = -174.0
    antenna_efficiency: float = 1.0
    distance_m: float = 30.0

    def __post_init__(self):
        if min(self.bandwidth_hz, self.carrier_hz, self.distance_m) <= 0:
            raise ValueError("bandwidth, carrier and distance must be > 0")
        if not (0 < self.antenna_efficiency <= 1):
            raise ValueError("antenna_efficiency must be in (0, 1]")


@dataclass(frozen=True)
class FrameTiming:
    """Microslot length and total frame length in seconds."""

    microslot_s: float = 10e-6
    frame_s: float = 5e-3

    def __post_init__(self):
        if self.microslot_s <= 0 or self.frame_s <= 0:
            raise ValueError("durations must be > 0")


def snr_scale(budget: LinkBudget) -> float:
    """SNR scaling factor: wavelength^2 * efficiency / (8 pi d^2 N0 B)."""
    lam = SPEED_OF_LIGHT / budget.carrier_hz
    n0_w = 10.0 ** ((budget.noise_psd_dbm_hz - 30.0) / 10.0)
    return (lam ** 2 * budget.antenna_efficiency
            / (8.0 * math.pi * budget.distance_m ** 2
               * n0_w * budget.bandwidth_hz))


def best_beam(powers: np.ndarray):
    """1-based argmax beam of a (c_theta, c_phi) power plane.

    Ties resolve to the lexicographically smallest (i, j), matching the
    recommender's tie-break so a tie can never count as misalignment.
    """
    flat = int(np.argmax(powers))  # first maximum in row-major order
    i, j = divmod(flat, powers.shape[1])
    return i + 1, j + 1


def power_loss_probability(truth, recs, eval_coords) -> float:
    """1 - P(true best beam is in the recommended set), over eval_coords.

    truth maps each coordinate to its noiseless (c_theta, c_phi) power
    plane over the full codebook; recs maps each coordinate to its
    RecommendationSet.
    """
    coords = list(eval_coords)
    if not coords:
        raise ValueError("empty evaluation set: power loss undefined")
    hits = 0
    for g in coords:
        if best_beam(truth[g]) in set(recs[g].beams):
            hits += 1
    return 1.0 - hits / len(coords)


def spectral_efficiency(budget: LinkBudget, timing: FrameTiming, p_t: float,
                        w: np.ndarray, h: np.ndarray, n_tr: int):
    """Rate, average throughput, and the data fraction of the frame.

    R = B log2(1 + eta P_t |w^H h|^2); training n_tr beams costs
    n_tr * microslot out of the frame, so throughput is R * f_comm with
    f_comm = (frame - training) / frame.
    """
    t_train = n_tr * timing.microslot_s
    if t_train > timing.frame_s:
        raise ValueError(
            f"training time {t_train} exceeds frame {timing.frame_s}"
        )
    gain = float(np.abs(np.vdot(w, h)) ** 2)
    rate = budget.bandwidth_hz * math.log2(1.0 + snr_scale(budget) * p_t * gain)
    f_comm = (timing.frame_s - t_train) / timing.frame_s
    return rate, rate * f_comm, f_comm
