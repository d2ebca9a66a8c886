"""Two-stage tensor completion built on smooth matrix completion.

Stage 1 completes the beam matrix at every position that has at least one
observation, then marks the whole beam plane of that position as observed.
Stage 2 completes the position matrix of every beam, which after the
stage-1 mask promotion fully populates the tensor. Observed entries pass
through both stages bit-exactly.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .database import PowerTensor
from .smc import SmcParams, SmcProblem, smc_solve


@dataclass(frozen=True)
class CompletionConfig:
    """Per-stage solver parameters; beam-space and position-space smoothness
    are physically different scales so the stages are tuned independently.

    swap_stages runs the position stage first (ablation only; the beam-first
    order is the one with a correctness story). workers > 1 completes
    independent slices concurrently.
    """

    stage1: SmcParams = field(default_factory=SmcParams)
    stage2: SmcParams = field(default_factory=SmcParams)
    workers: int = 1
    swap_stages: bool = False


@dataclass(frozen=True)
class SliceDiagnostic:
    stage: int
    index: tuple  # (p_x, p_y) for stage 1, (i, j) for stage 2
    iterations: int
    final_gap: float
    converged: bool


@dataclass
class CompletedTensor:
    """Fully populated tensor with the stage-1 mask and per-slice records."""

    values: np.ndarray
    stage1_mask: np.ndarray
    domain_tag: str
    diagnostics: list = field(default_factory=list)


def _complete_slices(matrices, masks, params, workers):
    """Solve one SMC per (matrix, mask) pair, preserving input order."""
    def solve(pair):
        values, mask = pair
        return smc_solve(SmcProblem(values, mask, params))

    pairs = list(zip(matrices, masks))
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(solve, pairs))
    return [solve(p) for p in pairs]


def stage1(tensor: PowerTensor, cfg: CompletionConfig):
    """Complete the beam plane of every observed position.

    Returns the partially completed tensor and the promoted mask, which is
    True on the full beam plane of every position that had any observation.
    Positions with no observations are untouched.
    """
    if not tensor.mask.any():
        raise ValueError("tensor has no observed entries")
    values = tensor.values.copy()
    psi_prime = tensor.mask.copy()
    observed_positions = np.argwhere(tensor.mask.any(axis=(2, 3)))
    slices = [values[px, py] for px, py in observed_positions]
    masks = [tensor.mask[px, py] for px, py in observed_positions]
    solutions = _complete_slices(slices, masks, cfg.stage1, cfg.workers)
    diagnostics = []
    for (px, py), sol in zip(observed_positions, solutions):
        values[px, py] = sol.completed
        psi_prime[px, py] = True
        diagnostics.append(SliceDiagnostic(
            1, (int(px) + 1, int(py) + 1), sol.iterations, sol.final_gap,
            sol.converged,
        ))
    t_prime = PowerTensor(np.where(psi_prime, values, 0.0), psi_prime,
                          tensor.domain_tag)
    return t_prime, psi_prime, diagnostics


def stage2(t_prime: PowerTensor, psi_prime: np.ndarray,
           cfg: CompletionConfig) -> CompletedTensor:
    """Complete the position plane of every beam with any observation.

    After stage-1 promotion every beam shares the same observed-position
    set, so this stage fills the tensor completely. Beams with an empty
    observed set (impossible after promotion) are skipped with a
    diagnostic.
    """
    if not psi_prime.any():
        raise ValueError("promoted mask is empty")
    values = t_prime.values.copy()
    c_theta, c_phi = values.shape[2], values.shape[3]
    beams = [(i, j) for i in range(c_theta) for j in range(c_phi)
             if psi_prime[:, :, i, j].any()]
    slices = [values[:, :, i, j] for i, j in beams]
    masks = [psi_prime[:, :, i, j] for i, j in beams]
    solutions = _complete_slices(slices, masks, cfg.stage2, cfg.workers)
    diagnostics = []
    for (i, j), sol in zip(beams, solutions):
        values[:, :, i, j] = sol.completed
        diagnostics.append(SliceDiagnostic(
            2, (i + 1, j + 1), sol.iterations, sol.final_gap, sol.converged,
        ))
    skipped = [(i, j) for i in range(c_theta) for j in range(c_phi)
               if not psi_prime[:, :, i, j].any()]
    for i, j in skipped:
        diagnostics.append(SliceDiagnostic(2, (i + 1, j + 1), 0, np.inf, False))
    return CompletedTensor(values, psi_prime, t_prime.domain_tag, diagnostics)


def complete(tensor: PowerTensor, cfg: CompletionConfig = None
             ) -> CompletedTensor:
    """Run both stages; deterministic and exact on observed entries."""
    if cfg is None:
        cfg = CompletionConfig()
    if not cfg.swap_stages:
        t_prime, psi_prime, diag1 = stage1(tensor, cfg)
        result = stage2(t_prime, psi_prime, cfg)
        result.diagnostics = diag1 + result.diagnostics
        return result
    return _complete_position_first(tensor, cfg)


def _complete_position_first(tensor: PowerTensor,
                             cfg: CompletionConfig) -> CompletedTensor:
    """Ablation order: positions per beam first, then beams per position."""
    if not tensor.mask.any():
        raise ValueError("tensor has no observed entries")
    values = tensor.values.copy()
    psi_prime = tensor.mask.copy()
    c_theta, c_phi = values.shape[2], values.shape[3]
    beams = [(i, j) for i in range(c_theta) for j in range(c_phi)
             if tensor.mask[:, :, i, j].any()]
    solutions = _complete_slices(
        [values[:, :, i, j] for i, j in beams],
        [tensor.mask[:, :, i, j] for i, j in beams],
        cfg.stage1, cfg.workers)
    diagnostics = []
    for (i, j), sol in zip(beams, solutions):
        values[:, :, i, j] = sol.completed
        psi_prime[:, :, i, j] = True
        diagnostics.append(SliceDiagnostic(
            1, (i + 1, j + 1), sol.iterations, sol.final_gap, sol.converged))
    values = np.where(psi_prime, values, 0.0)
    positions = np.argwhere(psi_prime.any(axis=(2, 3)))
    solutions = _complete_slices(
        [values[px, py] for px, py in positions],
        [psi_prime[px, py] for px, py in positions],
        cfg.stage2, cfg.workers)
    for (px, py), sol in zip(positions, solutions):
        values[px, py] = sol.completed
        diagnostics.append(SliceDiagnostic(
            2, (int(px) + 1, int(py) + 1), sol.iterations, sol.final_gap,
            sol.converged))
    return CompletedTensor(values, psi_prime, tensor.domain_tag, diagnostics)
