"""Uniform planar array codebook: steering vectors and received power.

The receive codebook is the set of array response vectors at uniformly
quantized elevation/azimuth pairs in [-pi/2, pi/2). Element phases follow
the Kronecker layout (y-axis factor kron x-axis factor), so element
r = y * n_x + x carries phase y*Omega_y + x*Omega_x.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna counts along x and y, spacing in wavelengths (default half)."""

    n_x: int
    n_y: int
    spacing: float = 0.5

    def __post_init__(self):
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError(
                f"antenna counts must be >= 1, got ({self.n_x}, {self.n_y})"
            )
        if self.spacing <= 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")

    @property
    def n_r(self) -> int:
        return self.n_x * self.n_y


def quantized_angles(c_theta: int, c_phi: int):
    """Uniform angle grids over [-pi/2, pi/2).

    theta_i = -pi/2 + (i-1) * pi / c_theta for i = 1..c_theta, and the same
    for phi with c_phi points. Both arrays are ascending.
    """
    if c_theta < 1 or c_phi < 1:
        raise ValueError(
            f"grid sizes must be >= 1, got ({c_theta}, {c_phi})"
        )
    theta = -np.pi / 2 + np.arange(c_theta) * (np.pi / c_theta)
    phi = -np.pi / 2 + np.arange(c_phi) * (np.pi / c_phi)
    return theta, phi


def steering_vector(geometry: ArrayGeometry, theta: float,
                    phi: float) -> np.ndarray:
    """Unit-norm array response toward elevation theta, azimuth phi.

    Omega_x = 2*pi*spacing*sin(theta)*cos(phi) and Omega_y with sin(phi);
    at half-wavelength spacing these are pi*sin(theta)*{cos,sin}(phi).
    """
    omega_x = 2 * np.pi * geometry.spacing * np.sin(theta) * np.cos(phi)
    omega_y = 2 * np.pi * geometry.spacing * np.sin(theta) * np.sin(phi)
    ax = np.exp(1j * omega_x * np.arange(geometry.n_x))
    ay = np.exp(1j * omega_y * np.arange(geometry.n_y))
    return np.kron(ay, ax) / np.sqrt(geometry.n_r)


@dataclass
class Codebook:
    """Indexed set of steering vectors over the quantized angle grid.

    Beam indices are 1-based: (i, j) with 1 <= i <= c_theta and
    1 <= j <= c_phi, matching the measurement records and CSV artifacts.
    matrix stacks the vectors in row-major (i-major) beam order.
    """

    c_theta: int
    c_phi: int
    geometry: ArrayGeometry
    vectors: np.ndarray  # (c_theta, c_phi, n_r) complex
    thetas: np.ndarray = field(repr=False, default=None)
    phis: np.ndarray = field(repr=False, default=None)

    @property
    def size(self) -> int:
        return self.c_theta * self.c_phi

    @property
    def matrix(self) -> np.ndarray:
        """(size, n_r) view, beam (i, j) at row (i-1)*c_phi + (j-1)."""
        return self.vectors.reshape(self.size, -1)

    def vector(self, i: int, j: int) -> np.ndarray:
        if not (1 <= i <= self.c_theta and 1 <= j <= self.c_phi):
            raise ValueError(f"beam index ({i}, {j}) outside codebook grid")
        return self.vectors[i - 1, j - 1]

    def beam_indices(self):
        """All (i, j) pairs in row-major order."""
        return [(i, j) for i in range(1, self.c_theta + 1)
                for j in range(1, self.c_phi + 1)]


def build_codebook(geometry: ArrayGeometry, c_theta: int,
                   c_phi: int) -> Codebook:
    """Evaluate the steering vector at every quantized angle pair."""
    thetas, phis = quantized_angles(c_theta, c_phi)
    vectors = np.empty((c_theta, c_phi, geometry.n_r), dtype=complex)
    for a, theta in enumerate(thetas):
        for b, phi in enumerate(phis):
            vectors[a, b] = steering_vector(geometry, theta, phi)
    return Codebook(c_theta, c_phi, geometry, vectors, thetas, phis)


def received_power(w: np.ndarray, h: np.ndarray, p_t: float,
                   noise_var: float = 0.0, rng=None) -> float:
    """Measured power |sqrt(p_t) w^H h + v|^2 for one beam.

    v is zero-mean complex Gaussian with variance noise_var, drawn from the
    generator passed in (required when noise_var > 0; there is no hidden
    RNG state). With noise_var = 0 the value is exactly p_t * |w^H h|^2.
    """
    w = np.asarray(w)
    h = np.asarray(h)
    if w.shape != h.shape:
        raise ValueError(
            f"beam shape {w.shape} does not match channel shape {h.shape}"
        )
    signal = np.sqrt(p_t) * np.vdot(w, h)
    if noise_var > 0:
        if rng is None:
            raise ValueError("noise_var > 0 requires an explicit generator")
        scale = np.sqrt(noise_var / 2.0)
        signal = signal + scale * (rng.standard_normal()
                                   + 1j * rng.standard_normal())
    return float(np.abs(signal) ** 2)


def beam_powers(codebook: Codebook, h: np.ndarray, p_t: float,
                noise_var: float = 0.0, rng=None) -> np.ndarray:
    """Received power for every codebook beam, shape (c_theta, c_phi).

    Noise draws, when enabled, are consumed in row-major beam order so a
    fixed generator state reproduces the same measurements.
    """
    signal = np.sqrt(p_t) * (codebook.matrix.conj() @ np.asarray(h))
    if noise_var > 0:
        if rng is None:
            raise ValueError("noise_var > 0 requires an explicit generator")
        scale = np.sqrt(noise_var / 2.0)
        signal = signal + scale * (rng.standard_normal(codebook.size)
                                   + 1j * rng.standard_normal(codebook.size))
    return (np.abs(signal) ** 2).reshape(codebook.c_theta, codebook.c_phi)
