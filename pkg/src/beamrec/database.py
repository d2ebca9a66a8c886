"""Measurement database: position labels, online means, tensor export.

Positions are labeled on a uniform grid of resolution delta_s; each
(position, beam) key stores a running mean of the recorded powers plus the
observation count needed to keep updating it online. The database exports
a 4th-order (l_x, l_y, c_theta, c_phi) tensor with its observation mask;
unobserved entries are zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .scene import reference_coordinates
from .upa import beam_powers

DB_FLOOR_W = 1e-15  # -120 dBm; keeps the dB transform finite


@dataclass(frozen=True)
class GridSpec:
    """Label grid: origin, resolution, and label counts per axis."""

    delta_s: float
    l_x: int
    l_y: int
    x0: float
    y0: float

    def __post_init__(self):
        if self.delta_s <= 0:
            raise ValueError("delta_s must be > 0")
        if self.l_x < 1 or self.l_y < 1:
            raise ValueError("label counts must be >= 1")

    @property
    def n_labels(self) -> int:
        return self.l_x * self.l_y

    def all_labels(self):
        """All (p_x, p_y) labels in row-major order."""
        return [(px, py) for px in range(1, self.l_x + 1)
                for py in range(1, self.l_y + 1)]


def grid_from_area(area, delta_s: float) -> GridSpec:
    """Size the grid so the far corner's label is the last one.

    The label formula 1 + round((g - g0)/delta_s) maps g_end to
    1 + round(extent/delta_s), so that is the label count (the full-scale
    50 m extent at 5 m resolution gives 11 labels per axis).
    """
    l_x = 1 + round_half_up((area.x_end - area.x0) / delta_s)
    l_y = 1 + round_half_up((area.y_end - area.y0) / delta_s)
    return GridSpec(delta_s, l_x, l_y, area.x0, area.y0)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def position_label(grid: GridSpec, g):
    """Label (p_x, p_y) of coordinate g: nearest grid point, half rounds up.

    Labels are clamped to the grid; a coordinate farther than half a cell
    beyond the outermost label centers is rejected as outside the area.
    """
    gx, gy = float(g[0]), float(g[1])
    raw_x = 1 + round_half_up((gx - grid.x0) / grid.delta_s)
    raw_y = 1 + round_half_up((gy - grid.y0) / grid.delta_s)
    if not (1 <= raw_x <= grid.l_x and 1 <= raw_y <= grid.l_y):
        raise ValueError(f"coordinate {(gx, gy)} outside the label grid")
    return raw_x, raw_y


class MeasurementDatabase:
    """Running-mean received power per (p_x, p_y, i, j) key."""

    def __init__(self):
        self._records = {}  # (p_x, p_y, i, j) -> [mean_power, n_obs]

    def __len__(self) -> int:
        return len(self._records)

    def record(self, p, beam, power: float) -> None:
        """Fold one measurement into the key's online mean."""
        power = float(power)
        if power < 0:
            raise ValueError(f"power must be >= 0, got {power}")
        key = (int(p[0]), int(p[1]), int(beam[0]), int(beam[1]))
        entry = self._records.get(key)
        if entry is None:
            self._records[key] = [float(power), 1]
        else:
            n = entry[1] + 1
            entry[0] = (n - 1) / n * entry[0] + power / n
            entry[1] = n

    def mean(self, p, beam) -> float:
        return self._records[(p[0], p[1], beam[0], beam[1])][0]

    def n_obs(self, p, beam) -> int:
        return self._records[(p[0], p[1], beam[0], beam[1])][1]

    def positions(self):
        """Distinct observed (p_x, p_y) labels, sorted."""
        return sorted({(k[0], k[1]) for k in self._records})

    def beams_at(self, p):
        """Beams observed at label p as {(i, j): mean_power}."""
        return {(k[2], k[3]): v[0] for k, v in self._records.items()
                if (k[0], k[1]) == (p[0], p[1])}

    def items(self):
        return ((k, v[0], v[1]) for k, v in sorted(self._records.items()))

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["p_x", "p_y", "i", "j", "mean_power", "n_obs"])
            for key, mean_power, n_obs in self.items():
                writer.writerow(list(key) + [repr(float(mean_power)), n_obs])

    @classmethod
    def load_csv(cls, path) -> "MeasurementDatabase":
        db = cls()
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                key = (int(row["p_x"]), int(row["p_y"]),
                       int(row["i"]), int(row["j"]))
                db._records[key] = [float(row["mean_power"]),
                                    int(row["n_obs"])]
        return db


@dataclass
class PowerTensor:
    """(l_x, l_y, c_theta, c_phi) values with observation mask.

    domain_tag is 'linear-watts' or 'dB'; unmasked entries are exactly 0.
    """

    values: np.ndarray
    mask: np.ndarray
    domain_tag: str = "linear-watts"

    def __post_init__(self):
        if self.values.shape != self.mask.shape:
            raise ValueError("values and mask shapes differ")
        if self.domain_tag not in ("linear-watts", "dB"):
            raise ValueError(f"unknown domain_tag {self.domain_tag!r}")


def sample_observed_positions(grid: GridSpec, k_op: float, seed: int):
    """Uniformly sample round(k_op * n_labels) distinct labels.

    Implemented as a prefix of one seeded permutation of all labels, so for
    a fixed seed the sampled sets are nested across k_op values.
    """
    if not (0 < k_op <= 1):
        raise ValueError(f"k_op must be in (0, 1], got {k_op}")
    count = round_half_up(k_op * grid.n_labels)
    rng = np.random.default_rng(seed)
    order = rng.permutation(grid.n_labels)[:count]
    return {(int(k) // grid.l_y + 1, int(k) % grid.l_y + 1) for k in order}


def ingest_survey(db: MeasurementDatabase, scene, area, codebook,
                  grid: GridSpec, observed_positions, top_fraction: float,
                  p_t: float, noise_var: float = 0.0, seed: int = 0
                  ) -> MeasurementDatabase:
    """Survey every reference coordinate whose label is observed.

    At each such coordinate all codebook beams are measured and only the
    top ceil(top_fraction * |W|) by measured power are recorded; reference
    coordinates sharing a label accumulate into the same running means.
    """
    from .scene import assemble_channel, channel_at

    if not (0 < top_fraction <= 1):
        raise ValueError(f"top_fraction must be in (0, 1], got {top_fraction}")
    keep = math.ceil(top_fraction * codebook.size)
    rng = np.random.default_rng(seed) if noise_var > 0 else None
    ii, jj = np.meshgrid(np.arange(1, codebook.c_theta + 1),
                         np.arange(1, codebook.c_phi + 1), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    for g in reference_coordinates(area):
        label = position_label(grid, g)
        if label not in observed_positions:
            continue
        h = assemble_channel(channel_at(scene, area, g), codebook.geometry)
        powers = beam_powers(codebook, h, p_t, noise_var, rng).ravel()
        top = np.lexsort((jj, ii, -powers))[:keep]
        for k in top:
            db.record(label, (ii[k], jj[k]), powers[k])
    return db


def to_tensor(db: MeasurementDatabase, grid: GridSpec, codebook,
              domain_tag: str = "linear-watts") -> PowerTensor:
    """Export the database as a zero-filled tensor with observation mask.

    In the dB domain observed means map through 10*log10(max(r, floor))
    with a -120 dBm floor; unobserved cells stay exactly 0 with mask False.
    """
    shape = (grid.l_x, grid.l_y, codebook.c_theta, codebook.c_phi)
    values = np.zeros(shape)
    mask = np.zeros(shape, dtype=bool)
    for (p_x, p_y, i, j), mean_power, _ in db.items():
        v = mean_power
        if domain_tag == "dB":
            v = 10.0 * math.log10(max(v, DB_FLOOR_W))
        values[p_x - 1, p_y - 1, i - 1, j - 1] = v
        mask[p_x - 1, p_y - 1, i - 1, j - 1] = True
    return PowerTensor(values, mask, domain_tag)


def save_tensor_csv(tensor: PowerTensor, path, extra_mask=None,
                    extra_name="observed") -> None:
    """Flat per-cell CSV (p_x, p_y, i, j, value, observed) for debugging.

    When extra_mask is given it is written instead of the tensor's own mask
    (used to tag predicted vs originally observed cells).
    """
    mask = tensor.mask if extra_mask is None else extra_mask
    unit = "value_dB" if tensor.domain_tag == "dB" else "value_w"
    l_x, l_y, c_theta, c_phi = tensor.values.shape
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p_x", "p_y", "i", "j", unit, extra_name])
        for px in range(l_x):
            for py in range(l_y):
                for i in range(c_theta):
                    for j in range(c_phi):
                        writer.writerow([
                            px + 1, py + 1, i + 1, j + 1,
                            repr(float(tensor.values[px, py, i, j])),
                            str(bool(mask[px, py, i, j])).lower(),
                        ])


def load_tensor_csv(path, domain_tag: str = "dB") -> PowerTensor:
    """Inverse of save_tensor_csv; the mask column marks observed cells."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        for row in reader:
            rows.append(row)
    l_x = max(int(r[0]) for r in rows)
    l_y = max(int(r[1]) for r in rows)
    c_theta = max(int(r[2]) for r in rows)
    c_phi = max(int(r[3]) for r in rows)
    values = np.zeros((l_x, l_y, c_theta, c_phi))
    mask = np.zeros((l_x, l_y, c_theta, c_phi), dtype=bool)
    for r in rows:
        px, py, i, j = int(r[0]) - 1, int(r[1]) - 1, int(r[2]) - 1, int(r[3]) - 1
        values[px, py, i, j] = float(r[4])
        mask[px, py, i, j] = r[5] == "true"
    return PowerTensor(values, mask, domain_tag)
