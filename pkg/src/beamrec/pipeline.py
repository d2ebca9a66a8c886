"""End-to-end experiment pipeline and its file artifacts.

Stages communicate through files in the output directory so each one can
be rerun on its own: scene-gen writes the scene, survey the measurement
CSVs (one per observed-position ratio), complete the completed tensors,
recommend the per-position beam lists, evaluate the result CSVs, and plot
the figures. Running the full pipeline under fixed seeds twice produces
byte-identical CSVs.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .completion import CompletionConfig, complete
from .config import ConfigError, ExperimentConfig
from .database import (MeasurementDatabase, PowerTensor, grid_from_area,
                       ingest_survey, load_tensor_csv, position_label,
                       round_half_up, sample_observed_positions,
                       save_tensor_csv, to_tensor)
from .metrics import (LinkBudget, best_beam, power_loss_probability,
                      spectral_efficiency)
from .recommend import exhaustive, fingerprint_baseline, select_beams
from .scene import (assemble_channel, channel_at, generate_scene, load_scene,
                    reference_coordinates, save_scene)
from .upa import build_codebook

METHOD_TC = "tensor-completion"
METHOD_FP = "fingerprint"
METHOD_EX = "exhaustive"


class StageError(RuntimeError):
    """Failure inside a named pipeline stage."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _kop_tag(k_op: float) -> str:
    return f"kop{round_half_up(100 * k_op):02d}"


def scene_path(out_dir) -> Path:
    return Path(out_dir) / "scene.txt"


def measurements_path(out_dir, k_op) -> Path:
    return Path(out_dir) / f"measurements_{_kop_tag(k_op)}.csv"


def completed_path(out_dir, k_op) -> Path:
    return Path(out_dir) / f"completed_{_kop_tag(k_op)}.csv"


def recommendations_path(out_dir, k_op) -> Path:
    return Path(out_dir) / f"recommendations_{_kop_tag(k_op)}.csv"


def results_ppl_path(out_dir) -> Path:
    return Path(out_dir) / "results_ppl.csv"


def results_se_path(out_dir) -> Path:
    return Path(out_dir) / "results_se.csv"


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise FileNotFoundError(
            f"missing required artifact {path}; run the {producer} stage first"
        )
    return path


def _codebook(cfg: ExperimentConfig):
    return build_codebook(cfg.geometry, cfg.c_theta, cfg.c_phi)


def _grid(cfg: ExperimentConfig):
    return grid_from_area(cfg.area, cfg.delta_s)


class _Cleanup:
    """Collects files written by a stage; deletes them if the stage fails."""

    def __init__(self):
        self.paths = []

    def add(self, path: Path) -> Path:
        self.paths.append(Path(path))
        return path

    def discard_all(self):
        for p in self.paths:
            try:
                p.unlink()
            except FileNotFoundError:
                pass


def stage_scene_gen(cfg: ExperimentConfig, out_dir) -> list:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sc = cfg.scene
    scene = generate_scene(
        cfg.area, sc.n_clusters, sc.n_paths, sc.seed,
        include_los=sc.include_los,
        spread_range=(sc.spread_min_m, sc.spread_max_m),
        gain_range_db=(sc.gain_min_db, sc.gain_max_db),
        shadowing_corr_m=sc.shadowing_corr_m,
        shadow_sigma_db=sc.shadow_sigma_db,
        wavelength_m=sc.wavelength_m,
        min_separation_deg=sc.min_separation_deg,
    )
    path = scene_path(out_dir)
    save_scene(scene, path)
    return [path]


def stage_survey(cfg: ExperimentConfig, out_dir) -> list:
    out_dir = Path(out_dir)
    scene = load_scene(_require(scene_path(out_dir), "scene-gen"))
    codebook = _codebook(cfg)
    grid = _grid(cfg)
    cleanup = _Cleanup()
    try:
        for k_op in cfg.survey.k_ops:
            observed = sample_observed_positions(grid, k_op, cfg.survey.seed)
            db = MeasurementDatabase()
            ingest_survey(db, scene, cfg.area, codebook, grid, observed,
                          cfg.survey.top_fraction, cfg.survey.p_t_w,
                          cfg.survey.noise_var_w, cfg.survey.seed)
            path = cleanup.add(measurements_path(out_dir, k_op))
            db.save_csv(path)
    except Exception:
        cleanup.discard_all()
        raise
    return cleanup.paths


def stage_complete(cfg: ExperimentConfig, out_dir) -> list:
    out_dir = Path(out_dir)
    codebook = _codebook(cfg)
    grid = _grid(cfg)
    completion_cfg = CompletionConfig(stage1=cfg.smc_stage1,
                                      stage2=cfg.smc_stage2,
                                      workers=cfg.workers)
    cleanup = _Cleanup()
    try:
        for k_op in cfg.survey.k_ops:
            db = MeasurementDatabase.load_csv(
                _require(measurements_path(out_dir, k_op), "survey"))
            tensor = to_tensor(db, grid, codebook, "dB")
            completed = complete(tensor, completion_cfg)
            path = cleanup.add(completed_path(out_dir, k_op))
            save_tensor_csv(
                PowerTensor(completed.values, tensor.mask, "dB"), path)
    except Exception:
        cleanup.discard_all()
        raise
    return cleanup.paths


def stage_recommend(cfg: ExperimentConfig, out_dir) -> list:
    out_dir = Path(out_dir)
    grid = _grid(cfg)
    cleanup = _Cleanup()
    try:
        for k_op in cfg.survey.k_ops:
            completed = load_tensor_csv(
                _require(completed_path(out_dir, k_op), "complete"), "dB")
            path = cleanup.add(recommendations_path(out_dir, k_op))
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["p_x", "p_y", "rank", "i", "j",
                                 "predicted_dB", "source"])
                for label in grid.all_labels():
                    rec = select_beams(completed, label, cfg.recommend_n_tr)
                    for rank, ((i, j), value) in enumerate(
                            zip(rec.beams, rec.predicted), start=1):
                        writer.writerow([label[0], label[1], rank, i, j,
                                         repr(float(value)), rec.source])
    except Exception:
        cleanup.discard_all()
        raise
    return cleanup.paths


def _truth_planes(cfg: ExperimentConfig, scene, codebook):
    """Noiseless unit-power beam gains |w^H h|^2 at every reference
    coordinate, plus the channels and BS distances keyed by coordinate."""
    refs = reference_coordinates(cfg.area)
    w_mat = codebook.matrix
    truth = {}
    channels = {}
    distances = {}
    bs = np.asarray(cfg.area.bs_position)
    for g in refs:
        key = (float(g[0]), float(g[1]))
        h = assemble_channel(channel_at(scene, cfg.area, g),
                             codebook.geometry)
        powers = np.abs(w_mat.conj() @ h) ** 2
        truth[key] = powers.reshape(codebook.c_theta, codebook.c_phi)
        channels[key] = h
        ue = np.array([key[0], key[1], cfg.area.ue_height])
        distances[key] = float(np.linalg.norm(ue - bs))
    return refs, truth, channels, distances


def _eval_coords(refs, grid, observed) -> list:
    """Reference coordinates whose label has no survey measurements."""
    coords = []
    for g in refs:
        key = (float(g[0]), float(g[1]))
        if position_label(grid, g) not in observed:
            coords.append(key)
    return coords


def stage_evaluate(cfg: ExperimentConfig, out_dir) -> list:
    out_dir = Path(out_dir)
    if not any(math.isclose(k, cfg.evaluate.se_k_op)
               for k in cfg.survey.k_ops):
        raise ConfigError(
            f"evaluate.se_k_op={cfg.evaluate.se_k_op} is not one of the "
            f"surveyed ratios {tuple(cfg.survey.k_ops)}"
        )
    scene = load_scene(_require(scene_path(out_dir), "scene-gen"))
    codebook = _codebook(cfg)
    grid = _grid(cfg)
    refs, truth, channels, distances = _truth_planes(cfg, scene, codebook)
    size = codebook.size

    ppl_rows = []
    se_rows = []
    for k_op in cfg.survey.k_ops:
        db = MeasurementDatabase.load_csv(
            _require(measurements_path(out_dir, k_op), "survey"))
        completed = load_tensor_csv(
            _require(completed_path(out_dir, k_op), "complete"), "dB")
        observed = set(db.positions())
        coords = _eval_coords(refs, grid, observed)
        labels = sorted({position_label(grid, g) for g in coords})
        label_of = {g: position_label(grid, g) for g in coords}

        for fraction in cfg.evaluate.n_tr_fractions:
            n_tr = max(1, round_half_up(fraction * size))
            tc = {lab: select_beams(completed, lab, n_tr) for lab in labels}
            fp = {lab: fingerprint_baseline(db, grid, lab, n_tr)
                  for lab in labels}
            ex = exhaustive(codebook.c_theta, codebook.c_phi)
            for method, table in ((METHOD_TC, tc), (METHOD_FP, fp)):
                recs = {g: table[label_of[g]] for g in coords}
                ppl = power_loss_probability(truth, recs, coords)
                ppl_rows.append((k_op, fraction, method, ppl))
            recs = {g: ex for g in coords}
            ppl_rows.append((k_op, fraction, METHOD_EX,
                             power_loss_probability(truth, recs, coords)))

        if math.isclose(k_op, cfg.evaluate.se_k_op):
            se_rows.extend(_spectral_rows(cfg, codebook, completed, db, grid,
                                          truth, channels, distances, coords,
                                          label_of, k_op))

    cleanup = _Cleanup()
    try:
        ppl_path = cleanup.add(results_ppl_path(out_dir))
        with open(ppl_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k_op", "n_tr_fraction", "method", "p_pl"])
            for k_op, fraction, method, ppl in ppl_rows:
                writer.writerow([repr(float(k_op)), repr(float(fraction)),
                                 method, repr(float(ppl))])
        se_path = cleanup.add(results_se_path(out_dir))
        with open(se_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["p_t_dbm", "method", "k_op", "n_tr",
                             "se_bps_hz"])
            for row in se_rows:
                writer.writerow([repr(float(row[0])), row[1],
                                 repr(float(row[2])), row[3],
                                 repr(float(row[4]))])
    except Exception:
        cleanup.discard_all()
        raise
    return cleanup.paths


def _spectral_rows(cfg, codebook, completed, db, grid, truth, channels,
                   distances, coords, label_of, k_op):
    """Average spectral efficiency rows for the Fig.-4-style sweep."""
    n_tr = cfg.evaluate.se_n_tr
    labels = sorted({label_of[g] for g in coords})
    tc = {lab: select_beams(completed, lab, n_tr) for lab in labels}
    fp = {lab: fingerprint_baseline(db, grid, lab, n_tr) for lab in labels}
    methods = ((METHOD_TC, lambda g: tc[label_of[g]].beams, n_tr),
               (METHOD_FP, lambda g: fp[label_of[g]].beams, n_tr),
               (METHOD_EX, None, codebook.size))

    chosen = {}
    for method, beams_of, _ in methods:
        per_coord = {}
        for g in coords:
            plane = truth[g]
            if beams_of is None:
                per_coord[g] = best_beam(plane)
            else:
                per_coord[g] = min(
                    beams_of(g),
                    key=lambda b: (-plane[b[0] - 1, b[1] - 1], b[0], b[1]))
        chosen[method] = per_coord

    rows = []
    for p_t_dbm in cfg.evaluate.p_t_dbm:
        p_t_w = 10.0 ** ((p_t_dbm - 30.0) / 10.0)
        for method, _, method_n_tr in methods:
            total = 0.0
            for g in coords:
                budget = LinkBudget(
                    bandwidth_hz=cfg.link.bandwidth_hz,
                    carrier_hz=cfg.link.carrier_hz,
                    noise_psd_dbm_hz=cfg.link.noise_psd_dbm_hz,
                    antenna_efficiency=cfg.link.antenna_efficiency,
                    distance_m=distances[g],
                )
                w = codebook.vector(*chosen[method][g])
                _, throughput, _ = spectral_efficiency(
                    budget, cfg.timing, p_t_w, w, channels[g], method_n_tr)
                total += throughput / cfg.link.bandwidth_hz
            rows.append((p_t_dbm, method, k_op, method_n_tr,
                         total / len(coords)))
    return rows


def stage_plot(cfg: ExperimentConfig, out_dir) -> list:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    ppl_path = _require(results_ppl_path(out_dir), "evaluate")
    se_path = _require(results_se_path(out_dir), "evaluate")

    written = []
    with open(ppl_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    fig, ax = plt.subplots(figsize=(6, 4))
    curves = {}
    for row in rows:
        key = (row["method"], float(row["k_op"]))
        curves.setdefault(key, []).append(
            (float(row["n_tr_fraction"]), float(row["p_pl"])))
    for (method, k_op), pts in sorted(curves.items()):
        pts.sort()
        ax.plot([100 * x for x, _ in pts], [y for _, y in pts],
                marker="o", label=f"{method}, K_op={k_op:.0%}")
    ax.set_xlabel("trained beams (% of codebook)")
    ax.set_ylabel("power loss probability")
    ax.set_ylim(bottom=0)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out_dir / "ppl_vs_fraction.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    with open(se_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    fig, ax = plt.subplots(figsize=(6, 4))
    curves = {}
    for row in rows:
        key = (row["method"], int(row["n_tr"]))
        curves.setdefault(key, []).append(
            (float(row["p_t_dbm"]), float(row["se_bps_hz"])))
    for (method, n_tr), pts in sorted(curves.items()):
        pts.sort()
        ax.plot([x for x, _ in pts], [y for _, y in pts],
                marker="s", label=f"{method}, N_tr={n_tr}")
    ax.set_xlabel("transmit power (dBm)")
    ax.set_ylabel("spectral efficiency (bit/s/Hz)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out_dir / "se_vs_pt.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


_STAGES = (
    ("scene-gen", stage_scene_gen),
    ("survey", stage_survey),
    ("complete", stage_complete),
    ("recommend", stage_recommend),
    ("evaluate", stage_evaluate),
)


def run(cfg: ExperimentConfig, out_dir=None, plot: bool = False) -> list:
    """Run every stage in order; on failure remove this run's outputs.

    Returns the list of written artifact paths. Deterministic for fixed
    seeds: rerunning with the same config yields byte-identical CSVs.
    """
    out_dir = Path(out_dir if out_dir is not None else cfg.out_dir)
    written = []
    stages = list(_STAGES) + ([("plot", stage_plot)] if plot else [])
    for name, fn in stages:
        try:
            written.extend(fn(cfg, out_dir))
        except Exception as exc:
            for p in written:
                try:
                    Path(p).unlink()
                except FileNotFoundError:
                    pass
            raise StageError(name, exc) from exc
    return written
