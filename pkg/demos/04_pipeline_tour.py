"""Desk-scale end-to-end run: survey -> completion -> recommendation -> metrics.

Runs the full pipeline on a reduced scene (5x5 position grid, 16 beams) in
a temporary directory, then prints the power-loss and spectral-efficiency
tables. The full full-scale experiment is the library default:

    beamrec run --out runs/full_scale
"""

import csv
import tempfile
from dataclasses import replace
from pathlib import Path

from beamrec import pipeline
from beamrec.config import EvaluateConfig, ExperimentConfig, SceneConfig, \
    SurveyConfig
from beamrec.scene import ServiceArea
from beamrec.upa import ArrayGeometry

cfg = ExperimentConfig(
    area=ServiceArea(x0=10, x_end=30, y0=-10, y_end=10, ref_grid_n=9),
    scene=replace(SceneConfig(), seed=5, n_clusters=3, n_paths=3,
                  spread_min_m=4.0, spread_max_m=8.0),
    geometry=ArrayGeometry(3, 3),
    c_theta=4, c_phi=4,
    survey=SurveyConfig(k_ops=(0.3, 0.6), top_fraction=0.5, seed=2),
    evaluate=EvaluateConfig(n_tr_fractions=(0.2, 0.5), se_n_tr=3,
                            se_k_op=0.6, p_t_dbm=(20.0, 30.0)),
    recommend_n_tr=3,
)

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "out"
    written = pipeline.run(cfg, out)
    print("artifacts:")
    for p in written:
        print(f"  {Path(p).name}")

    print("\npower loss probability (lower is better):")
    print("  k_op  frac   tensor-completion  fingerprint  exhaustive")
    with open(out / "results_ppl.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    table = {}
    for r in rows:
        key = (float(r["k_op"]), float(r["n_tr_fraction"]))
        table.setdefault(key, {})[r["method"]] = float(r["p_pl"])
    for (k_op, frac), methods in sorted(table.items()):
        print(f"  {k_op:.1f}   {frac:.2f}   "
              f"{methods['tensor-completion']:^17.3f}  "
              f"{methods['fingerprint']:^11.3f}  "
              f"{methods['exhaustive']:^10.3f}")

    print("\naverage spectral efficiency (bit/s/Hz):")
    with open(out / "results_se.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    se = {}
    for r in rows:
        se.setdefault(float(r["p_t_dbm"]), {})[r["method"]] = \
            (float(r["se_bps_hz"]), int(r["n_tr"]))
    for p_t, methods in sorted(se.items()):
        parts = [f"{m} (N_tr={v[1]}): {v[0]:.3f}"
                 for m, v in sorted(methods.items())]
        print(f"  P_t {p_t:.0f} dBm -> " + ", ".join(parts))
