"""Experiment configuration: flat key-value text with one section level.

Every key is optional; defaults reproduce the full-scale setting (50 m x
50 m area on an 11 x 11 label grid, 16 x 16 UPA with a 256-beam codebook,
top-10% survey). Unknown sections or keys raise a parse error naming the
offender so typos do not silently fall back to defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

from .metrics import FrameTiming, LinkBudget
from .scene import DEFAULT_CARRIER_HZ, SPEED_OF_LIGHT, ServiceArea
from .smc import SmcParams
from .upa import ArrayGeometry


class ConfigError(ValueError):
    """Invalid experiment configuration (names the section and field)."""


@dataclass(frozen=True)
class SceneConfig:
    seed: int = 31
    n_clusters: int = 8
    n_paths: int = 8
    include_los: bool = False
    shadowing_corr_m: float = 25.0
    shadow_sigma_db: float = 18.0
    carrier_hz: float = DEFAULT_CARRIER_HZ
    spread_min_m: float = 10.0
    spread_max_m: float = 18.0
    gain_min_db: float = -6.0
    gain_max_db: float = -2.0
    min_separation_deg: float = 18.0

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz


@dataclass(frozen=True)
class SurveyConfig:
    k_ops: tuple = (0.2, 0.4)
    top_fraction: float = 0.1
    seed: int = 13
    p_t_w: float = 1.0
    noise_var_w: float = 0.0


@dataclass(frozen=True)
class EvaluateConfig:
    n_tr_fractions: tuple = (0.02, 0.04, 0.06, 0.08, 0.10, 0.13, 0.16, 0.20)
    se_n_tr: int = 10
    se_k_op: float = 0.4
    p_t_dbm: tuple = (10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)


@dataclass(frozen=True)
class ExperimentConfig:
    area: ServiceArea = field(default_factory=ServiceArea)
    scene: SceneConfig = field(default_factory=SceneConfig)
    delta_s: float = 5.0
    geometry: ArrayGeometry = field(default_factory=lambda: ArrayGeometry(16, 16))
    c_theta: int = 16
    c_phi: int = 16
    survey: SurveyConfig = field(default_factory=SurveyConfig)
    smc_stage1: SmcParams = field(default_factory=SmcParams)
    smc_stage2: SmcParams = field(default_factory=SmcParams)
    recommend_n_tr: int = 10
    evaluate: EvaluateConfig = field(default_factory=EvaluateConfig)
    link: LinkBudget = field(default_factory=LinkBudget)
    timing: FrameTiming = field(default_factory=FrameTiming)
    out_dir: str = "runs/full_scale"
    workers: int = 1

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Override both random streams from one master seed."""
        return replace(self, scene=replace(self.scene, seed=seed),
                       survey=replace(self.survey, seed=seed + 1))


_SCHEMA = {
    "area": {"x0": float, "x_end": float, "y0": float, "y_end": float,
             "bs_x": float, "bs_y": float, "bs_z": float,
             "ue_height": float, "ref_grid_n": int},
    "scene": {"seed": int, "n_clusters": int, "n_paths": int,
              "include_los": bool, "shadowing_corr_m": float,
              "shadow_sigma_db": float, "carrier_hz": float,
              "spread_min_m": float, "spread_max_m": float,
              "gain_min_db": float, "gain_max_db": float,
              "min_separation_deg": float},
    "grid": {"delta_s": float},
    "codebook": {"n_x": int, "n_y": int, "spacing": float,
                 "c_theta": int, "c_phi": int},
    "survey": {"k_op": "floats", "top_fraction": float, "seed": int,
               "p_t_w": float, "noise_var_w": float},
    "smc_stage1": {"gamma": float, "lam": float, "beta": float,
                   "epsilon": float, "max_iter": int},
    "smc_stage2": {"gamma": float, "lam": float, "beta": float,
                   "epsilon": float, "max_iter": int},
    "recommend": {"n_tr": int},
    "evaluate": {"n_tr_fractions": "floats", "se_n_tr": int,
                 "se_k_op": float, "p_t_dbm": "floats"},
    "link": {"bandwidth_hz": float, "carrier_hz": float,
             "noise_psd_dbm_hz": float, "antenna_efficiency": float},
    "timing": {"microslot_s": float, "frame_s": float},
    "run": {"out_dir": str, "workers": int},
}


def _convert(section, key, raw, kind):
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind == "floats":
            values = tuple(float(v) for v in raw.split())
            if not values:
                raise ValueError("empty list")
            return values
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(
            f"[{section}] {key} = {raw!r}: cannot parse as "
            f"{kind if isinstance(kind, str) else kind.__name__} ({exc})"
        ) from None


def load_config(path) -> ExperimentConfig:
    """Parse a config file; unknown sections/keys are errors."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}] in {path}")
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown field {key!r} in [{section}]")
            values[section][key] = _convert(section, key, raw,
                                            _SCHEMA[section][key])
    return _build(values)


def _build(v: dict) -> ExperimentConfig:
    base = ExperimentConfig()

    def get(section, key, default):
        return v.get(section, {}).get(key, default)

    area = ServiceArea(
        x0=get("area", "x0", base.area.x0),
        x_end=get("area", "x_end", base.area.x_end),
        y0=get("area", "y0", base.area.y0),
        y_end=get("area", "y_end", base.area.y_end),
        bs_position=(get("area", "bs_x", base.area.bs_position[0]),
                     get("area", "bs_y", base.area.bs_position[1]),
                     get("area", "bs_z", base.area.bs_position[2])),
        ue_height=get("area", "ue_height", base.area.ue_height),
        ref_grid_n=get("area", "ref_grid_n", base.area.ref_grid_n),
    )
    scene_kwargs = {k: get("scene", k, getattr(base.scene, k))
                    for k in _SCHEMA["scene"]}
    geometry = ArrayGeometry(
        n_x=get("codebook", "n_x", base.geometry.n_x),
        n_y=get("codebook", "n_y", base.geometry.n_y),
        spacing=get("codebook", "spacing", base.geometry.spacing),
    )
    survey = SurveyConfig(
        k_ops=get("survey", "k_op", base.survey.k_ops),
        top_fraction=get("survey", "top_fraction", base.survey.top_fraction),
        seed=get("survey", "seed", base.survey.seed),
        p_t_w=get("survey", "p_t_w", base.survey.p_t_w),
        noise_var_w=get("survey", "noise_var_w", base.survey.noise_var_w),
    )

    def smc(section):
        default = getattr(base, section)
        return SmcParams(
            gamma=get(section, "gamma", default.gamma),
            lam=get(section, "lam", default.lam),
            beta=get(section, "beta", default.beta),
            epsilon=get(section, "epsilon", default.epsilon),
            max_iter=get(section, "max_iter", default.max_iter),
        )

    evaluate = EvaluateConfig(
        n_tr_fractions=get("evaluate", "n_tr_fractions",
                           base.evaluate.n_tr_fractions),
        se_n_tr=get("evaluate", "se_n_tr", base.evaluate.se_n_tr),
        se_k_op=get("evaluate", "se_k_op", base.evaluate.se_k_op),
        p_t_dbm=get("evaluate", "p_t_dbm", base.evaluate.p_t_dbm),
    )
    link = LinkBudget(
        bandwidth_hz=get("link", "bandwidth_hz", base.link.bandwidth_hz),
        carrier_hz=get("link", "carrier_hz", base.link.carrier_hz),
        noise_psd_dbm_hz=get("link", "noise_psd_dbm_hz",
                             base.link.noise_psd_dbm_hz),
        antenna_efficiency=get("link", "antenna_efficiency",
                               base.link.antenna_efficiency),
    )
    timing = FrameTiming(
        microslot_s=get("timing", "microslot_s", base.timing.microslot_s),
        frame_s=get("timing", "frame_s", base.timing.frame_s),
    )
    try:
        return ExperimentConfig(
            area=area,
            scene=SceneConfig(**scene_kwargs),
            delta_s=get("grid", "delta_s", base.delta_s),
            geometry=geometry,
            c_theta=get("codebook", "c_theta", base.c_theta),
            c_phi=get("codebook", "c_phi", base.c_phi),
            survey=survey,
            smc_stage1=smc("smc_stage1"),
            smc_stage2=smc("smc_stage2"),
            recommend_n_tr=get("recommend", "n_tr", base.recommend_n_tr),
            evaluate=evaluate,
            link=link,
            timing=timing,
            out_dir=get("run", "out_dir", base.out_dir),
            workers=get("run", "workers", base.workers),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
