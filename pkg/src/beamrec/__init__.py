"""Position-aided mmWave beam recommendation from sparse measurements.

Predicts received power over a position x beam grid from a sparse survey
via two-stage smooth matrix completion (ADMM with singular value
thresholding and bidirectional smoothness), recommends small per-position
beam training sets, and evaluates power-loss probability and spectral
efficiency against fingerprint and exhaustive-search baselines on a
deterministic synthetic scene.
"""

from .completion import (CompletedTensor, CompletionConfig, SliceDiagnostic,
                         complete, stage1, stage2)
from .config import (ConfigError, EvaluateConfig, ExperimentConfig,
                     SceneConfig, SurveyConfig, load_config)
from .database import (DB_FLOOR_W, GridSpec, MeasurementDatabase, PowerTensor,
                       grid_from_area, ingest_survey, load_tensor_csv,
                       position_label, round_half_up,
                       sample_observed_positions, save_tensor_csv, to_tensor)
from .metrics import (FrameTiming, LinkBudget, best_beam,
                      power_loss_probability, snr_scale, spectral_efficiency)
from .pipeline import StageError, run
from .recommend import (RecommendationSet, exhaustive, fingerprint_baseline,
                        select_beams)
from .scene import (ChannelInstance, Cluster, Scene, ServiceArea,
                    assemble_channel, channel_at, generate_scene, load_scene,
                    reference_coordinates, save_scene)
from .smc import (SmcParams, SmcProblem, SmcSolution, YSystem, build_y_system,
                  difference_matrix, prepare_y_system, smc_solve, solve_y, svt)
from .upa import (ArrayGeometry, Codebook, beam_powers, build_codebook,
                  quantized_angles, received_power, steering_vector)

__version__ = "0.1.0"
