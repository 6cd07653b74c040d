"""Light-field lane detection.

A 2D lenslet-style representation for light fields, a synthetic road-scene
generator with exact lane labels, a small from-scratch CNN/LSTM stack, and
tooling to train and compare three input modalities: a regular 2D view, a
single lenslet image, and a lenslet image sequence.
"""

from .errors import NumericalError, ValidationError
from .lightfield import (
    LightField,
    LightFieldSequence,
    central_view,
    extract_view,
)
from .lenslet import (
    LensletImage,
    LensletTransform,
    lenslet_transform,
    recover_view_subgrid,
    select_views,
)
from .container import (
    load_lenslet_image,
    load_lightfield,
    load_sequence,
    save_lenslet_image,
    save_lightfield,
    save_sequence_manifest,
    save_view_png,
)
from .labels import LABEL_SIZE, label_to_points, load_label, points_to_label, save_label
from .scene import (
    CameraSpec,
    DegradationSpec,
    SceneSpec,
    advance_ego,
    apply_degradation,
    default_camera,
    ground_truth_label,
    label_stations,
    project_ground_point,
    render_lightfield,
)
from .datagen import DegradationMix, generate_dataset, load_dataset, split_dataset
from .loader import frame_to_input, load_modality_split
from .model import (
    MODALITIES,
    ModelConfig,
    count_params,
    gradcheck_model,
    init_params,
    load_checkpoint,
    model_forward,
    model_predict,
    save_checkpoint,
)
from .train import TrainConfig, TrainResult, predict_in_batches, train_model
from .metrics import EvalReport, compare, evaluate_model, load_report, rmse, save_report
from .estimator import LaneRegressor

__version__ = "0.1.0"

__all__ = [
    "ValidationError", "NumericalError",
    "LightField", "LightFieldSequence", "central_view", "extract_view",
    "LensletImage", "LensletTransform", "lenslet_transform",
    "recover_view_subgrid", "select_views",
    "load_lightfield", "save_lightfield",
    "load_lenslet_image", "save_lenslet_image",
    "load_sequence", "save_sequence_manifest", "save_view_png",
    "LABEL_SIZE", "label_to_points", "points_to_label",
    "load_label", "save_label",
    "SceneSpec", "CameraSpec", "DegradationSpec", "default_camera",
    "render_lightfield", "ground_truth_label", "label_stations",
    "project_ground_point", "advance_ego", "apply_degradation",
    "DegradationMix", "generate_dataset", "load_dataset", "split_dataset",
    "frame_to_input", "load_modality_split",
    "MODALITIES", "ModelConfig", "init_params", "count_params",
    "model_forward", "model_predict", "save_checkpoint", "load_checkpoint",
    "gradcheck_model",
    "TrainConfig", "TrainResult", "train_model", "predict_in_batches",
    "EvalReport", "evaluate_model", "compare", "rmse",
    "save_report", "load_report",
    "LaneRegressor",
    "__version__",
]
