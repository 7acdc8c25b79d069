"""The Boosted-BR-STM convolutional network."""
from dbel.brstm.config import AUXILIARY_BRANCHES, BRANCHES, BrstmConfig, tiny_config
from dbel.brstm.model import (
    BrstmModel,
    branch_forward,
    build_model,
    extract_features,
    forward,
    forward_all,
    predict_proba,
    stem_forward,
    stm_block_forward,
)
from dbel.brstm.training import (
    DonorModel,
    EpochStats,
    TrainLog,
    evaluate,
    pretrain_donor,
    train,
    transplant_auxiliary,
)

__all__ = [
    "AUXILIARY_BRANCHES", "BRANCHES", "BrstmConfig", "BrstmModel", "DonorModel", "EpochStats",
    "TrainLog", "branch_forward", "build_model", "evaluate", "extract_features", "forward",
    "forward_all", "predict_proba", "pretrain_donor", "stem_forward", "stm_block_forward",
    "tiny_config", "train", "transplant_auxiliary",
]
