"""The modular tree network encoder and its baselines."""
from .config import (
    IDENTIFIER_MODES,
    MODULE_TYPES,
    UNK_INDEX,
    UNK_TOKEN,
    VARIANTS,
    ModelConfig,
    build_vocab,
)
from .params import (
    GateBundle,
    ModelFileError,
    ParamStore,
    container_count,
    init_params,
    load_model,
    model_from_json,
    model_to_json,
    param_count,
    save_model,
    table1_count,
)
from .modules import (
    ArityViolation,
    UnitState,
    lstm_last_hidden,
    module_forward,
    mtn_unit_forward,
)
from .encoder import (
    dispatch,
    encode,
    encode_ast,
    encode_seq_baseline,
    preorder_tokens,
)

__all__ = [
    "IDENTIFIER_MODES", "MODULE_TYPES", "UNK_INDEX", "UNK_TOKEN", "VARIANTS",
    "ModelConfig", "build_vocab",
    "GateBundle", "ModelFileError", "ParamStore", "container_count",
    "init_params", "load_model", "model_from_json", "model_to_json",
    "param_count", "save_model", "table1_count",
    "ArityViolation", "UnitState", "lstm_last_hidden", "module_forward",
    "mtn_unit_forward",
    "dispatch", "encode", "encode_ast", "encode_seq_baseline",
    "preorder_tokens",
]
