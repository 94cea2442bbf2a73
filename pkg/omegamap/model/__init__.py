from .map_model import MapModel, laplace_exponent, validate_model_arrays
from .omega import (
    OmegaFn,
    ConstantOmega,
    PerStateOmega,
    StepOmega,
    AffineBandOmega,
    TabulatedOmega,
    omega_eval,
    omega_from_dict,
)
from .grid import MatrixGrid, uniform_nodes
from .load_config import (
    CANNED_NAMES,
    GridSpec,
    RunOptions,
    load_config,
    load_config_file,
    load_canned,
    serialize,
)
