from . import errors
from . import utils
from . import model
from . import matrix_engine
from . import scale_classic
from . import scale_omega
from . import fluctuation
from . import dividends
from . import mc_oracle
from . import cli
from .errors import OmegaMapError, ValidationError, NumericalError, ConvergenceError, ConditioningError
from .model import MapModel, load_config, load_canned
