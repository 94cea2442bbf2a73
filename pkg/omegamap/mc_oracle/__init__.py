from .config import CHUNK_PATHS, PathConfig, McEstimate, ResolventEstimate
from .engine import Scenario, run_chunk
from .estimators import simulate_exit, simulate_one_sided_down, simulate_dividends, simulate_resolvent
