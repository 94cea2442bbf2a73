from .barrier_value import DividendQuery, dividend_value, dividend_value_grid
from .barrier_sweep import SweepResult, barrier_sweep
