from .emit import emit_matrix_grid, emit_frame, emit_json, read_matrix_grid, grid_frame
from .verbs import VERBS, Context, VerbOutput
from .verify import CheckResult, Measure, run_checks, verify
from .main import build_parser, run, main
