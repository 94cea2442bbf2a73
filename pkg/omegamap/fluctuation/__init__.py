from .common import LIMIT_SCHEDULE, LIMIT_TOL, converge_limit
from .exit import ExitResult, exit_matrices, two_sided_exit
from .one_sided import down_limit, one_sided_up, one_sided_down, two_sided_down_via_one_sided
from .resolvent import Window, ResolventGrid, resolvent, resolvent_density, w_columns
from .killing import KillingResult, killing_probability
