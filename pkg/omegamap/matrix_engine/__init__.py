from .linalg import safe_inv, safe_solve, right_solve, COND_LIMIT
from .quadratic import QuadraticMatrixProblem, solve_quadratic_stable
from .sylvester import solve_sylvester, sylvester_residual
from .expm import expm, expm_stack, expm_integral
