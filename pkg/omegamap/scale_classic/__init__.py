from .lambda_pair import LambdaPair, LambdaRelations, lambda_pair, lambda_relations, check_killing_rate
from .scale_matrix import w_q, w_q_prime, z_q, z_q_integral
from .occupancy import OccupancyTriple, occupancy
from .analytic import analytic_w2_zero_drift, constant_omega_w2
from .laplace_check import laplace_check
