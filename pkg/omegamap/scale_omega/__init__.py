from .volterra import VolterraProblem, SolverMode, volterra_solve, volterra_residual, trapezoid_convolution
from .omega_scale import (
    OmegaScaleSet,
    kernel_shift,
    omega_w,
    omega_z,
    omega_w_prime,
    omega_scale_set,
    omega_h,
    h_below,
)
from .step_omega import StepConstants, step_omega_w, step_omega_z, closed_step_omega_w, step_constants
from .ode import omega_model_ode_g
