from dataclasses import dataclass
import numpy as np
from ..matrix_engine import safe_inv
from ..model import MapModel
from .lambda_pair import lambda_pair


@dataclass(frozen=True, eq=False)
class OccupancyTriple:
    """
    L^q (occupation density at 0), Lambda^q (upward ladder generator) and
    R^q = (L^q)^{-1} Lambda^q L^q, so that W^(q)(x) ~ e^{-Lambda^q x} L^q as x grows.
    """

    l_mat: np.ndarray
    lam_gen: np.ndarray
    r_mat: np.ndarray


def occupancy(model: MapModel, q: float) -> OccupancyTriple:
    """
    Identify L^q = Xi_q and Lambda^q = Lambda+_q for the MMBM.

    Args:
        model (MapModel): The MMBM.
        q (float): Killing rate (q > 0, or q = 0 with kappa != 0).

    Returns:
        OccupancyTriple: The triple.
    """
    pair = lambda_pair(model, q)
    l_inv = safe_inv(pair.xi, "occupation density L^q")
    return OccupancyTriple(pair.xi, pair.lam_plus, l_inv @ pair.lam_plus @ pair.xi)
