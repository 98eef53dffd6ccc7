from .base import FLOAT, DynamicalModel, ModelError, hp
from .equilibrium import EquilibriumError, EquilibriumPoint, find_sep, solve_algebraic
from .lorenz import LorenzModel, lorenz_model
from .smib import SMIBModel, smib_model
from .wscc9 import FaultScenario, WSCC9Model, wscc9_model

__all__ = [
    "FLOAT", "DynamicalModel", "ModelError", "hp",
    "EquilibriumError", "EquilibriumPoint", "find_sep", "solve_algebraic",
    "LorenzModel", "lorenz_model", "SMIBModel", "smib_model",
    "FaultScenario", "WSCC9Model", "wscc9_model",
]
