"""Phase-field dynamics with nonlinear anisotropic diffusion.

Library layout:

- ``model``      reaction/diffusivity descriptors, validation, section functions
- ``profile``    standing-wave profile and the linearized solver
- ``mobility``   direction-dependent mobility tensor and ellipticity certificate
- ``acsolver``   explicit finite-difference solver on the periodic torus
- ``curves``     closed front curves, contour extraction, Hausdorff metric
- ``flow``       front tracking and level-set evolution of the limiting flow
- ``harness``    reaction-ODE checks, generation/propagation experiments
- ``cli``        command-line entry points
"""

__version__ = "0.1.0"

from . import errors
from .model import (
    DiffusivitySpec,
    DirectionSection,
    ModelSpec,
    ReactionSpec,
    ValidationReport,
    a_e,
    big_a_e,
    cubic_identity_model,
    cubic_reaction,
    diagonal_diffusivity,
    grad_e_a,
    grad_e_w,
    identity_diffusivity,
    model_from_config,
    polynomial_diffusivity,
    polynomial_reaction,
    rotated_diagonal_diffusivity,
    shifted_cubic_reaction,
    validate_model,
    w_e,
)

__all__ = [
    "errors",
    "DiffusivitySpec",
    "DirectionSection",
    "ModelSpec",
    "ReactionSpec",
    "ValidationReport",
    "a_e",
    "big_a_e",
    "cubic_identity_model",
    "cubic_reaction",
    "diagonal_diffusivity",
    "grad_e_a",
    "grad_e_w",
    "identity_diffusivity",
    "model_from_config",
    "polynomial_diffusivity",
    "polynomial_reaction",
    "rotated_diagonal_diffusivity",
    "shifted_cubic_reaction",
    "validate_model",
    "w_e",
]
