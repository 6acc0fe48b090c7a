"""Pure Nash equilibria of random n-player binary-action games."""

from .dist import (
    Bernoulli,
    FiniteDiscrete,
    Gaussian,
    Mixed,
    PayoffDistribution,
    Uniform,
    condition_on_max,
    parse_dist,
)
from .game import Game, enumerate_pne, generate, is_pne, report
from .ldp import bernoulli_limits, entropy, theory

__all__ = [
    "Bernoulli",
    "FiniteDiscrete",
    "Gaussian",
    "Mixed",
    "PayoffDistribution",
    "Uniform",
    "condition_on_max",
    "parse_dist",
    "Game",
    "enumerate_pne",
    "generate",
    "is_pne",
    "report",
    "bernoulli_limits",
    "entropy",
    "theory",
]

__version__ = "0.1.0"
