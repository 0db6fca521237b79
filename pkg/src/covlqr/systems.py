"""Built-in plants used by the experiment harness and the CLI demos."""

from __future__ import annotations

import numpy as np

from .koopman import LiftingDictionary, coordinate_dictionary
from .lti import LtiSystem


def unstable4() -> LtiSystem:
    """Slightly unstable 4-state, single-input benchmark plant."""
    a = np.array([
        [0.99, 0.01, 0.02, 0.00],
        [0.02, 0.98, 0.01, 0.00],
        [0.01, 0.03, 0.97, 0.01],
        [0.00, 0.01, 0.02, 0.95],
    ])
    b = np.array([[1.0], [0.0], [0.0], [0.0]])
    return LtiSystem(a=a, b=b)


def random_system(n: int, m: int, rng: np.random.Generator) -> LtiSystem:
    """Plant with standard-normal entries (usually open-loop unstable)."""
    return LtiSystem(a=rng.standard_normal((n, n)), b=rng.standard_normal((n, m)))


def quad_coupled_step(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Two-state plant with a quadratic coupling that lifts exactly.

    x1+ = 0.9 x1
    x2+ = 0.8 x2 + (0.81 - 0.8) x1^2 + u

    With observables (x1, x2, x1^2) the lifted dynamics are linear:
    z3+ = (x1+)^2 = 0.81 z3.
    """
    return np.array([0.9 * x[0], 0.8 * x[1] + 0.01 * x[0] ** 2 + float(u[0])])


def quad_coupled_dictionary() -> LiftingDictionary:
    return coordinate_dictionary(2, extra=[("x1^2", lambda x: float(x[0] ** 2))])
