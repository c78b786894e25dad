"""Small vector helpers shared by the tests."""
import numpy as np


def unit(*values) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64)
    return vec / np.linalg.norm(vec)


def planar(angle: float) -> np.ndarray:
    """Unit vector in the x-y plane of R^3."""
    return np.array([np.cos(angle), np.sin(angle), 0.0])
