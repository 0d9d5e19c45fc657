"""Symplectic helpers for two-mode covariance matrices in the ½-vacuum convention."""

import numpy as np


def symplectic_form(n_modes: int = 2) -> np.ndarray:
    """Block-diagonal Ω_s with [[0, 1], [−1, 0]] per mode."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def uncertainty_margin(matrix: np.ndarray) -> float:
    """Smallest eigenvalue of V + (i/2)Ω_s; non-negative for physical states."""
    n_modes = matrix.shape[0] // 2
    hermitian = matrix.astype(complex) + 0.5j * symplectic_form(n_modes)
    return float(np.linalg.eigvalsh(hermitian).min())


def symplectic_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Symplectic spectrum ν_j (each ≥ ½ for physical V), ascending."""
    n_modes = matrix.shape[0] // 2
    eigenvalues = np.linalg.eigvals(1j * symplectic_form(n_modes) @ matrix)
    return np.sort(np.abs(eigenvalues))[::2]


def partial_transpose(matrix: np.ndarray) -> np.ndarray:
    """Mirror the momentum quadrature of the second mode (p₂ → −p₂)."""
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return flip @ matrix @ flip


def local_rotation(theta_plus: float, theta_minus: float) -> np.ndarray:
    """Symplectic matrix of independent phase rotations on the two modes."""
    def rotation(theta):
        c, s = np.cos(theta), np.sin(theta)
        return np.array([[c, -s], [s, c]])

    result = np.zeros((4, 4))
    result[:2, :2] = rotation(theta_plus)
    result[2:, 2:] = rotation(theta_minus)
    return result
