import numpy as np
import pytest

from rodeqc import pauli_frame


@pytest.fixture(scope="session")
def frame2():
    """Single-qubit orthonormal Pauli frame."""
    return pauli_frame(1)


def random_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform SU(2) via a random unit quaternion."""
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    a, b, c, d = v
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar unitary via QR of a complex Ginibre matrix."""
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (R.diagonal() / np.abs(R.diagonal()))


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (A + A.conj().T)
