"""Dense matrix algebra on su(n) and SU(n).

Orthonormal traceless Hermitian frames (Pauli words for qubit registers,
generalized Gell-Mann matrices otherwise), the skew exponential
``H -> exp(-iHt)``, the principal matrix logarithm on SU(n), and the
bi-invariant (Frobenius/Killing) geodesic distance.

Conventions
-----------
* Frames are Frobenius-orthonormal: ``Tr(H_i H_j) = delta_ij``.
* ``expm_skew``/``logm_su`` use the physics sign ``U = exp(-iH)``, so the
  logarithm of ``U`` is the Hermitian generator with eigenvalues in
  ``(-pi, pi)``.
* Everything here is pure and operates on plain complex ndarrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.linalg

from .errors import BranchCutError

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10
BRANCH_CUT_TOL = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": np.eye(2, dtype=complex), "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


def require_hermitian(H: np.ndarray, tol: float = HERMITICITY_TOL, name: str = "H") -> np.ndarray:
    """Validate that ``H`` is square and Hermitian entrywise within ``tol``."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {H.shape}")
    if np.max(np.abs(H - H.conj().T)) > tol:
        raise ValueError(f"{name} is not Hermitian within {tol}")
    return H


def require_unitary(U: np.ndarray, tol: float = UNITARITY_TOL, name: str = "U") -> np.ndarray:
    """Validate ``||U^dag U - 1||_F < tol``."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {U.shape}")
    defect = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
    if defect >= tol:
        raise ValueError(f"{name} is not unitary: ||U^dag U - 1||_F = {defect:.3e}")
    return U


def unitarity_defect(U: np.ndarray) -> float:
    U = np.asarray(U)
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])))


def traceless(H: np.ndarray) -> np.ndarray:
    """Project onto the traceless (su(n)) component."""
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    return H - (np.trace(H) / n) * np.eye(n)


@dataclass(frozen=True)
class PauliFrame:
    """Orthonormal basis of traceless Hermitian matrices.

    ``basis`` has shape ``(n*n - 1, n, n)`` with ``Tr(basis[i] basis[j]) =
    delta_ij``; ``labels`` give a stable column naming for exports.
    """

    dim: int
    basis: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        if self.basis.shape != (self.dim**2 - 1, self.dim, self.dim):
            raise ValueError(
                f"frame basis shape {self.basis.shape} inconsistent with dim {self.dim}"
            )

    @property
    def size(self) -> int:
        return self.dim**2 - 1

    def coefficients(self, H: np.ndarray) -> np.ndarray:
        """Expand the traceless part of ``H``: coeffs[j] = Tr(H basis[j])."""
        H = np.asarray(H, dtype=complex)
        coeffs = np.einsum("aij,ji->a", self.basis, H)
        return np.real_if_close(coeffs, tol=1e6).real

    def assemble(self, coeffs: np.ndarray) -> np.ndarray:
        """Return ``sum_j coeffs[j] basis[j]``."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.size,):
            raise ValueError(f"expected {self.size} coefficients, got {coeffs.shape}")
        return np.einsum("a,aij->ij", coeffs, self.basis)


def pauli_frame(num_qubits: int) -> PauliFrame:
    """Normalized non-identity Pauli words on ``num_qubits`` qubits.

    Ordering is lexicographic in the word with per-site order I < X < Y < Z
    (the all-identity word is dropped), and each word is divided by its
    Frobenius norm ``2^(k/2)``.
    """
    if not isinstance(num_qubits, (int, np.integer)) or num_qubits < 1:
        raise ValueError(f"num_qubits must be a positive integer, got {num_qubits!r}")
    norm = 2.0 ** (num_qubits / 2.0)
    mats, labels = [], []
    for word in product("IXYZ", repeat=num_qubits):
        if all(c == "I" for c in word):
            continue
        M = PAULIS[word[0]]
        for c in word[1:]:
            M = np.kron(M, PAULIS[c])
        mats.append(M / norm)
        labels.append("".join(word))
    return PauliFrame(2**num_qubits, np.array(mats), tuple(labels))


def _gell_mann_frame(n: int) -> PauliFrame:
    # Orthonormalized elementary traceless Hermitian basis (generalized
    # Gell-Mann construction): symmetric/antisymmetric pairs then diagonals.
    mats, labels = [], []
    for j in range(n):
        for k in range(j + 1, n):
            S = np.zeros((n, n), dtype=complex)
            S[j, k] = S[k, j] = 1.0
            mats.append(S / np.sqrt(2.0))
            labels.append(f"S{j}{k}")
            A = np.zeros((n, n), dtype=complex)
            A[j, k] = -1j
            A[k, j] = 1j
            mats.append(A / np.sqrt(2.0))
            labels.append(f"A{j}{k}")
    for d in range(1, n):
        D = np.zeros((n, n), dtype=complex)
        D[:d, :d] = np.eye(d)
        D[d, d] = -d
        mats.append(D / np.sqrt(d * (d + 1)))
        labels.append(f"D{d}")
    return PauliFrame(n, np.array(mats), tuple(labels))


def orthonormal_frame(dim: int) -> PauliFrame:
    """Orthonormal traceless Hermitian frame for su(dim).

    Pauli words when ``dim`` is a power of two, generalized Gell-Mann
    matrices otherwise.
    """
    if not isinstance(dim, (int, np.integer)) or dim < 2:
        raise ValueError(f"dim must be an integer >= 2, got {dim!r}")
    k = int(dim).bit_length() - 1
    if 2**k == dim:
        return pauli_frame(k)
    return _gell_mann_frame(int(dim))


def expm_skew(H: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Unitary ``exp(-iHt)`` of a Hermitian ``H``.

    Computed from the unitary eigendecomposition of ``H``; a closed-form
    fast path handles 2x2 (single-qubit) Hamiltonians.
    """
    H = require_hermitian(H)
    if H.shape[0] == 2:
        return _expm_skew_2x2(H, t)
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * t * w)) @ V.conj().T


def _expm_skew_2x2(H: np.ndarray, t: float) -> np.ndarray:
    # exp(-it(c0*1 + a.sigma)) = e^{-i c0 t}(cos(|a|t) 1 - i sin(|a|t) a.sigma/|a|)
    c0 = 0.5 * (H[0, 0].real + H[1, 1].real)
    ax = H[0, 1].real
    ay = -H[0, 1].imag
    az = 0.5 * (H[0, 0].real - H[1, 1].real)
    r = np.sqrt(ax * ax + ay * ay + az * az)
    phase = np.exp(-1j * c0 * t)
    if r == 0.0:
        return phase * np.eye(2, dtype=complex)
    c, s = np.cos(r * t), np.sin(r * t) / r
    return phase * np.array(
        [
            [c - 1j * s * az, -s * (ay + 1j * ax)],
            [s * (ay - 1j * ax), c + 1j * s * az],
        ],
        dtype=complex,
    )


def logm_su(U: np.ndarray) -> np.ndarray:
    """Principal Hermitian logarithm: returns H with ``exp(-iH) = U`` and
    all eigenvalues of H in (-pi, pi).

    Raises :class:`BranchCutError` when an eigenvalue of ``U`` lies within
    ``1e-8`` of -1; callers must perturb or split the path instead.
    """
    U = require_unitary(U)
    # Schur of a normal matrix gives a unitary diagonalization, which is
    # stable under degenerate eigenvalues (np.linalg.eig is not).
    T, Z = scipy.linalg.schur(U, output="complex")
    eig = np.diag(T)
    if np.min(np.abs(eig + 1.0)) < BRANCH_CUT_TOL:
        raise BranchCutError(
            "eigenvalue within 1e-8 of -1: principal logarithm undefined"
        )
    phases = -np.angle(eig)
    H = (Z * phases) @ Z.conj().T
    return 0.5 * (H + H.conj().T)


def frobenius_distance(U: np.ndarray, V: np.ndarray) -> float:
    """Geodesic (Killing) distance ``d_F(U, V) = ||log(U^dag V)||_F`` on SU(n).

    Bi-invariant, and dominates the matrix chord: ``||U - V||_F <= d_F(U, V)``.
    """
    U = require_unitary(U)
    V = require_unitary(V)
    if U.shape != V.shape:
        raise ValueError(f"dimension mismatch: {U.shape} vs {V.shape}")
    return float(np.linalg.norm(logm_su(U.conj().T @ V)))


def operator_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, ord=2))


def frobenius_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A))
