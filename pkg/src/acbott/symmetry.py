"""Involutions on structured complex matrices.

Three symmetry classes run through the library: plain complex matrices,
complex symmetric ones (tau = transpose, the real class in disguise), and
self-dual ones (tau = the dual operation, the quaternionic class).  This
module fixes the concrete representatives: the symplectic form Z, the dual
X -> -Z X^T Z, the coupled involution on doubled matrices, the quaternion
embedding, and the fixed unitary conjugation that turns the coupled
involution into a plain transpose.

Block convention for the coupled involution and its conjugation: a matrix
of size 4N is read as a 2x2 grid of 2N x 2N blocks (the tensor factor
B (x) [[0,1],[0,0]] sits at the upper-right block).
"""

from __future__ import annotations

import enum
import warnings

import numpy as np

from .errors import BadDimension, OddDimension, ShapeMismatch
from .matkernel import as_square, operator_norm

TAU_FIXED_RTOL = 1e-8


class SymmetryClass(enum.Enum):
    """Which involution tau governs a tuple."""

    COMPLEX = "complex"
    SYMMETRIC = "symmetric"
    SELF_DUAL = "selfdual"

    @classmethod
    def parse(cls, text: str) -> "SymmetryClass":
        key = text.strip().lower().replace("-", "").replace("_", "")
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown symmetry class {text!r}")


def symplectic_form(half_size: int) -> np.ndarray:
    """Z_N = [[0, I], [-I, 0]] of size 2N; Z^2 = -I, Z^T = -Z, Z unitary."""
    if half_size < 1:
        raise BadDimension("half_size must be positive")
    I = np.eye(half_size)
    O = np.zeros((half_size, half_size))
    return np.block([[O, I], [-I, O]])


def dual(X) -> np.ndarray:
    """The dual operation X -> -Z X^T Z on even-size matrices.

    An involution, anti-multiplicative, and commuting with conjugate
    transpose.  Matrices fixed by it (self-dual) form the quaternionic
    symmetry class.
    """
    A = as_square(X, "X")
    n = A.shape[0]
    if n % 2:
        raise OddDimension("dual needs even size")
    Z = symplectic_form(n // 2)
    return -Z @ A.T @ Z


def time_reversal(v: np.ndarray) -> np.ndarray:
    """The antiunitary v -> -Z conj(v) (squares to -1).

    Acts columnwise on matrices.  A matrix commutes with this map exactly
    when it lies in the image of the quaternion embedding.
    """
    v = np.asarray(v, dtype=complex)
    n = v.shape[0]
    if n % 2:
        raise OddDimension("time reversal needs even dimension")
    Z = symplectic_form(n // 2)
    return -Z @ v.conj()


def tau_apply(X, symmetry: SymmetryClass) -> np.ndarray:
    """Apply the involution of the given class (identity for COMPLEX)."""
    A = as_square(X, "X")
    if symmetry is SymmetryClass.COMPLEX:
        return A.copy()
    if symmetry is SymmetryClass.SYMMETRIC:
        return A.T.copy()
    return dual(A)


def tau_residual(X, symmetry: SymmetryClass) -> float:
    """||X^tau - X||; zero for the COMPLEX class by convention."""
    A = as_square(X, "X")
    if symmetry is SymmetryClass.COMPLEX:
        return 0.0
    return operator_norm(tau_apply(A, symmetry) - A)


def is_tau_fixed(X, symmetry: SymmetryClass) -> bool:
    """True when tau_residual is below 1e-8 * max(1, ||X||)."""
    A = as_square(X, "X")
    return tau_residual(A, symmetry) <= TAU_FIXED_RTOL * max(1.0, operator_norm(A))


def symmetrize(X, symmetry: SymmetryClass, warn_above: float | None = None) -> np.ndarray:
    """Average X with X^tau, the nearest tau-fixed point of the pair.

    Preserves Hermitianity.  If ``warn_above`` is given and the input was
    farther than that from tau-fixed, a warning is emitted (inputs are
    averaged rather than rejected).
    """
    A = as_square(X, "X")
    if symmetry is SymmetryClass.COMPLEX:
        return A.copy()
    resid = tau_residual(A, symmetry)
    if warn_above is not None and resid > warn_above:
        warnings.warn(
            f"input is {resid:.3e} from {symmetry.value}-fixed; averaging",
            stacklevel=2,
        )
    return (A + tau_apply(A, symmetry)) / 2


def chi_embed(A, B) -> np.ndarray:
    """Quaternion embedding chi(A + B j) = [[A, B], [-conj(B), conj(A)]].

    The image is exactly the set of matrices commuting with
    :func:`time_reversal`; it is an algebra map for the quaternion product
    (A1 + B1 j)(A2 + B2 j) = (A1 A2 - B1 conj(B2)) + (A1 B2 + B1 conj(A2)) j.
    """
    Am = as_square(A, "A")
    Bm = as_square(B, "B")
    if Am.shape != Bm.shape:
        raise ShapeMismatch(f"blocks differ: {Am.shape} vs {Bm.shape}")
    return np.block([[Am, Bm], [-Bm.conj(), Am.conj()]])


def _quarter_blocks(X) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
    A = as_square(X, "X")
    m = A.shape[0]
    if m % 4:
        raise BadDimension(f"size {m} not divisible by 4")
    h = m // 2
    return A[:h, :h], A[:h, h:], A[h:, :h], A[h:, h:], h


def sharp_sharp(X) -> np.ndarray:
    """The coupled dual on 2x2 blocks of even-size blocks:

        [[A, B], [C, D]]  ->  [[D#, -B#], [-C#, A#]]

    equivalently conjugation of the transpose by Z (x) Z.  An involution
    and anti-multiplicative.  Bott matrices of self-dual triples are
    anti-fixed by it (the minus sign is what makes their polar parts
    representatives of the two-torsion class).
    """
    A, B, C, D, _ = _quarter_blocks(X)
    return np.block([[dual(D), -dual(B)], [-dual(C), dual(A)]])


def phi_unitary(size: int) -> np.ndarray:
    """The fixed unitary U = (I (x) I - i Z (x) Z)/sqrt(2) of size 4N."""
    if size % 4:
        raise BadDimension(f"size {size} not divisible by 4")
    N = size // 4
    Z2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    K = np.kron(Z2, symplectic_form(N))
    return (np.eye(size) - 1j * K) / np.sqrt(2)


def phi_conjugate(X) -> np.ndarray:
    """Conjugation by :func:`phi_unitary`: a *-isomorphism carrying the
    coupled dual to the plain transpose, Phi(X##) = Phi(X)^T."""
    A = as_square(X, "X")
    U = phi_unitary(A.shape[0])
    return U @ A @ U.conj().T


def phi_inverse(Y) -> np.ndarray:
    """Inverse of :func:`phi_conjugate` (conjugation by U*)."""
    A = as_square(Y, "Y")
    U = phi_unitary(A.shape[0])
    return U.conj().T @ A @ U
