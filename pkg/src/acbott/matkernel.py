"""Dense complex linear-algebra kernels.

Everything in the library runs through the handful of primitives here:
Hermitian eigendecomposition, the unitary polar part, the half-signature,
operator norms, and two independent Pfaffian routes (an O(n^3)
tridiagonalization algorithm and a combinatorial oracle for testing).

All functions treat their inputs as immutable and are safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    GapTooSmall,
    NearSingular,
    NoConvergence,
    NonHermitian,
    NotReal,
    NotSkew,
    OddDimension,
    ShapeMismatch,
    TooLarge,
    ValidationError,
)

DEFAULT_GAP_TOL = 1e-6
DEFAULT_SIGMA_MIN_TOL = 1e-10

COMBINATORIAL_PFAFFIAN_LIMIT = 12


def as_square(X, name: str = "matrix") -> np.ndarray:
    """Validate and return a finite square complex matrix."""
    A = np.asarray(X)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {A.shape}")
    if A.size and not np.all(np.isfinite(A.reshape(-1).view(float) if A.dtype.kind == "c" else A)):
        raise ValidationError(f"{name} contains non-finite entries")
    return A.astype(complex, copy=False)


def default_tol(X: np.ndarray) -> float:
    """Default absolute tolerance, 1e-9 * max(1, ||X||)."""
    return 1e-9 * max(1.0, operator_norm(X))


def is_diagonal(X) -> bool:
    """True when every off-diagonal entry is exactly zero."""
    A = np.asarray(X)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    return np.count_nonzero(A - np.diag(np.diagonal(A))) == 0


def operator_norm(X) -> float:
    """Largest singular value (spectral norm).

    Computed as sqrt(lambda_max(X* X)); one matmul plus a Hermitian
    eigenvalue solve, which is considerably cheaper than a full SVD on
    large inputs and equally accurate for the top singular value.
    Exactly diagonal input short-circuits to max |entry|.
    """
    A = np.asarray(X, dtype=complex)
    if A.size == 0:
        return 0.0
    if A.ndim == 2 and A.shape[0] == A.shape[1] and is_diagonal(A):
        return float(np.abs(np.diagonal(A)).max())
    G = A.conj().T @ A
    w = np.linalg.eigvalsh((G + G.conj().T) / 2)
    return float(np.sqrt(max(w[-1], 0.0)))


@dataclass(frozen=True)
class EigDecomposition:
    """Hermitian eigendecomposition: H = V diag(eigenvalues) V*.

    ``eigenvalues`` ascend; the columns of ``vectors`` are orthonormal.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray


def herm_eig(H, tol: float | None = None) -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    The input must be Hermitian up to ``tol`` (absolute); it is symmetrized
    as (H + H*)/2 before the solve, so the result is exact for the
    symmetrized matrix.

    Raises
    ------
    NonHermitian
        if ||H - H*|| exceeds the tolerance.
    NoConvergence
        if the underlying iteration fails.
    """
    A = as_square(H, "H")
    if tol is None:
        tol = default_tol(A)
    # Frobenius bounds the operator norm from above; the exact norm is only
    # needed when the cheap bound fails
    resid = float(np.linalg.norm(A - A.conj().T))
    if resid > max(tol, 1e-13):
        resid = operator_norm(A - A.conj().T)
        if resid > max(tol, 1e-13):
            raise NonHermitian(f"||H - H*|| = {resid:.3e} exceeds tol {tol:.3e}")
    A = (A + A.conj().T) / 2
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK stall
        raise NoConvergence(str(exc)) from exc
    return EigDecomposition(eigenvalues=w, vectors=V)


def polar(X, sigma_min_tol: float = DEFAULT_SIGMA_MIN_TOL) -> np.ndarray:
    """Unitary polar part, polar(X) = X (X*X)^(-1/2).

    One SVD; the result is the closest unitary to X.  Requires the
    smallest singular value to stay above ``sigma_min_tol``.
    """
    A = as_square(X, "X")
    try:
        u, s, vh = np.linalg.svd(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NoConvergence(str(exc)) from exc
    if A.shape[0] and s[-1] < sigma_min_tol:
        raise NearSingular(
            f"smallest singular value {s[-1]:.3e} < {sigma_min_tol:.3e}"
        )
    return u @ vh


def signature(H, gap_tol: float = DEFAULT_GAP_TOL) -> int:
    """Half-signature: (n_+ - n_-)/2 over the spectrum of Hermitian H.

    Every eigenvalue must stay at least ``gap_tol`` away from zero, and the
    count difference must be even (both always hold for gapped doubled
    matrices with symmetric spectrum counts); otherwise the quantity is not
    a well-defined integer invariant and GapTooSmall is raised.
    """
    dec = herm_eig(H)
    w = dec.eigenvalues
    gap = float(np.min(np.abs(w))) if w.size else 0.0
    if gap < gap_tol:
        raise GapTooSmall(f"min |eigenvalue| = {gap:.3e} < gap_tol {gap_tol:.3e}")
    diff = int((w > 0).sum()) - int((w < 0).sum())
    if diff % 2:
        raise GapTooSmall(f"odd eigenvalue count difference {diff}; not a half-signature")
    return diff // 2


def _check_real_skew(R, tol: float | None, even: bool = True) -> np.ndarray:
    A = as_square(R, "R")
    if tol is None:
        tol = 1e-10 * max(1.0, operator_norm(A))
    if even and A.shape[0] % 2:
        raise OddDimension("Pfaffian needs even size")
    if np.abs(A.imag).max(initial=0.0) > tol:
        raise NotReal(f"imaginary part exceeds {tol:.3e}")
    Ar = A.real
    if operator_norm(Ar + Ar.T) > tol:
        raise NotSkew(f"||R + R^T|| exceeds {tol:.3e}")
    return (Ar - Ar.T) / 2


def pfaffian_real_skew(R, tol: float | None = None) -> float:
    """Pfaffian of a real skew-symmetric matrix of even size.

    Parlett-Reid style skew tridiagonalization with partial pivoting: each
    elimination is a unit-determinant congruence, each row/column swap
    flips the sign, and the Pfaffian of the resulting tridiagonal is the
    product of its (2k, 2k+1) entries.  O(n^3), numerically stable.
    """
    A = _check_real_skew(R, tol)
    n = A.shape[0]
    if n == 0:
        return 1.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1:, k])))
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0.0:
            return 0.0
        pf *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2:] / A[k, k + 1]
            A[k + 2:, k + 2:] += np.outer(tau, A[k + 2:, k + 1])
            A[k + 2:, k + 2:] -= np.outer(A[k + 2:, k + 1], tau)
    return float(pf)


def pfaffian_combinatorial(R) -> complex:
    """Exact Pfaffian by recursive expansion over perfect matchings.

    Testing oracle only; sizes are capped at 12 (10395 matchings) to keep
    the exact sum affordable.  Accepts complex skew-symmetric input.
    """
    A = as_square(R, "R")
    n = A.shape[0]
    if n % 2:
        raise OddDimension("Pfaffian needs even size")
    if n > COMBINATORIAL_PFAFFIAN_LIMIT:
        raise TooLarge(f"size {n} > limit {COMBINATORIAL_PFAFFIAN_LIMIT}")
    tol = 1e-10 * max(1.0, np.abs(A).max(initial=0.0))
    if np.abs(A + A.T).max(initial=0.0) > tol:
        raise NotSkew("input is not skew-symmetric")

    memo: dict[tuple[int, ...], complex] = {}

    def rec(ix: tuple[int, ...]) -> complex:
        if not ix:
            return 1.0 + 0.0j
        got = memo.get(ix)
        if got is not None:
            return got
        i0 = ix[0]
        total = 0.0 + 0.0j
        for pos in range(1, len(ix)):
            a = A[i0, ix[pos]]
            if a != 0.0:
                rest = ix[1:pos] + ix[pos + 1:]
                total += (-1) ** (pos - 1) * a * rec(rest)
        memo[ix] = total
        return total

    return complex(rec(tuple(range(n))))
