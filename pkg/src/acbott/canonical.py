"""Structured canonical forms and constructive two-torsion witnesses.

Three witness theorems drive the extraction machinery:

* quaternion class: every Hermitian anti-self-dual S with ||S^2 - I|| < 1
  is conjugated by a symplectic unitary to within ||S^2 - I|| of
  diag(I, -I) (the class group is trivial);
* real class: a Hermitian antisymmetric S of size 4n admits a real
  special-orthogonal witness against the fixed representative S0 exactly
  when Pf(S) > 0 (two-torsion);
* twisted class: same dichotomy for Hermitian S with S## = -S, decided by
  Pf after the fixed unitary conjugation and pulled back through it.

The commuting-pair extraction follows the constructive core: conjugate the
doubled matrix to diag(I, -I), read off the witness blocks A and B, and
form U = polar(A)* polar(B), which commutes with H3 and reconstructs
H1 + i H2 against sqrt(1 - H3^2) up to the input residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    DegenerateFailure,
    HypothesisFailed,
    NormConditionFailed,
    NontrivialClass,
    NotRealSkew,
    PerturbationFailed,
    RankDeficient,
    WrongSymmetry,
)
from .invariants import bott_matrix
from .matkernel import as_square, herm_eig, operator_norm, polar
from .relations import sphere_residual
from .symmetry import (
    SymmetryClass,
    dual,
    phi_conjugate,
    phi_inverse,
    sharp_sharp,
    tau_residual,
    time_reversal,
)

SYMMETRY_TOL = 1e-8


@dataclass(frozen=True)
class WitnessReport:
    """A structured unitary witness and its achieved conjugation bound.

    ``certified`` records whether the bound met the theorem's inequality
    bound <= ||S^2 - I|| + slack.
    """

    witness: np.ndarray
    bound: float
    certified: bool
    norm_condition: float
    details: dict = field(default_factory=dict)


def _check_herm(S, name="S"):
    A = as_square(S, name)
    scale = max(1.0, operator_norm(A))
    if operator_norm(A - A.conj().T) > SYMMETRY_TOL * scale:
        raise WrongSymmetry(f"{name} is not Hermitian")
    return (A + A.conj().T) / 2


def diag_anti_selfdual(X, zero_tol: float = 1e-10):
    """Symplectic diagonalization of a Hermitian anti-self-dual matrix:

        X = W diag(D, -D) W*,   D >= 0,   W symplectic unitary.

    The antiunitary partner map v -> -Z conj(v) carries the eigenspace of
    +lambda onto that of -lambda, so W = [V, TV] with V the nonnegative
    eigenvectors has the quaternion block form exactly; kernel vectors are
    paired among themselves by a partner-respecting Gram-Schmidt.  If an
    eigenvalue straddles the zero threshold and breaks the count symmetry,
    the threshold is jittered before giving up.
    """
    A = _check_herm(X, "X")
    n = A.shape[0]
    scale = max(1.0, operator_norm(A))
    if operator_norm(dual(A) + A) > SYMMETRY_TOL * scale:
        raise WrongSymmetry("X is not anti-self-dual")
    w, V = np.linalg.eigh(A)
    pos = ker = None
    for threshold in (zero_tol, 3.7 * zero_tol, zero_tol / 3.7):
        pos = w > threshold
        ker = np.abs(w) <= threshold
        if int(pos.sum()) * 2 + int(ker.sum()) == n:
            break
    else:
        raise DegenerateFailure(
            "spectrum is not symmetric about zero at any pairing tolerance"
        )
    Vp = V[:, pos][:, ::-1]
    D = w[pos][::-1]
    kernel = V[:, ker]
    firsts: list[np.ndarray] = []
    partners: list[np.ndarray] = []
    j = 0
    while 2 * len(firsts) < kernel.shape[1]:
        if j >= kernel.shape[1]:
            raise DegenerateFailure("kernel pairing ran out of candidates")
        v = kernel[:, j].copy()
        j += 1
        for c in firsts + partners:
            v -= c * (c.conj() @ v)
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            continue
        v /= nv
        tv = time_reversal(v)
        for c in firsts + partners + [v]:
            tv -= c * (c.conj() @ tv)
        ntv = np.linalg.norm(tv)
        if ntv < 1e-8:
            raise DegenerateFailure("kernel is not time-reversal invariant")
        firsts.append(v)
        partners.append(tv / ntv)
    pieces = [Vp] + ([np.column_stack(firsts)] if firsts else [])
    first_half = np.column_stack(pieces) if pieces else np.zeros((n, 0), complex)
    W = np.column_stack([first_half, time_reversal(first_half)])
    D = np.concatenate([D, np.zeros(len(firsts))])
    return W, D


def _norm_condition(S) -> float:
    n = S.shape[0]
    delta = operator_norm(S @ S - np.eye(n))
    if delta >= 1.0:
        raise NormConditionFailed(f"||S^2 - I|| = {delta:.4f} >= 1")
    return delta


def mirror_pair(half: np.ndarray) -> np.ndarray:
    """diag(I, -I) at the given half size (the trivial class representative)."""
    return np.diag(np.concatenate([np.ones(half), -np.ones(half)]))


def k2_quaternion_witness(S) -> WitnessReport:
    """Symplectic witness conjugating S near diag(I, -I).

    Hypotheses: ||S^2 - I|| < 1, S Hermitian, anti-self-dual.  The achieved
    bound never exceeds ||S^2 - I||: all eigenvalues of |S| lie within the
    norm condition of 1.
    """
    A = _check_herm(S)
    delta = _norm_condition(A)
    W, D = diag_anti_selfdual(A)
    n = A.shape[0]
    target = mirror_pair(n // 2)
    bound = operator_norm(A - W @ target @ W.conj().T)
    return WitnessReport(
        witness=W,
        bound=float(bound),
        certified=bool(bound <= delta + 1e-8),
        norm_condition=float(delta),
        details={"D_range": (float(D.min(initial=0.0)), float(D.max(initial=0.0)))},
    )


def real_skew_canonical(R, rank_tol: float = 1e-10):
    """Real orthogonal canonical form of a real skew-symmetric matrix of
    size 4n: R = U D U^T with D built from 2x2 blocks [[0, a_i], [-a_i, 0]].

    Normalization: det(U) = +1 (columns flipped as needed), a_2..a_{2n} > 0,
    and a_1 carries the sign of the Pfaffian, so Pf(R) = prod a_i holds to
    rounding.  Raises RankDeficient when any |a_i| falls below ``rank_tol``
    (the canonical sign split is undefined there).
    """
    A = as_square(R, "R")
    n = A.shape[0]
    scale = max(1.0, operator_norm(A))
    if np.abs(A.imag).max(initial=0.0) > 1e-10 * scale:
        raise NotRealSkew("matrix has an imaginary part")
    Ar = A.real
    if operator_norm(Ar + Ar.T) > 1e-10 * scale:
        raise NotRealSkew("matrix is not skew-symmetric")
    if n % 4:
        raise NotRealSkew(f"size {n} is not a multiple of 4")
    Ar = (Ar - Ar.T) / 2
    T, Q = sla.schur(Ar, output="real")
    # normal input: the quasi-triangular factor is block diagonal to rounding
    a = np.zeros(n // 2)
    U = Q.copy()
    for i in range(n // 2):
        blk = T[2 * i:2 * i + 2, 2 * i:2 * i + 2]
        val = (blk[0, 1] - blk[1, 0]) / 2
        if abs(val) < rank_tol:
            raise RankDeficient(f"block {i} has |a| = {abs(val):.3e} < {rank_tol:.1e}")
        if val < 0:
            U[:, [2 * i, 2 * i + 1]] = U[:, [2 * i + 1, 2 * i]]
            val = -val
        a[i] = val
    if np.linalg.det(U) < 0:
        U[:, [0, 1]] = U[:, [1, 0]]
        a[0] = -a[0]
    return U, a


def skew_representative(size: int) -> np.ndarray:
    """The fixed Hermitian antisymmetric unitary S0 of size 4n: 2x2 blocks
    [[0, i], [-i, 0]], with the first block carrying the sign (-1)^n so
    that Pf(S0) = 1."""
    if size % 4:
        raise NotRealSkew(f"size {size} is not a multiple of 4")
    n = size // 4
    block = np.array([[0.0, 1j], [-1j, 0.0]])
    blocks = [(-1) ** n * block] + [block] * (2 * n - 1)
    return sla.block_diag(*blocks)


def _blocks_to_matrix(a: np.ndarray) -> np.ndarray:
    D = np.zeros((2 * len(a), 2 * len(a)))
    for i, v in enumerate(a):
        D[2 * i, 2 * i + 1] = v
        D[2 * i + 1, 2 * i] = -v
    return D


def k2_real_witness(S) -> WitnessReport:
    """Real special-orthogonal witness conjugating S near the fixed
    representative S0, which exists exactly when Pf(S) > 0.

    Hypotheses: ||S^2 - I|| < 1, S Hermitian, antisymmetric, size 4n.
    Raises NontrivialClass when the Pfaffian is negative; that is the
    obstruction, not a failure.
    """
    A = _check_herm(S)
    n = A.shape[0]
    scale = max(1.0, operator_norm(A))
    if operator_norm(A + A.T) > SYMMETRY_TOL * scale:
        raise WrongSymmetry("S is not antisymmetric")
    if n % 4:
        raise WrongSymmetry(f"size {n} is not a multiple of 4")
    delta = _norm_condition(A)
    X = (-1j * A).real  # Hermitian + antisymmetric => purely imaginary
    U, a = real_skew_canonical(X)
    # Pf(S) = (-1)^n Pf(X) on size 4n, and Pf(X) = prod a by det(U) = 1
    pf_S = (-1) ** (n // 4) * float(np.prod(a))
    if pf_S < 0:
        raise NontrivialClass(f"Pf(S) = {pf_S:.4g} < 0")
    S0 = skew_representative(n)
    bound = operator_norm(A - U @ S0 @ U.conj().T)
    return WitnessReport(
        witness=U.astype(complex),
        bound=float(bound),
        certified=bool(bound <= delta + 1e-8),
        norm_condition=float(delta),
        details={"pfaffian": pf_S},
    )


def k2_twisted_witness(S) -> WitnessReport:
    """Witness with W## = W* conjugating S near diag(I, -I), through the
    fixed *-isomorphism onto the transpose picture.

    The class of S is trivial exactly when Pf(Phi(S)) > 0; the witness is
    the pullback W = Phi^{-1}(W2 W1*) where W1 exactly conjugates
    Phi(diag(I, -I)) to S0 and W2 is the real witness for Phi(S).
    """
    A = _check_herm(S)
    n = A.shape[0]
    scale = max(1.0, operator_norm(A))
    if operator_norm(sharp_sharp(A) + A) > SYMMETRY_TOL * scale:
        raise WrongSymmetry("S is not anti-fixed by the coupled dual")
    delta = _norm_condition(A)
    target = mirror_pair(n // 2)
    ref = k2_real_witness(phi_conjugate(target))  # exact: bound ~ 0
    W1 = ref.witness
    real_report = k2_real_witness(phi_conjugate(A))  # NontrivialClass propagates
    W2 = real_report.witness
    W = phi_inverse(W2 @ W1.conj().T)
    bound = operator_norm(A - W @ target @ W.conj().T)
    return WitnessReport(
        witness=W,
        bound=float(bound),
        certified=bool(bound <= delta + 1e-8),
        norm_condition=float(delta),
        details={"pfaffian": real_report.details["pfaffian"]},
    )


def sqrt_psd(M) -> np.ndarray:
    """Hermitian square root with eigenvalues clipped at zero."""
    dec = herm_eig(M, tol=1e-6 * max(1.0, operator_norm(np.asarray(M))))
    w = np.clip(dec.eigenvalues, 0.0, None)
    V = dec.vectors
    return (V * np.sqrt(w)) @ V.conj().T


def _structured_rotation(n: int, anti_tau, rng: np.random.Generator, eps: float):
    """exp(eps G) with G anti-Hermitian and anti-fixed by the involution, a
    small step inside the structured unitary group."""
    raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    G = (raw - raw.conj().T) / 2
    G = (G - anti_tau(G)) / 2
    norm = operator_norm(G)
    if norm > 0:
        G = G / norm
    w, V = np.linalg.eigh(1j * G)
    return (V * np.exp(-1j * eps * w)) @ V.conj().T


@dataclass(frozen=True)
class ExtractionResult:
    """Output of the commuting-pair extraction: a tau-fixed unitary U
    commuting with K = H3 up to the input residual, plus the measured
    residuals (commutator, tau-fixedness, and the reconstruction identity
    ||U sqrt(1 - K^2) - (H1 + i H2)||)."""

    U: np.ndarray
    K: np.ndarray
    residuals: dict


def commuting_pair_from_sphere(
    H1,
    H2,
    H3,
    symmetry: SymmetryClass = SymmetryClass.SYMMETRIC,
    seed: int = 0,
    sigma_min_tol: float = 1e-8,
    max_retries: int = 5,
) -> ExtractionResult:
    """Extract a commuting (unitary, Hermitian) pair from a near-sphere
    triple carrying transpose or dual symmetry.

    SYMMETRIC triples always admit a witness (their doubled matrix is
    anti-self-dual); SELF_DUAL triples go through the twisted witness and
    raise NontrivialClass when the Pfaffian-Bott obstruction is -1.  If a
    witness block is nearly singular it is moved inside the structured
    unitary group by a small random rotation (the invertible pairs are
    dense there); the step size is ten times the singular-value deficit.

    The three returned residuals shrink with the input residual; no rate
    is asserted.
    """
    rel = sphere_residual(H1, H2, H3)
    Hs = [as_square(H, f"H{r + 1}") for r, H in enumerate((H1, H2, H3))]
    if symmetry is SymmetryClass.SYMMETRIC:
        tau = SymmetryClass.SYMMETRIC
        for r, H in enumerate(Hs):
            if tau_residual(H, tau) > SYMMETRY_TOL * max(1.0, operator_norm(H)):
                raise WrongSymmetry(f"H{r + 1} is not complex symmetric")
    elif symmetry is SymmetryClass.SELF_DUAL:
        tau = SymmetryClass.SELF_DUAL
        for r, H in enumerate(Hs):
            if tau_residual(H, tau) > SYMMETRY_TOL * max(1.0, operator_norm(H)):
                raise WrongSymmetry(f"H{r + 1} is not self-dual")
    else:
        raise WrongSymmetry("extraction needs SYMMETRIC or SELF_DUAL class")

    S = bott_matrix(*Hs)
    if symmetry is SymmetryClass.SYMMETRIC:
        report = k2_quaternion_witness(S)
        anti_tau = dual
    else:
        report = k2_twisted_witness(S)  # NontrivialClass propagates
        anti_tau = sharp_sharp
    n = Hs[0].shape[0]
    rng = np.random.default_rng(seed)

    Wp = report.witness.conj().T  # rows of this carry the A, B blocks
    for attempt in range(max_retries + 1):
        A = Wp[:n, :n]
        B = Wp[:n, n:]
        smin = min(
            np.linalg.svd(A, compute_uv=False)[-1],
            np.linalg.svd(B, compute_uv=False)[-1],
        )
        if smin >= sigma_min_tol:
            break
        if attempt == max_retries:
            raise PerturbationFailed(
                f"witness blocks stayed singular after {max_retries} retries"
            )
        eps = 10.0 * max(sigma_min_tol - smin, sigma_min_tol)
        E = _structured_rotation(2 * n, anti_tau, rng, eps)
        Wp = E @ Wp

    U = polar(A).conj().T @ polar(B)
    K = Hs[2]
    comm = operator_norm(U @ K - K @ U)
    sym = tau_residual(U, tau)
    recon = operator_norm(U @ sqrt_psd(np.eye(n) - K @ K) - (Hs[0] + 1j * Hs[1]))
    return ExtractionResult(
        U=U,
        K=K,
        residuals={
            "commutator": float(comm),
            "tau": float(sym),
            "reconstruction": float(recon),
            "input": float(rel.delta),
            "witness_bound": float(report.bound),
        },
    )


def polar_product_check(a, b) -> float:
    """Diagnostic for the polar product identity.

    For invertible a, b with a a* + b b* = I the identity
    polar(a* b) = polar(a)* polar(b) holds; returns the left/right
    difference in operator norm (tiny when the hypotheses hold).
    """
    A = as_square(a, "a")
    B = as_square(b, "b")
    if A.shape != B.shape:
        raise HypothesisFailed("blocks differ in size")
    n = A.shape[0]
    if operator_norm(A @ A.conj().T + B @ B.conj().T - np.eye(n)) > SYMMETRY_TOL:
        raise HypothesisFailed("a a* + b b* is not the identity")
    for name, M in (("a", A), ("b", B)):
        if np.linalg.svd(M, compute_uv=False)[-1] < 1e-12:
            raise HypothesisFailed(f"{name} is singular")
    lhs = polar(A.conj().T @ B)
    rhs = polar(A).conj().T @ polar(B)
    return float(operator_norm(lhs - rhs))
