"""Shared random generators for structured matrices.

Seeded construction only; every test passes its own rng so reruns are
reproducible.
"""

import numpy as np
import pytest

from acbott.symmetry import SymmetryClass, dual, sharp_sharp, symmetrize


@pytest.fixture
def rng():
    return np.random.default_rng(20240803)


def random_complex(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_hermitian(rng, n):
    G = random_complex(rng, n)
    return (G + G.conj().T) / 2


def random_unitary(rng, n):
    Q, R = np.linalg.qr(random_complex(rng, n))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_real_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_selfdual_hermitian(rng, half):
    """Self-dual Hermitian of size 2*half."""
    return symmetrize(random_hermitian(rng, 2 * half), SymmetryClass.SELF_DUAL)


def random_antiselfdual_hermitian(rng, half):
    H = random_hermitian(rng, 2 * half)
    return (H - dual(H)) / 2


def random_real_symmetric(rng, n):
    G = rng.standard_normal((n, n))
    return ((G + G.T) / 2).astype(complex)


def expm_antihermitian(G):
    """exp(G) for anti-Hermitian G via the Hermitian eigenproblem of iG."""
    w, V = np.linalg.eigh(1j * np.asarray(G))
    return (V * np.exp(-1j * w)) @ V.conj().T


def random_symplectic_unitary(rng, half):
    """Unitary W of size 2*half with W-dual = W*, as exp of a structured
    anti-Hermitian generator."""
    G = random_complex(rng, 2 * half)
    G = (G - G.conj().T) / 2
    G = (G - dual(G)) / 2
    return expm_antihermitian(G)


def random_coupled_unitary(rng, quarter):
    """Unitary W of size 4*quarter with sharp_sharp(W) = W*."""
    G = random_complex(rng, 4 * quarter)
    G = (G - G.conj().T) / 2
    G = (G - sharp_sharp(G)) / 2
    return expm_antihermitian(G)


def commuting_sphere_triple(rng, n, conjugate=None):
    """Exactly commuting Hermitian triple with H1^2 + H2^2 + H3^2 = I,
    conjugated by the given unitary (defaults to a Haar unitary)."""
    pts = rng.standard_normal((3, n))
    pts /= np.linalg.norm(pts, axis=0)
    Q = random_unitary(rng, n) if conjugate is None else conjugate
    return tuple((Q * pts[r]) @ Q.conj().T for r in range(3))


def commuting_symmetric_triple(rng, n):
    """Exactly commuting real symmetric sphere triple."""
    pts = rng.standard_normal((3, n))
    pts /= np.linalg.norm(pts, axis=0)
    Q = random_real_orthogonal(rng, n)
    return tuple(((Q * pts[r]) @ Q.T).astype(complex) for r in range(3))


def commuting_selfdual_triple(rng, half):
    """Exactly commuting self-dual sphere triple of size 2*half: paired
    diagonal sphere points conjugated by a symplectic unitary."""
    pts = rng.standard_normal((3, half))
    pts /= np.linalg.norm(pts, axis=0)
    W = random_symplectic_unitary(rng, half)
    out = []
    for r in range(3):
        D = np.diag(np.concatenate([pts[r], pts[r]])).astype(complex)
        out.append(W @ D @ W.conj().T)
    return tuple(out)


def selfdual_direct_sum(A, B):
    """Direct sum of self-dual matrices respecting the paired layout."""
    ha, hb = A.shape[0] // 2, B.shape[0] // 2

    def quadrant(M, i, j):
        h = M.shape[0] // 2
        return M[i * h:(i + 1) * h, j * h:(j + 1) * h]

    rows = []
    for i in (0, 1):
        row = []
        for j in (0, 1):
            blockA = quadrant(A, i, j)
            blockB = quadrant(B, i, j)
            row.append(np.block([
                [blockA, np.zeros((ha, hb))],
                [np.zeros((hb, ha)), blockB],
            ]))
        rows.append(row)
    return np.block(rows)
