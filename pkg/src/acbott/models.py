"""Generators for the example systems.

The shift/clock pair is the canonical almost commuting unitary pair with
nontrivial Bott index; pairing it blockwise with its transpose produces
the self-dual example whose Bott index cancels but whose Pfaffian-Bott
sign survives.  The lattice side provides exact diagonal torus position
matrices and Fermi projections of a magnetic nearest-neighbor hopping
model on the discrete two-torus.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import NoGap, ShapeMismatch, ValidationError
from .matkernel import as_square

GAP_EXCLUSION = 1e-6


@dataclass(frozen=True)
class LatticeSpec:
    """Square lattice on a discrete two-torus: L x L sites, a uniform flux
    per plaquette, a Fermi level, and 1 or 2 orbitals per site (2 selects
    the time-reversal doubled, self-dual construction)."""

    L: int
    flux: float = 0.0
    fermi_level: float = 0.0
    orbitals: int = 1

    def __post_init__(self):
        if self.L < 2:
            raise ValidationError(f"L must be >= 2, got {self.L}")
        if not 0.0 <= self.flux < 1.0:
            raise ValidationError(f"flux must lie in [0, 1), got {self.flux}")
        if self.orbitals not in (1, 2):
            raise ValidationError(f"orbitals must be 1 or 2, got {self.orbitals}")

    @property
    def sites(self) -> int:
        return self.L * self.L

    @classmethod
    def from_file(cls, path) -> "LatticeSpec":
        """Read a flat key=value config (keys: L, flux, fermi_level, orbitals).

        flux accepts a fraction like 1/3 or a float.
        """
        values: dict[str, str] = {}
        for raw in Path(path).read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"bad config line: {raw!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key] = val
        try:
            return cls(
                L=int(values["L"]),
                flux=parse_flux(values.get("flux", "0")),
                fermi_level=float(values.get("fermi_level", "0")),
                orbitals=int(values.get("orbitals", "1")),
            )
        except KeyError as exc:
            raise ValidationError(f"config missing key {exc}") from exc


def parse_flux(text: str) -> float:
    """Parse a flux value given as a float or a fraction p/q."""
    text = str(text).strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def voiculescu(n: int) -> tuple[np.ndarray, np.ndarray]:
    """The cyclic shift and the clock: A has ones on the subdiagonal and
    the upper-right corner, B = diag(exp(2 pi i k / n)) for k = 1..n.
    Both exactly unitary; ||[A, B]|| = |exp(2 pi i / n) - 1|."""
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}")
    A = np.zeros((n, n), dtype=complex)
    A[0, n - 1] = 1.0
    for i in range(1, n):
        A[i, i - 1] = 1.0
    B = np.diag(np.exp(2j * np.pi * np.arange(1, n + 1) / n))
    return A, B


def selfdual_double(U1, U2) -> tuple[np.ndarray, np.ndarray]:
    """Pair a two-matrix example with its transpose: blockdiag(U, U^T).

    The result is exactly self-dual for the size-matched symplectic form
    and preserves unitarity and commutators.
    """
    A = as_square(U1, "U1")
    B = as_square(U2, "U2")
    if A.shape != B.shape:
        raise ShapeMismatch("pair has mismatched sizes")
    n = A.shape[0]
    O = np.zeros((n, n), dtype=complex)
    return (
        np.block([[A, O], [O, A.T]]),
        np.block([[B, O], [O, B.T]]),
    )


def _site_angles(L: int) -> tuple[np.ndarray, np.ndarray]:
    # site index s = x * L + y
    x = np.repeat(np.arange(L), L)
    y = np.tile(np.arange(L), L)
    return 2 * np.pi * x / L, 2 * np.pi * y / L


def torus_positions(spec: LatticeSpec) -> tuple[np.ndarray, ...]:
    """Exact diagonal torus positions over the lattice sites:

        X1 = cos(2 pi x / L), X2 = sin(2 pi x / L),
        X3 = cos(2 pi y / L), X4 = sin(2 pi y / L).

    They commute and satisfy both circle equations exactly.  With two
    orbitals the diagonal values are duplicated across the time-reversal
    pairing blocks, making each matrix self-dual.
    """
    ax, ay = _site_angles(spec.L)
    values = [np.cos(ax), np.sin(ax), np.cos(ay), np.sin(ay)]
    if spec.orbitals == 2:
        values = [np.concatenate([v, v]) for v in values]
    return tuple(np.diag(v).astype(complex) for v in values)


def harper_hamiltonian(L: int, flux: float) -> np.ndarray:
    """Magnetic nearest-neighbor hopping on the L x L torus: unit hops in
    x, Peierls phase exp(2 pi i flux x) on hops in y, so every plaquette
    encloses the given flux (exactly uniform when the denominator of the
    flux divides L)."""
    n = L * L
    H = np.zeros((n, n), dtype=complex)
    idx = lambda x, y: x * L + y  # noqa: E731 - index helper
    for x in range(L):
        for y in range(L):
            H[idx((x + 1) % L, y), idx(x, y)] -= 1.0
            H[idx(x, (y + 1) % L), idx(x, y)] -= np.exp(2j * np.pi * flux * x)
    return H + H.conj().T


def harper_projection(spec: LatticeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Fermi projection of the magnetic hopping model.

    Returns (P, H).  The Fermi level must sit in a spectral gap: if it
    falls within 1e-6 of an eigenvalue, NoGap is raised.  With two
    orbitals the doubled blockdiag(H, conj(H)) construction is used, whose
    projection blockdiag(P, conj(P)) is exactly self-dual.
    """
    H = harper_hamiltonian(spec.L, spec.flux)
    w, V = np.linalg.eigh(H)
    below = w < spec.fermi_level
    k = int(below.sum())
    if k == 0 or k == len(w):
        raise NoGap(f"fermi level {spec.fermi_level} is outside the spectrum")
    if np.min(np.abs(w - spec.fermi_level)) < GAP_EXCLUSION:
        raise NoGap(
            f"fermi level {spec.fermi_level} is within {GAP_EXCLUSION} of the spectrum"
        )
    occ = V[:, :k]
    P = occ @ occ.conj().T
    P = (P + P.conj().T) / 2
    if spec.orbitals == 2:
        O = np.zeros_like(P)
        P = np.block([[P, O], [O, P.conj()]])
        H = np.block([[H, O], [O, H.conj()]])
    return P, H


def gap_levels(L: int, flux: float, fillings) -> list[float]:
    """Mid-gap Fermi levels for the given band fillings (fraction of states
    below, as k-th order statistics).  Raises NoGap for closed gaps."""
    w = np.linalg.eigvalsh(harper_hamiltonian(L, flux))
    levels = []
    for fill in fillings:
        k = int(round(fill * len(w)))
        if k <= 0 or k >= len(w):
            raise NoGap(f"filling {fill} leaves no states on one side")
        if w[k] - w[k - 1] < 2 * GAP_EXCLUSION:
            raise NoGap(f"no gap at filling {fill} (width {w[k] - w[k - 1]:.2e})")
        levels.append(float((w[k] + w[k - 1]) / 2))
    return levels
