"""Residual evaluators for the soft sphere, torus, and disk relations.

Each evaluator measures how far a tuple is from an exact representation:
the report carries every labelled constraint residual, and delta is their
maximum, so a tuple satisfies the relation at level delta and no better.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch
from .matkernel import as_square, is_diagonal, operator_norm


@dataclass(frozen=True)
class RelationReport:
    """delta is the max over per_term; worst_term names the maximizer."""

    relation: str
    delta: float
    worst_term: str
    per_term: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "relation": self.relation,
            "delta": self.delta,
            "worst_term": self.worst_term,
            "per_term": dict(self.per_term),
        }


def _same_sizes(mats, names) -> list[np.ndarray]:
    out = [as_square(M, name) for M, name in zip(mats, names)]
    shapes = {M.shape for M in out}
    if len(shapes) > 1:
        raise ShapeMismatch(f"sizes differ: {sorted(shapes)}")
    return out


def _build(relation: str, terms: dict[str, float]) -> RelationReport:
    worst = max(terms, key=terms.get)
    return RelationReport(
        relation=relation,
        delta=terms[worst],
        worst_term=worst,
        per_term=terms,
    )


def _herm_terms(mats, names) -> dict[str, float]:
    return {
        f"herm_{name}": operator_norm(M - M.conj().T)
        for M, name in zip(mats, names)
    }


def _comm_terms(mats, names) -> dict[str, float]:
    terms = {}
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            terms[f"comm_{names[i]}{names[j]}"] = operator_norm(
                mats[i] @ mats[j] - mats[j] @ mats[i]
            )
    return terms


def sphere_residual(H1, H2, H3) -> RelationReport:
    """Smallest delta for which (H1, H2, H3) satisfies the soft sphere
    relations: Hermitian, pairwise commutators <= delta, and
    ||H1^2 + H2^2 + H3^2 - I|| <= delta."""
    Hs = _same_sizes((H1, H2, H3), ("1", "2", "3"))
    n = Hs[0].shape[0]
    terms = _herm_terms(Hs, "123")
    terms.update(_comm_terms(Hs, "123"))
    terms["sphere_eq"] = operator_norm(
        Hs[0] @ Hs[0] + Hs[1] @ Hs[1] + Hs[2] @ Hs[2] - np.eye(n)
    )
    return _build("Sphere", terms)


def torus2_residual(U1, U2) -> RelationReport:
    """Smallest delta for the two-unitary torus relations: unitarity
    residuals and the commutator norm."""
    Us = _same_sizes((U1, U2), ("1", "2"))
    n = Us[0].shape[0]
    terms = {
        f"unitary_{i + 1}": operator_norm(U.conj().T @ U - np.eye(n))
        for i, U in enumerate(Us)
    }
    terms["comm_12"] = operator_norm(Us[0] @ Us[1] - Us[1] @ Us[0])
    return _build("Torus2", terms)


def torus4_residual(X1, X2, X3, X4) -> RelationReport:
    """Smallest delta for the four-Hermitian torus relations: Hermitianity,
    all pairwise commutators, and the two circle equations
    X1^2 + X2^2 = I and X3^2 + X4^2 = I.

    Exactly diagonal tuples (the usual lattice position matrices) are
    evaluated entrywise, which is both exact and O(n) instead of O(n^3).
    """
    Xs = _same_sizes((X1, X2, X3, X4), ("1", "2", "3", "4"))
    n = Xs[0].shape[0]
    if all(is_diagonal(X) for X in Xs):
        ds = [np.diagonal(X) for X in Xs]
        terms = {
            f"herm_{i + 1}": float(2.0 * np.abs(d.imag).max(initial=0.0))
            for i, d in enumerate(ds)
        }
        for i in range(4):
            for j in range(i + 1, 4):
                terms[f"comm_{i + 1}{j + 1}"] = 0.0
        terms["circle_12"] = float(np.abs(ds[0] ** 2 + ds[1] ** 2 - 1.0).max())
        terms["circle_34"] = float(np.abs(ds[2] ** 2 + ds[3] ** 2 - 1.0).max())
        return _build("Torus4", terms)
    terms = _herm_terms(Xs, "1234")
    terms.update(_comm_terms(Xs, "1234"))
    terms["circle_12"] = operator_norm(Xs[0] @ Xs[0] + Xs[1] @ Xs[1] - np.eye(n))
    terms["circle_34"] = operator_norm(Xs[2] @ Xs[2] + Xs[3] @ Xs[3] - np.eye(n))
    return _build("Torus4", terms)


def disk_residual(X1, X2) -> RelationReport:
    """Smallest delta for the disk relations: Hermitian contractions with a
    small commutator.  Norm excess enters as max(0, ||X_r|| - 1)."""
    Xs = _same_sizes((X1, X2), ("1", "2"))
    terms = _herm_terms(Xs, "12")
    terms["comm_12"] = operator_norm(Xs[0] @ Xs[1] - Xs[1] @ Xs[0])
    for i, X in enumerate(Xs):
        terms[f"contraction_{i + 1}"] = max(0.0, operator_norm(X) - 1.0)
    return _build("Disk", terms)
