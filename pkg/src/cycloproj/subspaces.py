"""Systems of subspaces of C^d: projectors, intersections, Dixmier/Friedrichs numbers."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import eig_hermitian, eigvalsh, hermitian, operator_norm

INTERSECTION_TOL = 1e-8
RANK_TOL = 1e-12


def orthonormalize(vectors, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Columns whose residual norm drops below ``rank_tol`` are discarded.
    """
    X = np.asarray(vectors, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    d = X.shape[0]
    Q = np.zeros((d, 0), dtype=complex)
    for k in range(X.shape[1]):
        v = X[:, k].copy()
        for _ in range(2):
            for j in range(Q.shape[1]):
                v -= np.vdot(Q[:, j], v) * Q[:, j]
        nv = np.linalg.norm(v)
        if nv > rank_tol:
            Q = np.column_stack([Q, v / nv])
    return Q


@dataclass(frozen=True)
class Subspace:
    basis: np.ndarray  # d x k, orthonormal columns

    @classmethod
    def span(cls, vectors, ambient_dim: int | None = None) -> "Subspace":
        X = np.asarray(vectors, dtype=complex)
        if X.ndim == 1:
            X = X[:, None]
        if X.size == 0:
            if ambient_dim is None:
                raise ValueError("ambient_dim is required for the trivial subspace")
            return cls(np.zeros((ambient_dim, 0), dtype=complex))
        return cls(orthonormalize(X))

    @classmethod
    def from_projector(cls, P, tol: float = 0.5) -> "Subspace":
        dec = eig_hermitian(P)
        return cls(dec.eigenvectors[:, dec.eigenvalues > tol])

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return projector(self)


@dataclass(frozen=True)
class SubspaceSystem:
    ambient_dim: int
    subspaces: tuple

    def __post_init__(self):
        if len(self.subspaces) < 2:
            raise ValueError("a subspace system needs at least two subspaces")
        for S in self.subspaces:
            if S.ambient_dim != self.ambient_dim:
                raise ValueError(f"subspace lives in C^{S.ambient_dim}, system in C^{self.ambient_dim}")

    @classmethod
    def from_spans(cls, spans, ambient_dim: int | None = None) -> "SubspaceSystem":
        subs = tuple(Subspace.span(v, ambient_dim) for v in spans)
        return cls(subs[0].ambient_dim if ambient_dim is None else ambient_dim, subs)

    @property
    def n(self) -> int:
        return len(self.subspaces)

    def projectors(self) -> list[np.ndarray]:
        return [projector(S) for S in self.subspaces]

    def transformed(self, U) -> "SubspaceSystem":
        U = np.asarray(U, dtype=complex)
        return SubspaceSystem(self.ambient_dim, tuple(Subspace(U @ S.basis) for S in self.subspaces))

    def permuted(self, order) -> "SubspaceSystem":
        return SubspaceSystem(self.ambient_dim, tuple(self.subspaces[i] for i in order))

    def to_json(self) -> dict:
        # each subspace: basis entries flattened column-major as [re, im] pairs
        return {
            "ambient_dim": self.ambient_dim,
            "subspaces": [
                [[float(z.real), float(z.imag)] for z in S.basis.flatten(order="F")]
                for S in self.subspaces
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SubspaceSystem":
        d = int(data["ambient_dim"])
        spans = []
        for entries in data["subspaces"]:
            z = np.array([complex(re, im) for re, im in entries], dtype=complex)
            if z.size % d:
                raise ValueError(f"subspace has {z.size} entries, not a multiple of ambient_dim={d}")
            spans.append(z.reshape((d, z.size // d), order="F"))
        return cls.from_spans(spans, ambient_dim=d)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path) -> "SubspaceSystem":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class AngleReport:
    dixmier: float
    friedrichs: float
    intersection_dim: int


def projector(S: Subspace) -> np.ndarray:
    B = S.basis
    return hermitian(B @ B.conj().T)


def projector_sum(sys: SubspaceSystem) -> np.ndarray:
    return hermitian(sum(sys.projectors()))


def intersection_projector(sys: SubspaceSystem, tol: float = INTERSECTION_TOL) -> np.ndarray:
    """Projector onto H_1 ∩ ... ∩ H_n, the eigenspace of ΣP_i at eigenvalue n."""
    dec = eig_hermitian(projector_sum(sys))
    V = dec.eigenvectors[:, dec.eigenvalues >= sys.n - tol]
    return hermitian(V @ V.conj().T)


def _clamp01(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


def dixmier_number(sys: SubspaceSystem) -> float:
    return _clamp01((operator_norm(projector_sum(sys)) - 1.0) / (sys.n - 1))


def friedrichs_number(sys: SubspaceSystem) -> float:
    P0 = intersection_projector(sys)
    return _clamp01((operator_norm(projector_sum(sys) - sys.n * P0) - 1.0) / (sys.n - 1))


def dixmier_by_definition(sys: SubspaceSystem) -> float:
    """Dixmier number as the supremum of the defining quotient.

    With x_i = B_i y_i the quotient ‖Σx_i‖²/Σ‖x_i‖² is the Rayleigh quotient
    of the block Gram matrix S*S, S = [B_1 ... B_n]; its top eigenvalue is
    1 + (n-1) c_D.  Unclamped, so it can be compared to the projector route.
    """
    S = np.hstack([Sub.basis for Sub in sys.subspaces])
    if S.shape[1] == 0:
        return 0.0
    lam = eigvalsh(S.conj().T @ S)[-1]
    return float((lam - 1.0) / (sys.n - 1))


def compressed(sys: SubspaceSystem) -> SubspaceSystem:
    """Replace every H_i by H_i ⊖ H_0."""
    P0 = intersection_projector(sys)
    subs = tuple(Subspace.from_projector(P - P0) for P in sys.projectors())
    return SubspaceSystem(sys.ambient_dim, subs)


def angle_report(sys: SubspaceSystem) -> AngleReport:
    P0 = intersection_projector(sys)
    return AngleReport(
        dixmier=dixmier_number(sys),
        friedrichs=friedrichs_number(sys),
        intersection_dim=int(round(np.trace(P0).real)),
    )


def line(angle: float) -> Subspace:
    """The line spanned by (cos a, sin a) in C^2."""
    return Subspace(np.array([[np.cos(angle)], [np.sin(angle)]], dtype=complex))


def lines_system(angles) -> SubspaceSystem:
    return SubspaceSystem(2, tuple(line(a) for a in angles))


def random_subspace(rng: np.random.Generator, ambient_dim: int, dim: int) -> Subspace:
    X = rng.normal(size=(ambient_dim, dim)) + 1j * rng.normal(size=(ambient_dim, dim))
    Q, _ = np.linalg.qr(X)
    return Subspace(Q[:, :dim])


def random_system(
    rng: np.random.Generator,
    n: int,
    ambient_dim: int,
    dims=None,
    common_dim: int = 0,
) -> SubspaceSystem:
    """Random system; ``common_dim`` > 0 plants a shared subspace in every H_i."""
    if dims is None:
        dims = [int(rng.integers(1, ambient_dim)) if ambient_dim > 1 else 1 for _ in range(n)]
    common = random_subspace(rng, ambient_dim, common_dim).basis if common_dim else np.zeros((ambient_dim, 0))
    subs = []
    for k in dims:
        extra = rng.normal(size=(ambient_dim, k)) + 1j * rng.normal(size=(ambient_dim, k))
        subs.append(Subspace.span(np.hstack([common, extra]), ambient_dim))
    return SubspaceSystem(ambient_dim, tuple(subs))
