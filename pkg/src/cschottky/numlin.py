"""Dense complex linear algebra with an explicit tolerance policy.

Matrices are plain ``numpy`` complex arrays; this module adds the rank
conventions, subspace arithmetic and Lie-algebra helpers the geometric
modules share.  Ranks are always singular-value based, and a singular value
too close to the cutoff raises :class:`RankAmbiguous` instead of guessing.
"""

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BranchCut, NotDiagonalizable, RankAmbiguous, SchottkyError

# factor around the cutoff inside which a singular value is "ambiguous"
AMBIGUITY_FACTOR = 10.0


@dataclass(frozen=True)
class Tolerances:
    rank_rel: float = 1e-9
    orth: float = 1e-10
    cert_margin: float = 1e-3

    def __post_init__(self):
        eps = np.finfo(float).eps
        for name in ("rank_rel", "orth", "cert_margin"):
            value = getattr(self, name)
            if not (value > 0 and np.isfinite(value)):
                raise ValueError(f"tolerance {name} must be positive, got {value}")
            if value < eps:
                raise ValueError(f"tolerance {name}={value} is below machine epsilon")
        if self.rank_rel >= 1:
            raise ValueError("rank_rel must be < 1")

    def to_dict(self):
        return {"rank_rel": self.rank_rel, "orth": self.orth, "cert_margin": self.cert_margin}


DEFAULT_TOL = Tolerances()


def as_matrix(M) -> np.ndarray:
    """Validate and coerce to a finite complex 2-D array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def matrix_to_json(M) -> dict:
    A = as_matrix(M)
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        # + 0.0 drops signed zeros, so files survive a load/save cycle byte for byte
        "re": [float(x) + 0.0 for x in A.real.ravel()],
        "im": [float(x) + 0.0 for x in A.imag.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchottkyError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1 or re.size != rows * cols or im.size != rows * cols:
        raise SchottkyError("matrix object has inconsistent dimensions")
    return as_matrix((re + 1j * im).reshape(rows, cols))


def _check_ambiguous(s: np.ndarray, cutoff: float):
    if cutoff <= 0:
        return
    near = (s > cutoff / AMBIGUITY_FACTOR) & (s < cutoff * AMBIGUITY_FACTOR)
    if np.any(near):
        raise RankAmbiguous(
            f"singular value {s[near][0]:.3e} within a factor {AMBIGUITY_FACTOR:g} "
            f"of the rank cutoff {cutoff:.3e}"
        )


def rank_with_tol(M, tol: Tolerances = DEFAULT_TOL) -> int:
    """Numerical rank: singular values above ``rank_rel * s_max``."""
    A = as_matrix(M)
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    cutoff = tol.rank_rel * s[0]
    _check_ambiguous(s, cutoff)
    return int(np.count_nonzero(s > cutoff))


@dataclass(frozen=True)
class SubspaceBasis:
    """A linear subspace of C^N given by orthonormal columns."""

    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex)
        if B.ndim != 2:
            raise ValueError("basis must be a 2-D array")
        if B.shape[1] > B.shape[0]:
            raise ValueError("more basis vectors than ambient dimension")
        object.__setattr__(self, "basis", B)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def orthonormality_residual(self) -> float:
        k = self.dim
        if k == 0:
            return 0.0
        return float(np.abs(self.basis.conj().T @ self.basis - np.eye(k)).max())

    @classmethod
    def span(cls, M, tol: Tolerances = DEFAULT_TOL) -> "SubspaceBasis":
        """Orthonormal basis of the column span of ``M`` (rank decided by SVD)."""
        A = np.asarray(M, dtype=complex)
        if A.ndim == 1:
            A = A[:, None]
        if A.shape[1] == 0:
            return cls(np.zeros((A.shape[0], 0), dtype=complex))
        U, s, _ = np.linalg.svd(A, full_matrices=False)
        if s[0] == 0.0:
            return cls(np.zeros((A.shape[0], 0), dtype=complex))
        cutoff = tol.rank_rel * s[0]
        _check_ambiguous(s, cutoff)
        k = int(np.count_nonzero(s > cutoff))
        return cls(U[:, :k])

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def transformed(self, g, tol: Tolerances = DEFAULT_TOL) -> "SubspaceBasis":
        return SubspaceBasis.span(np.asarray(g) @ self.basis, tol)


def intersect_dim(A: SubspaceBasis, B: SubspaceBasis, tol: Tolerances = DEFAULT_TOL) -> int:
    """dim(span A ∩ span B) = k_A + k_B - rank [A | B]."""
    if A.ambient_dim != B.ambient_dim:
        raise ValueError("subspaces live in different ambient spaces")
    if A.dim == 0 or B.dim == 0:
        return 0
    stacked = np.hstack([A.basis, B.basis])
    return A.dim + B.dim - rank_with_tol(stacked, tol)


def bracket(X, Y):
    return X @ Y - Y @ X


def lie_closure(generators: Sequence, tol: Tolerances = DEFAULT_TOL) -> list:
    """Orthonormal basis (trace pairing) of the Lie algebra generated by ``generators``.

    Each round stacks the current basis with all brackets of basis elements
    and re-extracts an orthonormal basis of the span; the loop stops when the
    dimension no longer grows.  The dimension is bounded by N**2, which also
    bounds the number of rounds.
    """
    gens = [as_matrix(G) for G in generators]
    if not gens:
        return []
    N = gens[0].shape[0]
    if any(G.shape != (N, N) for G in gens):
        raise ValueError("generators must be square matrices of one size")

    def orth(columns):
        A = np.stack(columns, axis=1)
        s_scale = np.linalg.norm(A, axis=0).max()
        if s_scale == 0.0:
            return np.zeros((N * N, 0), dtype=complex)
        U, s, _ = np.linalg.svd(A, full_matrices=False)
        cutoff = tol.rank_rel * s[0]
        _check_ambiguous(s, cutoff)
        return U[:, : int(np.count_nonzero(s > cutoff))]

    Q = orth([G.ravel() for G in gens])
    for _ in range(N * N):
        mats = [Q[:, i].reshape(N, N) for i in range(Q.shape[1])]
        cols = [Q[:, i] for i in range(Q.shape[1])]
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                c = bracket(mats[i], mats[j]).ravel()
                if np.linalg.norm(c) > tol.rank_rel:
                    cols.append(c)
        Q_new = orth(cols)
        if Q_new.shape[1] == Q.shape[1]:
            Q = Q_new
            break
        Q = Q_new
    return [Q[:, i].reshape(N, N) for i in range(Q.shape[1])]


def span_projection_residual(basis: Sequence, X) -> float:
    """Norm of the component of X orthogonal to span(basis) (trace pairing)."""
    X = np.asarray(X, dtype=complex)
    if not basis:
        return float(np.linalg.norm(X))
    Q = np.stack([np.asarray(B).ravel() for B in basis], axis=1)
    x = X.ravel()
    r = x - Q @ (Q.conj().T @ x)
    return float(np.linalg.norm(r))


def matrix_log_semisimple(g, tol: Tolerances = DEFAULT_TOL, branch_offset: float = 0.0):
    """Principal logarithm of a diagonalizable matrix via its eigendecomposition.

    ``branch_offset`` rotates the branch cut from the negative real axis to the
    ray of angle ``pi + branch_offset``.
    """
    G = as_matrix(g)
    if G.shape[0] != G.shape[1]:
        raise ValueError("matrix_log_semisimple needs a square matrix")
    w, V = np.linalg.eig(G)
    if np.any(w == 0):
        raise NotDiagonalizable("singular matrix has no logarithm")
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > 1.0 / tol.rank_rel:
        raise NotDiagonalizable(f"eigenvector matrix condition number {cond:.3e}")
    rot = np.exp(-1j * branch_offset)
    wr = w * rot
    on_cut = (wr.real < 0) & (np.abs(wr.imag) < 1e-6)
    if np.any(on_cut):
        raise BranchCut(f"eigenvalue {w[on_cut][0]} lies on the branch cut")
    logs = np.log(wr) + 1j * branch_offset
    return V @ np.diag(logs) @ np.linalg.inv(V)


def normalize_det(g) -> np.ndarray:
    """Scale a square matrix to unit determinant magnitude."""
    G = as_matrix(g)
    d = abs(np.linalg.det(G))
    if d == 0:
        raise ValueError("singular matrix")
    return G / d ** (1.0 / G.shape[0])


def projective_distance(g, h) -> float:
    """Distance between two matrices modulo scalars (after Frobenius normalization)."""
    a = np.asarray(g, dtype=complex).ravel()
    b = np.asarray(h, dtype=complex).ravel()
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    phase = np.vdot(a, b)
    if abs(phase) > 0:
        b = b * np.conj(phase) / abs(phase)
    return float(np.linalg.norm(a - b))


def distance_from_scalars(g) -> float:
    """Frobenius distance of g/||g|| from the line of scalar matrices."""
    G = as_matrix(g)
    G = G / np.linalg.norm(G)
    N = G.shape[0]
    c = np.trace(G) / N
    return float(np.linalg.norm(G - c * np.eye(N)))


def null_space(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ker M as columns."""
    A = as_matrix(M)
    _, s, Vh = np.linalg.svd(A)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(A.shape[1], dtype=complex)
    cutoff = tol.rank_rel * s[0]
    _check_ambiguous(s, cutoff)
    r = int(np.count_nonzero(s > cutoff))
    return Vh[r:].conj().T


def stack_columns(mats: Iterable) -> np.ndarray:
    return np.stack([np.asarray(m).ravel() for m in mats], axis=1)
