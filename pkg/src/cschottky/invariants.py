"""Invariants of the quotient of the domain of discontinuity.

The numerical parts are the Ad-fixed subalgebra, the Lie algebra of the
Zariski closure and the generic orbit codimension of that algebra.  The
topological descriptors are closed-form values that hold under the stated
hypotheses; they are reported, not computed.
"""

from dataclasses import dataclass, field
from typing import List

import mpmath as mp
import numpy as np

from .errors import MapUndefined, RankAmbiguous
from .geom import FlagModel, _pairing
from .numlin import (DEFAULT_TOL, Tolerances, bracket, lie_closure, null_space, projective_distance,
                     rank_with_tol)
from .schottky import SchottkyGroupSpec, column_stack_permutation, reduce_word, word_matrix

OUTSIDE = "outside cohomology-extension hypotheses"
NOT_COMPUTED_CODIM = "not computed (codim < 2)"


@dataclass
class LieSubalgebra:
    size: int
    basis: List[np.ndarray] = field(repr=False)

    @property
    def dim(self):
        return len(self.basis)

    def closure_residual(self) -> float:
        """Largest component of a bracket of basis elements outside the span."""
        if not self.basis:
            return 0.0
        Q = np.stack([b.ravel() for b in self.basis], axis=1)
        Q, _ = np.linalg.qr(Q)
        worst = 0.0
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                c = bracket(self.basis[i], self.basis[j]).ravel()
                worst = max(worst, float(np.linalg.norm(c - Q @ (Q.conj().T @ c))))
        return worst


def _unit_generators(group: SchottkyGroupSpec):
    """Generators scaled to unit determinant magnitude."""
    N = group.model.ambient_dim
    out = []
    for j in range(1, group.r + 1):
        g = group.generator(j)
        out.append(g / abs(np.linalg.det(g)) ** (1.0 / N))
    return out


def fixed_subalgebra(group: SchottkyGroupSpec, tol: Tolerances = DEFAULT_TOL) -> LieSubalgebra:
    """Kernel of xi -> (Ad(gamma_j) xi - xi)_j on the model's Lie algebra."""
    basis = group.model.algebra_basis()
    N = group.model.ambient_dim
    if group.r == 0:
        return LieSubalgebra(N, basis)
    blocks = []
    for g in _unit_generators(group):
        ginv = np.linalg.inv(g)
        scale = np.linalg.norm(g, 2) * np.linalg.norm(ginv, 2)
        cols = [((g @ E @ ginv) - E).ravel() / scale for E in basis]
        blocks.append(np.stack(cols, axis=1))
    M = np.vstack(blocks)
    K = null_space(M, tol)
    fixed = [sum(c * E for c, E in zip(K[:, i], basis)) for i in range(K.shape[1])]
    return LieSubalgebra(N, fixed)


def kuranishi_dimension(group: SchottkyGroupSpec, fixed: LieSubalgebra = None,
                        tol: Tolerances = DEFAULT_TOL) -> int:
    fixed = fixed if fixed is not None else fixed_subalgebra(group, tol)
    return (group.r - 1) * group.model.algebra_dim + fixed.dim


def zariski_closure_algebra(group: SchottkyGroupSpec, tol: Tolerances = DEFAULT_TOL) -> LieSubalgebra:
    """Lie algebra generated by the tori f_j exp(C xi0) f_j^-1."""
    N = group.model.ambient_dim
    if group.r == 0:
        return LieSubalgebra(N, [])
    xi = group.core.xi0
    gens = [f @ xi @ np.linalg.inv(f) for f in group.moves]
    return LieSubalgebra(N, lie_closure(gens, tol))


def left_factor_algebra(model: FlagModel) -> LieSubalgebra:
    """Algebra of the left factor: sl(2) x 1 on C^{2 x (n+1)}, or so(4) x 1 on C^{4 x m}."""
    if model.variant == "ProjOdd":
        sl2 = [np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]]), np.array([[1, 0], [0, -1]])]
        return LieSubalgebra(model.ambient_dim,
                             [np.kron(X, np.eye(model.n + 1)).astype(complex) for X in sl2])
    if model.variant == "QuadricEven" and model.n % 2 == 0:
        m = model.n // 2
        S4inv = np.linalg.inv(_pairing(2))
        P = column_stack_permutation(m)
        out = []
        for i in range(4):
            for j in range(i + 1, 4):
                E = np.zeros((4, 4))
                E[i, j], E[j, i] = 1, -1
                out.append((P @ np.kron(np.eye(m), S4inv @ E) @ P.T).astype(complex))
        return LieSubalgebra(model.ambient_dim, out)
    raise ValueError("no left-factor algebra for this model")


def _tangent_images(model: FlagModel, basis, x):
    """Fundamental vector fields of the basis at x, as columns."""
    if model.is_grassmannian:
        P = model.projector(x)
        Q = np.eye(model.ambient_dim) - P
        return np.stack([(Q @ E @ x).ravel() for E in basis], axis=1)
    v = x / np.linalg.norm(x)
    Q = np.eye(model.ambient_dim) - np.outer(v, v.conj())
    return np.stack([Q @ E @ v for E in basis], axis=1)


def generic_orbit_dim(h: LieSubalgebra, model: FlagModel, n_samples=20, seed=0,
                      tol: Tolerances = DEFAULT_TOL) -> int:
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if h.dim == 0:
        return 0
    rng = np.random.default_rng(seed)
    pts = model.sample(rng, n_samples)
    best = 0
    ambiguous = 0
    for x in pts:
        try:
            best = max(best, rank_with_tol(_tangent_images(model, h.basis, x), tol))
        except RankAmbiguous:
            ambiguous += 1
    if ambiguous == n_samples:
        raise RankAmbiguous("orbit rank ambiguous at every sample")
    return best


def generic_orbit_codim(h: LieSubalgebra, model: FlagModel, n_samples=20, seed=0,
                        tol: Tolerances = DEFAULT_TOL) -> int:
    return model.complex_dimension - generic_orbit_dim(h, model, n_samples, seed, tol)


# topology ---------------------------------------------------------------------


def cohomology_extension_applies(model: FlagModel, r: int) -> bool:
    """Models and ranks for which the cohomology of the quotient reduces to group cohomology."""
    if r < 2:
        return False
    n = model.n
    if model.variant == "ProjOdd":
        return n >= 3
    if model.variant == "QuadricEven":
        # Q_{4k+2} with k >= 2
        return n % 2 == 0 and n >= 6
    if model.variant == "QuadricOdd":
        return n >= 4
    return n >= 4


@dataclass
class InvariantReport:
    r: int
    model: str
    dim_X: int
    dim_g: int
    dim_g_fixed: int
    kuranishi_dim: int
    zariski_dim: int
    generic_orbit_dim: int
    algebraic_dim_estimate: int
    samples: int
    core_codim: int
    picard: object
    h1_O_rank: object
    h2_rank: object
    pi1: str
    kodaira: str = "-inf"
    kaehler: object = False
    rationally_connected: bool = True
    kuranishi_status: str = "computed"
    notes: dict = field(default_factory=dict)

    def to_json(self):
        return dict(self.__dict__)


def topology_report(group: SchottkyGroupSpec, n_samples=20, seed=0,
                    tol: Tolerances = DEFAULT_TOL) -> InvariantReport:
    model = group.model
    r = group.r
    fixed = fixed_subalgebra(group, tol)
    kur = kuranishi_dimension(group, fixed, tol)
    h = zariski_closure_algebra(group, tol)
    orbit = generic_orbit_dim(h, model, n_samples, seed, tol)
    inside = cohomology_extension_applies(model, r)
    codim = model.core_codim
    if inside:
        picard, h1, h2 = {"torus_rank": r, "free_rank": 1}, r, 1
    else:
        picard, h1, h2 = OUTSIDE, OUTSIDE, OUTSIDE
    big = codim >= 2
    return InvariantReport(
        r=r,
        model=model.label,
        dim_X=model.complex_dimension,
        dim_g=model.algebra_dim,
        dim_g_fixed=fixed.dim,
        kuranishi_dim=kur,
        zariski_dim=h.dim,
        generic_orbit_dim=orbit,
        algebraic_dim_estimate=model.complex_dimension - orbit,
        samples=n_samples,
        core_codim=codim,
        picard=picard,
        h1_O_rank=h1,
        h2_rank=h2,
        pi1=f"free of rank {r}" if big else NOT_COMPUTED_CODIM,
        kaehler=False if big else NOT_COMPUTED_CODIM,
        kuranishi_status="computed" if inside else f"computed; {OUTSIDE}",
        notes={
            "zariski_closure": "identity component only (Lie algebra of the closure)",
            "algebraic_dimension": "estimate: generic orbit codimension, max rank over samples",
            "kodaira_rational_connectedness": "reported constants, not computed",
            "picard_h1_h2": "closed-form values, asserted only inside the hypotheses",
        },
    )


# invariant rational maps ----------------------------------------------------------


def _minors(x, rows=2):
    Z = np.asarray(x).reshape(rows, -1)
    cols = Z.shape[1]
    out = []
    for a in range(cols):
        for b in range(a + 1, cols):
            out.append(Z[0, a] * Z[1, b] - Z[0, b] * Z[1, a])
    return np.array(out)


def gram_image(model: FlagModel, x):
    """[b(z_i, z_j)]_{i<=j} for the columns of the C^{4 x m} matrix behind a QuadricEven point."""
    m = model.n // 2
    P = column_stack_permutation(m)
    Z = (P.T @ np.asarray(x)).reshape(m, 4).T
    S4 = _pairing(2)
    G = Z.T @ S4 @ Z
    return np.array([G[i, j] for i in range(m) for j in range(i, m)])


def _random_words(rng, r, count, max_len=3):
    out = []
    for _ in range(count):
        L = int(rng.integers(1, max_len + 1))
        letters = [(int(rng.integers(1, r + 1)), int(rng.choice([-1, 1]))) for _ in range(L)]
        out.append(reduce_word(letters))
    return out


def _to_mp(a):
    return np.vectorize(lambda v: mp.mpc(complex(v)), otypes=[object])(np.asarray(a))


def _mp_projective_distance(a, b):
    na = mp.sqrt(mp.fsum(abs(v) ** 2 for v in a))
    nb = mp.sqrt(mp.fsum(abs(v) ** 2 for v in b))
    a, b = a / na, b / nb
    phase = mp.fsum(mp.conj(u) * v for u, v in zip(a, b))
    if abs(phase) > 0:
        b = b * mp.conj(phase) / abs(phase)
    return float(mp.sqrt(mp.fsum(abs(u - v) ** 2 for u, v in zip(a, b))))


def verify_rational_invariance(group: SchottkyGroupSpec, map_kind: str, n_samples=100, seed=0,
                               max_word_len=3, dps=30) -> float:
    """Largest residual of the invariance of a rational map (or commutation) under the group.

    map_kind: 'minors' (2 x 2 minors on C^{2 x (n+1)}), 'gram' (Gram matrix of the
    columns of C^{4 x m}), or 'right-commute' (commutation with right
    multiplication on C^{2 x (n+1)}).

    Images under a word of length L sit within |lambda|^-L of a core, where the
    map values cancel, so words and maps are evaluated with ``dps`` digits
    starting from the double-precision generators.
    """
    model = group.model
    rng = np.random.default_rng(seed)
    if group.r == 0:
        return 0.0
    words = _random_words(rng, group.r, n_samples, max_word_len)
    worst = 0.0
    if map_kind == "right-commute":
        k = model.n + 1
        for w in words:
            g = word_matrix(group, w)
            h = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
            R = np.kron(np.eye(2), h.T)
            c = g @ R - R @ g
            worst = max(worst, float(np.linalg.norm(c) / (np.linalg.norm(g) * np.linalg.norm(R))))
        return worst
    if map_kind == "minors":
        fmap = _minors
    elif map_kind == "gram":
        fmap = lambda x: gram_image(model, x)
    else:
        raise ValueError(f"unknown map kind {map_kind!r}")
    xs = model.sample(rng, n_samples)
    with mp.workdps(dps):
        letters = {}
        for j, (f, lam) in enumerate(zip(group.moves, group.lambdas), start=1):
            F = mp.matrix(_to_mp(f).tolist())
            g = F * mp.matrix(_to_mp(model.g_lambda(lam)).tolist()) * F ** -1
            letters[(j, 1)] = np.array(g.tolist(), dtype=object)
            letters[(j, -1)] = np.array((g ** -1).tolist(), dtype=object)
        for w, x in zip(words, xs):
            y = _to_mp(x)
            x_mp = y.copy()
            for a in reversed(w):
                y = letters[a] @ y
            a, b = fmap(x_mp), fmap(y)
            if max(abs(v) for v in a) < 1e-12 * max(abs(v) for v in x_mp) ** 2:
                raise MapUndefined("sample hit the indeterminacy locus")
            worst = max(worst, _mp_projective_distance(a, b))
    return worst
