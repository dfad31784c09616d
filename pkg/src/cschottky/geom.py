"""Matrix models of the target manifolds, their phi-functions and C*-actions.

Four models are supported, all written in the coordinates used for the
constructions (these are the external interface):

* ``ProjOdd(n)``: P_{2n+1} = P(C^{n+1} + C^{n+1}), coordinates (z, w).
* ``QuadricEven(n)``: Q_{2n-2} = {<z, w> = 0} in P_{2n-1}.
* ``QuadricOdd(n)``: Q_{2n-1} = {u^2 + 2<z, w> = 0} in P_{2n}.
* ``IsotropicGrass(n)``: one family of maximal isotropic subspaces of
  C^{2n+2} for u1^2 + u2^2 + 2<z, w>, a model of IGr_n(C^{2n+1}).

Points of the vector models are unit vectors (batches are arrays of shape
(m, N)); points of the Grassmannian model are orthonormal N x (n+1) bases
(batches of shape (m, N, n+1)).
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .errors import FormViolation, RealityViolated
from .numlin import DEFAULT_TOL, SubspaceBasis, Tolerances, intersect_dim, normalize_det

VARIANTS = ("ProjOdd", "QuadricEven", "QuadricOdd", "IsotropicGrass")
_SHORT = {"P": "ProjOdd", "Qeven": "QuadricEven", "Qodd": "QuadricOdd", "IGr": "IsotropicGrass"}
_SHORT_INV = {v: k for k, v in _SHORT.items()}


def _pairing(n):
    Z = np.zeros((n, n))
    I = np.eye(n)
    return np.block([[Z, I], [I, Z]])


def _identity_change(n):
    """Unitary M with M^T M = [[0, I], [I, 0]]."""
    I = np.eye(n)
    return np.block([[I, I], [-1j * I, 1j * I]]) / np.sqrt(2)


def haar_orthogonal(rng, N):
    """Haar-distributed element of SO(N, R)."""
    Z = rng.standard_normal((N, N))
    Q, R = np.linalg.qr(Z)
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def orthonormalize(B):
    """QR-orthonormalize a basis or a batch of bases (last two axes)."""
    Q, _ = np.linalg.qr(B)
    return Q


@dataclass(frozen=True)
class FlagModel:
    variant: str
    n: int

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown model variant {self.variant!r}")
        lo = {"ProjOdd": 0, "QuadricEven": 2, "QuadricOdd": 1, "IsotropicGrass": 1}[self.variant]
        if int(self.n) != self.n or self.n < lo:
            raise ValueError(f"{self.variant} needs n >= {lo}, got {self.n}")

    # structure -----------------------------------------------------------

    @property
    def ambient_dim(self) -> int:
        n = self.n
        return {"ProjOdd": 2 * n + 2, "QuadricEven": 2 * n,
                "QuadricOdd": 2 * n + 1, "IsotropicGrass": 2 * n + 2}[self.variant]

    @property
    def complex_dimension(self) -> int:
        n = self.n
        return {"ProjOdd": 2 * n + 1, "QuadricEven": 2 * n - 2,
                "QuadricOdd": 2 * n - 1, "IsotropicGrass": n * (n + 1) // 2}[self.variant]

    @property
    def point_kind(self) -> str:
        return "isotropic-subspace" if self.variant == "IsotropicGrass" else "homogeneous-vector"

    @property
    def is_grassmannian(self) -> bool:
        return self.variant == "IsotropicGrass"

    @cached_property
    def form_matrix(self) -> Optional[np.ndarray]:
        n = self.n
        if self.variant == "ProjOdd":
            return None
        if self.variant == "QuadricEven":
            return _pairing(n)
        if self.variant == "QuadricOdd":
            S = np.zeros((2 * n + 1, 2 * n + 1))
            S[0, 0] = 1.0
            S[1:, 1:] = _pairing(n)
            return S
        S = np.zeros((2 * n + 2, 2 * n + 2))
        S[:2, :2] = np.eye(2)
        S[2:, 2:] = _pairing(n)
        return S

    @cached_property
    def identity_change(self) -> Optional[np.ndarray]:
        """Unitary A with A^T A = S: y = A x turns the form into sum y_i^2."""
        S = self.form_matrix
        if S is None:
            return None
        N, n = self.ambient_dim, self.n
        A = np.eye(N, dtype=complex)
        k = {"QuadricEven": 0, "QuadricOdd": 1, "IsotropicGrass": 2}[self.variant]
        A[k:, k:] = _identity_change(n)
        return A

    @property
    def z_slice(self):
        n = self.n
        return {"ProjOdd": slice(0, n + 1), "QuadricEven": slice(0, n),
                "QuadricOdd": slice(1, n + 1), "IsotropicGrass": slice(2, n + 2)}[self.variant]

    @property
    def w_slice(self):
        n = self.n
        return {"ProjOdd": slice(n + 1, 2 * n + 2), "QuadricEven": slice(n, 2 * n),
                "QuadricOdd": slice(n + 1, 2 * n + 1),
                "IsotropicGrass": slice(n + 2, 2 * n + 2)}[self.variant]

    @cached_property
    def xi0(self) -> np.ndarray:
        """Generator of the C*-action: g_lambda = exp(log(lambda) xi0)."""
        N = self.ambient_dim
        X = np.zeros((N, N), dtype=complex)
        if self.is_grassmannian:
            X[0, 1] = 1j
            X[1, 0] = -1j
            return X
        X[self.z_slice, self.z_slice] = -0.5 * np.eye(self.z_slice.stop - self.z_slice.start)
        X[self.w_slice, self.w_slice] = 0.5 * np.eye(self.w_slice.stop - self.w_slice.start)
        return X

    @property
    def core_codim(self) -> int:
        n = self.n
        return {"ProjOdd": n + 1, "QuadricEven": n - 1, "QuadricOdd": n,
                "IsotropicGrass": n}[self.variant]

    @property
    def algebra_dim(self) -> int:
        N = self.ambient_dim
        return N * N - 1 if self.form_matrix is None else N * (N - 1) // 2

    def algebra_basis(self):
        """Basis of sl(N) or so(S) as a list of N x N matrices."""
        N = self.ambient_dim
        out = []
        if self.form_matrix is None:
            for i in range(N):
                for j in range(N):
                    if i != j:
                        E = np.zeros((N, N), dtype=complex)
                        E[i, j] = 1
                        out.append(E)
            for i in range(N - 1):
                E = np.zeros((N, N), dtype=complex)
                E[i, i] = 1
                E[N - 1, N - 1] = -1
                out.append(E)
            return out
        Sinv = np.linalg.inv(self.form_matrix)
        for i in range(N):
            for j in range(i + 1, N):
                E = np.zeros((N, N), dtype=complex)
                E[i, j], E[j, i] = 1, -1
                out.append(Sinv @ E)
        return out

    @property
    def label(self) -> str:
        return f"{_SHORT_INV[self.variant]}:{self.n}"

    @property
    def manifold_name(self) -> str:
        n = self.n
        return {"ProjOdd": f"P_{2 * n + 1}", "QuadricEven": f"Q_{2 * n - 2}",
                "QuadricOdd": f"Q_{2 * n - 1}", "IsotropicGrass": f"IGr_{n}(C^{2 * n + 1})"}[self.variant]

    def to_json(self):
        return {"variant": self.variant, "n": self.n}

    # automorphisms -------------------------------------------------------

    def g_lambda(self, lam) -> np.ndarray:
        lam = complex(lam)
        if lam == 0:
            raise ValueError("lambda must be nonzero")
        N = self.ambient_dim
        if self.is_grassmannian:
            # (1, i) -> lam^-1 (1, i),  (1, -i) -> lam (1, -i)
            P = np.array([[1, 1], [1j, -1j]])
            block = P @ np.diag([1 / lam, lam]) @ np.linalg.inv(P)
            g = np.eye(N, dtype=complex)
            g[:2, :2] = block
            return g
        g = np.eye(N, dtype=complex)
        if self.form_matrix is None:
            # diag(I, lam I) scaled to unit determinant magnitude: an exact homomorphism
            s = abs(lam) ** -0.5
            g[self.z_slice, self.z_slice] *= s
            g[self.w_slice, self.w_slice] *= lam * s
            return g
        r = np.sqrt(lam)
        g[self.z_slice, self.z_slice] /= r
        g[self.w_slice, self.w_slice] *= r
        return g

    def form_residual(self, g) -> float:
        S = self.form_matrix
        if S is None:
            return 0.0
        g = np.asarray(g)
        return float(np.abs(g.T @ S @ g - S).max() / max(1.0, np.abs(g).max() ** 2))

    def check_automorphism(self, g, tol=1e-9):
        g = np.asarray(g, dtype=complex)
        if g.shape != (self.ambient_dim, self.ambient_dim):
            raise FormViolation(f"automorphism has shape {g.shape}, expected N={self.ambient_dim}")
        if abs(np.linalg.det(g)) == 0:
            raise FormViolation("automorphism is singular")
        if self.form_residual(g) > tol:
            raise FormViolation(f"matrix does not preserve the form (residual {self.form_residual(g):.2e})")
        return g

    def random_automorphism(self, rng, scale=1.0) -> np.ndarray:
        """Generic element of SL(N) or SO(S), close to a random direction of size ``scale``."""
        N = self.ambient_dim
        if self.form_matrix is None:
            G = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
            return normalize_det(G)
        Y = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        Y = scale * (Y - Y.T) / np.sqrt(2 * N)
        return expm(np.linalg.solve(self.form_matrix, Y))

    def random_compact_automorphism(self, rng) -> np.ndarray:
        """Haar-distributed element of the compact form SU(N) or SO(N, R) (conjugated to the form S)."""
        N = self.ambient_dim
        if self.form_matrix is None:
            Z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2)
            Q, R = np.linalg.qr(Z)
            Q = Q * (np.diag(R) / np.abs(np.diag(R)))
            return Q / np.linalg.det(Q) ** (1.0 / N)
        A = self.identity_change
        return A.conj().T @ haar_orthogonal(rng, N) @ A

    # points --------------------------------------------------------------

    def reference_point(self):
        """A base point on C0 (vector models) or the reference subspace (Grassmannian)."""
        N, n = self.ambient_dim, self.n
        if self.is_grassmannian:
            B = np.zeros((N, n + 1), dtype=complex)
            B[0, 0], B[1, 0] = 1 / np.sqrt(2), 1j / np.sqrt(2)
            for k in range(n):
                B[2 + k, 1 + k] = 1
            return B
        x = np.zeros(N, dtype=complex)
        x[self.z_slice.start] = 1
        return x

    def canonical(self, x):
        """Unit norm, first non-negligible coordinate real positive (vector models)."""
        x = np.asarray(x, dtype=complex)
        if self.is_grassmannian:
            return orthonormalize(x)
        x = x / np.linalg.norm(x, axis=-1, keepdims=True)
        idx = np.argmax(np.abs(x) > 1e-12, axis=-1)
        lead = np.take_along_axis(x, idx[..., None], axis=-1)
        return x * (np.abs(lead) / lead)

    def apply(self, g, x):
        """Image of a point or a batch of points under g."""
        g = np.asarray(g)
        x = np.asarray(x)
        if self.is_grassmannian:
            return orthonormalize(np.matmul(g, x))
        y = x @ g.T
        return y / np.linalg.norm(y, axis=-1, keepdims=True)

    def sample(self, rng, m=None):
        """Points distributed by the compact-group invariant measure."""
        single = m is None
        m = 1 if single else m
        N = self.ambient_dim
        if self.form_matrix is None:
            x = rng.standard_normal((m, N)) + 1j * rng.standard_normal((m, N))
            x /= np.linalg.norm(x, axis=1, keepdims=True)
            return x[0] if single else x
        A = self.identity_change
        R = np.stack([haar_orthogonal(rng, N) for _ in range(m)])
        if self.is_grassmannian:
            base = A @ self.reference_point()
            out = np.einsum("ij,mjk,kl->mil", A.conj().T, R, base)
        else:
            null = np.zeros(N, dtype=complex)
            null[0], null[1] = 1 / np.sqrt(2), 1j / np.sqrt(2)
            out = np.einsum("ij,mjk,k->mi", A.conj().T, R, null)
        return out[0] if single else out

    def membership_residual(self, x) -> np.ndarray:
        """Defining-equation residual of a point or batch."""
        S = self.form_matrix
        x = np.asarray(x)
        if S is None:
            return np.abs(np.linalg.norm(x, axis=-1) - 1)
        if self.is_grassmannian:
            G = np.swapaxes(x, -1, -2) @ S @ x
            return np.abs(G).max(axis=(-1, -2))
        return np.abs(np.einsum("...i,ij,...j->...", x, S, x))

    # phi -----------------------------------------------------------------

    def phi(self, x) -> np.ndarray:
        x = np.asarray(x)
        if self.is_grassmannian:
            return self._phi_grass(x)
        z = np.sum(np.abs(x[..., self.z_slice]) ** 2, axis=-1)
        w = np.sum(np.abs(x[..., self.w_slice]) ** 2, axis=-1)
        return w / (z + w)

    def _projector_entry(self, B):
        """Entry (1, 0) of the orthogonal projector onto span B."""
        G = np.swapaxes(B.conj(), -1, -2) @ B
        rhs = np.swapaxes(B[..., 0:1, :].conj(), -1, -2)
        sol = np.linalg.solve(G, rhs)
        return (B[..., 1:2, :] @ sol)[..., 0, 0]

    def _phi_grass(self, B):
        # phi = (1 - <pi(V), p>) / 2 with anchor p = e2: the stereographic pullback
        val = 0.5 - self._projector_entry(B).imag
        return np.clip(val, 0.0, 1.0)

    def projector(self, B):
        B = np.asarray(B)
        G = np.swapaxes(B.conj(), -1, -2) @ B
        return B @ np.linalg.solve(G, np.swapaxes(B.conj(), -1, -2))

    def complex_structure(self, B):
        """J_V = -i(2 P_V - I) in identity-form coordinates."""
        A = self.identity_change
        P = A @ self.projector(B) @ A.conj().T
        return -1j * (2 * P - np.eye(self.ambient_dim))


def parse_model(spec: str) -> FlagModel:
    """Parse 'P:1', 'Qeven:4', 'Qodd:3', 'IGr:2'."""
    try:
        kind, n = spec.split(":")
        return FlagModel(_SHORT[kind], int(n))
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad model spec {spec!r}; use P:n, Qeven:n, Qodd:n or IGr:n") from exc


def make_model(variant, n=None) -> FlagModel:
    if n is None:
        return parse_model(variant)
    return FlagModel(_SHORT.get(variant, variant), int(n))


def model_from_json(obj) -> FlagModel:
    return FlagModel(obj["variant"], int(obj["n"]))


def phi(model: FlagModel, x):
    return model.phi(x)


def g_lambda(model: FlagModel, lam):
    return model.g_lambda(lam)


def phi_law(phi_value, t):
    """phi(g_lambda x) predicted from phi(x) and t = |lambda|."""
    t2 = t * t
    return t2 * phi_value / (1 + (t2 - 1) * phi_value)


def flow_parameter(phi_value, target):
    """t > 0 with phi_law(phi_value, t) = target."""
    return np.sqrt(target * (1 - phi_value) / (phi_value * (1 - target)))


# pair cores --------------------------------------------------------------


@dataclass(frozen=True)
class PairCore:
    """C0, C1 and the generator of the C*-action.

    For vector models the cores are projective linear subspaces given by
    their linear spans.  For the Grassmannian model each core is the set of
    isotropic subspaces containing a fixed isotropic line (the twistor fiber
    over a point of the sphere); ``C0``/``C1`` hold those lines.
    """

    model: FlagModel
    C0: SubspaceBasis
    C1: SubspaceBasis
    xi0: np.ndarray

    @property
    def kind(self):
        return "isotropic-line-fiber" if self.model.is_grassmannian else "linear-subspace"


def schottky_pair_core(model: FlagModel) -> PairCore:
    N = model.ambient_dim
    if model.is_grassmannian:
        l0 = np.zeros((N, 1), dtype=complex)
        l1 = np.zeros((N, 1), dtype=complex)
        l0[0], l0[1] = 1 / np.sqrt(2), 1j / np.sqrt(2)
        l1[0], l1[1] = 1 / np.sqrt(2), -1j / np.sqrt(2)
        return PairCore(model, SubspaceBasis(l0), SubspaceBasis(l1), model.xi0)
    I = np.eye(N, dtype=complex)
    return PairCore(model, SubspaceBasis(I[:, model.z_slice]), SubspaceBasis(I[:, model.w_slice]),
                    model.xi0)


def cores_disjoint_dim(model: FlagModel, A: SubspaceBasis, B: SubspaceBasis,
                       tol: Tolerances = DEFAULT_TOL) -> int:
    """0 iff the two cores are disjoint in X (exact rank certificate).

    Linear cores: dimension of the intersection of spans.  Line-fiber cores:
    two isotropic lines lie in a common maximal isotropic subspace iff they
    are orthogonal, so the value is dim(span B ∩ (span A)^perp_S).
    """
    if not model.is_grassmannian:
        return intersect_dim(A, B, tol)
    S = model.form_matrix
    perp = SubspaceBasis.span(_null_columns(A.basis.T @ S, tol), tol)
    return intersect_dim(perp, B, tol)


def _null_columns(M, tol):
    from .numlin import null_space
    return null_space(M, tol)


def component_parity(model: FlagModel, V, reference, tol: Tolerances = DEFAULT_TOL) -> str:
    """'same' iff dim(V ∩ reference) has the parity of dim V."""
    V = SubspaceBasis.span(V, tol)
    R = SubspaceBasis.span(reference, tol)
    d = intersect_dim(V, R, tol)
    return "same" if (d - V.dim) % 2 == 0 else "opposite"


def double_cover_project(model: FlagModel, x):
    """Q_{2n-1} -> P_{2n-1}, [u:z:w] -> [z:w]."""
    if model.variant != "QuadricOdd":
        raise ValueError("double_cover_project needs a QuadricOdd model")
    y = np.asarray(x)[..., 1:]
    nrm = np.linalg.norm(y, axis=-1, keepdims=True)
    return y / nrm


# twistor fibration ---------------------------------------------------------


def twistor_project(model: FlagModel, V, reality_tol=1e-8):
    """pi(V) in S^{2n}: the real part of J_V e1 restricted to e1-perp."""
    if not model.is_grassmannian:
        raise ValueError("twistor_project needs an IsotropicGrass model")
    J = model.complex_structure(V)
    col = J[..., :, 0]
    imag = np.abs(col.imag).max()
    if imag > reality_tol:
        raise RealityViolated(f"J_V e1 has imaginary part {imag:.2e}")
    return col.real[..., 1:]


def minkowski_form(N):
    return np.diag([-1.0] + [1.0] * (N - 1))


def mobius_embed(model: FlagModel, G, tol=1e-9) -> np.ndarray:
    """Lift of a real Lorentz matrix in SO(1, 2n+1) to an automorphism of the model."""
    if not model.is_grassmannian:
        raise ValueError("mobius_embed needs an IsotropicGrass model")
    G = np.asarray(G, dtype=float)
    N = model.ambient_dim
    if G.shape != (N, N):
        raise FormViolation(f"Lorentz matrix must be {N}x{N}")
    L = minkowski_form(N)
    res = np.abs(G.T @ L @ G - L).max()
    if res > tol * max(1.0, np.abs(G).max() ** 2):
        raise FormViolation(f"matrix does not preserve the Minkowski form (residual {res:.2e})")
    T = np.diag([-1j] + [1.0] * (N - 1))
    g_id = T @ G @ np.linalg.inv(T)
    A = model.identity_change
    return A.conj().T @ g_id @ A


def sphere_action(G, x):
    """Conformal action of a Lorentz matrix on S^{2n} via null lines (1, x)."""
    x = np.asarray(x, dtype=float)
    ones = np.ones(x.shape[:-1] + (1,))
    v = np.concatenate([ones, x], axis=-1) @ np.asarray(G).T
    return v[..., 1:] / v[..., :1]


def boost(N, rapidity):
    """Lorentz boost in the (t, x1) plane; rapidity -log t is the homothety toward -e1 by t."""
    G = np.eye(N)
    G[0, 0] = G[1, 1] = np.cosh(rapidity)
    G[0, 1] = G[1, 0] = np.sinh(rapidity)
    return G


def rotation_embed(R):
    """Embed R in SO(2n+1) into SO(1, 2n+1) fixing the time axis."""
    R = np.asarray(R, dtype=float)
    G = np.eye(R.shape[0] + 1)
    G[1:, 1:] = R
    return G
