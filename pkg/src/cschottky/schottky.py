"""Schottky groups built from a movable pair: moves, calibration, ping-pong certificate.

A group of rank r is given by moves f_1 = I, f_2, ..., f_r, levels eps_j and
multipliers lambda_j with |lambda_j| = (1 - eps_j)/eps_j.  Its generators are
gamma_j = f_j g_{lambda_j} f_j^{-1}; U_j = {phi_j < eps_j} and
V_j = {phi_j > 1 - eps_j} with phi_j = phi o f_j^{-1}.
"""

import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from . import geom
from .errors import (CertificateFailed, MaxAttemptsExceeded, ParityObstruction, RankAmbiguous,
                     SamplingStarved, SeparationFailure)
from .geom import FlagModel, PairCore, phi_law, schottky_pair_core
from .numlin import (DEFAULT_TOL, SubspaceBasis, Tolerances, distance_from_scalars,
                     matrix_from_json, matrix_to_json, normalize_det)

Letter = Tuple[int, int]  # (generator index 1..r, +1 or -1)

STRATEGIES = ("generic-matrix", "mobius-on-sphere", "left-factor")
MIN_ANCHOR_SEPARATION = 0.1
EPS_EXPONENTS = range(2, 21)
SLACK = 1e-9
PROBE_EPS = 2.0 ** -12
PROPERNESS_NOTE = ("properness of the action on the complement of the limit set is not finitely "
                   "checkable; the certificate evidences the ping-pong inclusions it rests on")


# words ----------------------------------------------------------------------


def reduce_word(letters) -> Tuple[Letter, ...]:
    """Free reduction of a sequence of (index, sign) letters."""
    out: List[Letter] = []
    for j, s in letters:
        j, s = int(j), int(s)
        if s not in (1, -1) or j < 1:
            raise ValueError(f"bad letter {(j, s)}")
        if out and out[-1] == (j, -s):
            out.pop()
        else:
            out.append((j, s))
    return tuple(out)


def reduced_words(r: int, length: int):
    """All reduced words of the given length, in lexicographic order."""
    letters = [(j, s) for j in range(1, r + 1) for s in (1, -1)]
    if length == 0:
        yield ()
        return

    def extend(prefix):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for a in letters:
            if prefix and prefix[-1] == (a[0], -a[1]):
                continue
            prefix.append(a)
            yield from extend(prefix)
            prefix.pop()

    yield from extend([])


def reduced_word_count(r: int, length: int) -> int:
    """N_l = 2r (2r-1)^(l-1)."""
    if length == 0:
        return 1
    return 2 * r * (2 * r - 1) ** (length - 1)


def format_word(w) -> str:
    if not w:
        return "e"
    return "".join(f"g{j}" + ("" if s > 0 else "^-1") for j, s in w)


# group spec -----------------------------------------------------------------


@dataclass
class MoveSearchOptions:
    max_attempts: int = 200
    strategy: Optional[str] = None
    subsphere_m: Optional[int] = None

    def resolved_strategy(self, model: FlagModel) -> str:
        s = self.strategy or ("mobius-on-sphere" if model.is_grassmannian else "generic-matrix")
        if s not in STRATEGIES:
            raise ValueError(f"unknown move strategy {s!r}")
        if s == "mobius-on-sphere" and not model.is_grassmannian:
            raise ValueError("mobius-on-sphere moves need an IsotropicGrass model")
        if self.subsphere_m is not None:
            if s != "mobius-on-sphere":
                raise ValueError("subsphere_m is only valid with mobius-on-sphere moves")
            if not 1 <= self.subsphere_m <= 2 * model.n:
                raise ValueError(f"subsphere_m must lie in 1..{2 * model.n}")
        return s

    def to_json(self):
        return {"max_attempts": self.max_attempts, "strategy": self.strategy,
                "subsphere_m": self.subsphere_m}


@dataclass
class SchottkyGroupSpec:
    model: FlagModel
    core: PairCore
    moves: List[np.ndarray]
    eps: np.ndarray
    lambdas: np.ndarray
    seed: Optional[int] = None
    options: MoveSearchOptions = field(default_factory=MoveSearchOptions)
    anchors: Optional[np.ndarray] = None  # sphere points p_j (Grassmannian model)

    def __post_init__(self):
        self.moves = [np.asarray(f, dtype=complex) for f in self.moves]
        self.eps = np.asarray(self.eps, dtype=float)
        self.lambdas = np.asarray(self.lambdas, dtype=complex)
        self._inv = [np.linalg.inv(f) for f in self.moves]
        self._gens = []
        for f, finv, lam in zip(self.moves, self._inv, self.lambdas):
            g = f @ self.model.g_lambda(lam) @ finv
            self._gens.append(g)
        self._gens_inv = [np.linalg.inv(g) for g in self._gens]

    @property
    def r(self) -> int:
        return len(self.moves)

    def generator(self, j: int, sign: int = 1) -> np.ndarray:
        return self._gens[j - 1] if sign > 0 else self._gens_inv[j - 1]

    def letter_matrix(self, a: Letter) -> np.ndarray:
        return self.generator(a[0], a[1])

    def phi_j(self, j: int, x):
        return self.model.phi(self.model.apply(self._inv[j - 1], x))

    def phi_all(self, x):
        return np.stack([self.phi_j(j, x) for j in range(1, self.r + 1)], axis=-1)

    def move_inverse(self, j):
        return self._inv[j - 1]

    def cores(self):
        """The 2r cores f_j(C0), f_j(C1) in order."""
        out = []
        for f in self.moves:
            out.append(self.core.C0.transformed(f))
            out.append(self.core.C1.transformed(f))
        return out

    def to_json(self):
        d = {
            "model": self.model.to_json(),
            "seed": self.seed,
            "r": self.r,
            "eps": [float(e) for e in self.eps],
            "lambda": [{"re": float(l.real), "im": float(l.imag)} for l in self.lambdas],
            "moves": [matrix_to_json(f) for f in self.moves],
            "pair_core": {
                "kind": self.core.kind,
                "C0": matrix_to_json(self.core.C0.basis),
                "C1": matrix_to_json(self.core.C1.basis),
                "xi0": matrix_to_json(self.core.xi0),
            },
            "options": self.options.to_json(),
        }
        if self.anchors is not None:
            d["anchors"] = [[float(v) for v in p] for p in self.anchors]
        return d

    @classmethod
    def from_json(cls, obj):
        from .errors import SchottkyError
        try:
            model = geom.model_from_json(obj["model"])
            core_obj = obj["pair_core"]
            core = PairCore(model, SubspaceBasis(matrix_from_json(core_obj["C0"])),
                            SubspaceBasis(matrix_from_json(core_obj["C1"])),
                            matrix_from_json(core_obj["xi0"]))
            moves = [matrix_from_json(m) for m in obj["moves"]]
            eps = [float(e) for e in obj["eps"]]
            lambdas = [complex(l["re"], l["im"]) for l in obj["lambda"]]
            opts = MoveSearchOptions(**obj.get("options", {}))
            anchors = np.asarray(obj["anchors"]) if obj.get("anchors") is not None else None
        except (KeyError, TypeError, ValueError) as exc:
            raise SchottkyError(f"malformed group file: {exc}") from exc
        if not (len(moves) == len(eps) == len(lambdas) == int(obj["r"])):
            raise SchottkyError("group file has inconsistent generator counts")
        for f in moves:
            model.check_automorphism(f, tol=1e-7)
        return cls(model, core, moves, eps, lambdas, obj.get("seed"), opts, anchors)


# moves ----------------------------------------------------------------------


def _all_cores_disjoint(model, core, moves, tol):
    cores = []
    for f in moves:
        cores.append(core.C0.transformed(f, tol))
        cores.append(core.C1.transformed(f, tol))
    for a, b in itertools.combinations(range(len(cores)), 2):
        if geom.cores_disjoint_dim(model, cores[a], cores[b], tol) != 0:
            return False
    return True


def _left_factor_move(model: FlagModel, rng):
    if model.variant == "ProjOdd":
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        h = h / np.sqrt(np.linalg.det(h))
        return np.kron(h, np.eye(model.n + 1))
    if model.variant == "QuadricEven" and model.n % 2 == 0:
        m = model.n // 2
        S4 = geom._pairing(2)
        Y = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = expm(np.linalg.solve(S4, (Y - Y.T) / np.sqrt(8)))
        P = column_stack_permutation(m)
        return P @ np.kron(np.eye(m), h) @ P.T
    raise ValueError("left-factor moves exist for ProjOdd (left SL(2)) and QuadricEven with even n")


def column_stack_permutation(m: int) -> np.ndarray:
    """Permutation from column-stacked C^{4 x m} to QuadricEven(2m) coordinates.

    Rows 1-2 of every column go to the z-block, rows 3-4 to the w-block, so
    Tr(Z^T S Z) with S = [[0, I2], [I2, 0]] becomes 2<z, w>.
    """
    n = 2 * m
    P = np.zeros((2 * n, 4 * m))
    for c in range(m):
        for a in range(4):
            src = 4 * c + a
            dst = 2 * c + a if a < 2 else n + 2 * c + (a - 2)
            P[dst, src] = 1
    return P


def _sphere_rotation(rng, dim, subsphere_m=None):
    """Random rotation of R^dim (sphere coordinates), optionally inside span(e1..e_{m+1})."""
    if subsphere_m is None:
        return geom.haar_orthogonal(rng, dim)
    R = np.eye(dim)
    R[: subsphere_m + 1, : subsphere_m + 1] = geom.haar_orthogonal(rng, subsphere_m + 1)
    return R


def _angle(a, b):
    return float(np.arccos(np.clip(np.dot(a, b), -1.0, 1.0)))


def find_moves(model: FlagModel, core: PairCore, r: int, rng, opts: MoveSearchOptions = None,
               tol: Tolerances = DEFAULT_TOL):
    """Moves f_2..f_r with all 2r cores pairwise disjoint.

    Returns (moves, anchors) where anchors are the sphere points p_j for the
    mobius-on-sphere strategy and None otherwise.
    """
    opts = opts or MoveSearchOptions()
    strategy = opts.resolved_strategy(model)
    if r < 1:
        raise ValueError("rank r must be at least 1")
    if model.variant == "QuadricEven" and model.n % 2 == 1 and r >= 2:
        raise ParityObstruction(
            f"Q_{2 * model.n - 2}: maximal isotropic subspaces of one family in C^{2 * model.n} "
            f"meet in dimension = {model.n} mod 2, so the cores cannot be moved off each other")
    N = model.ambient_dim
    p0 = np.zeros(2 * model.n + 1)
    p0[0] = 1.0
    moves = [np.eye(N, dtype=complex)]
    anchors = [p0]
    for _ in range(r - 1):
        for _attempt in range(opts.max_attempts):
            if strategy == "mobius-on-sphere":
                R = _sphere_rotation(rng, 2 * model.n + 1, opts.subsphere_m)
                p = R @ p0
                pts = anchors + [-a for a in anchors]
                if min(min(_angle(p, a), _angle(-p, a)) for a in pts) < MIN_ANCHOR_SEPARATION:
                    continue
                f = geom.mobius_embed(model, geom.rotation_embed(R))
            elif strategy == "left-factor":
                f = _left_factor_move(model, rng)
                p = None
            else:
                # unitary moves keep the cores well apart; Gaussian ones are often ill-conditioned
                f = model.random_compact_automorphism(rng)
                p = None
            try:
                ok = _all_cores_disjoint(model, core, moves + [f], tol)
            except RankAmbiguous:
                ok = False
            if ok:
                # demand a quantitative gap so that some eps >= 2^-20 calibrates
                probe = np.full(len(moves) + 1, PROBE_EPS)
                bound = analytic_separation(model, moves + [f], probe, anchors + [p])
                ok = bound is None or bound >= tol.cert_margin
            if ok:
                moves.append(f)
                anchors.append(p)
                break
        else:
            raise MaxAttemptsExceeded(f"no admissible move found in {opts.max_attempts} attempts")
    return moves, (np.array(anchors) if strategy == "mobius-on-sphere" else None)


# calibration ----------------------------------------------------------------


def _pushed_samples(model, y, phi0, levels):
    """Move each y along the real flow to the given phi level."""
    t = geom.flow_parameter(phi0, levels)
    out = []
    for yi, ti in zip(y, t):
        out.append(model.apply(model.g_lambda(ti), yi))
    return np.array(out)


def _closure_samples(model, rng, eps, n_samples):
    """Points of closure(U_eps) and closure(V_eps) in the model frame."""
    y = model.sample(rng, n_samples)
    phi0 = model.phi(y)
    keep = (phi0 > 1e-9) & (phi0 < 1 - 1e-9)
    y, phi0 = y[keep], phi0[keep]
    u = rng.uniform(0, 1, size=len(y))
    u[: len(y) // 4] = 1.0  # a quarter on the boundary level itself
    u = np.maximum(u, 1e-8)
    low = _pushed_samples(model, y, phi0, eps * u)
    high = _pushed_samples(model, y, phi0, 1 - eps * u)
    return low, high


def separation_margin(model, moves, eps, rng, n_samples=300):
    """Smallest distance of phi_k on sampled closure(U_j), closure(V_j) to [0,eps_k] ∪ [1-eps_k,1]."""
    r = len(moves)
    if r == 1:
        return np.inf
    inv = [np.linalg.inv(f) for f in moves]
    worst = np.inf
    for j in range(r):
        low, high = _closure_samples(model, rng, eps[j], n_samples)
        for pts in (low, high):
            x = model.apply(moves[j], pts)
            for k in range(r):
                if k == j:
                    continue
                ph = model.phi(model.apply(inv[k], x))
                m = np.minimum(ph - eps[k], (1 - eps[k]) - ph).min()
                worst = min(worst, float(m))
    return worst


def _rayleigh_range(Fz, W):
    """min/max of |W F z|^2 / |F z|^2 over nonzero z."""
    from scipy.linalg import eigh
    a = Fz.conj().T @ W @ Fz
    b = Fz.conj().T @ Fz
    vals = eigh((a + a.conj().T) / 2, (b + b.conj().T) / 2, eigvals_only=True)
    return float(np.clip(vals[0], 0, 1)), float(np.clip(vals[-1], 0, 1))


def _vector_bound(model, moves, eps):
    """Rigorous margin of phi_k on closure(U_j), closure(V_j) for the vector models.

    On the cone {|w|^2 <= delta |z|^2} around a core, a point differs from its
    core projection by a relative perturbation rho, hence by a Fubini-Study
    angle of at most arcsin(rho); the angle to a coordinate subspace is
    1-Lipschitz for that metric, and its range on the core is a generalized
    Rayleigh quotient.
    """
    N = model.ambient_dim
    I = np.eye(N)
    Bz, Bw = I[:, model.z_slice], I[:, model.w_slice]
    W = np.zeros((N, N))
    W[model.w_slice, model.w_slice] = np.eye(Bw.shape[1])
    inv = [np.linalg.inv(f) for f in moves]
    worst = np.inf
    r = len(moves)
    for j in range(r):
        delta = eps[j] / (1 - eps[j])
        for near, far in ((Bz, Bw), (Bw, Bz)):
            for k in range(r):
                if k == j:
                    continue
                F = inv[k] @ moves[j]
                Fz, Fw = F @ near, F @ far
                smin = np.linalg.svd(Fz, compute_uv=False)[-1]
                rho = np.linalg.norm(Fw, 2) * np.sqrt(delta) / smin
                if rho >= 1:
                    return -np.inf
                lo, hi = _rayleigh_range(Fz, W)
                a = np.arcsin(rho)
                t_lo, t_hi = np.arcsin(np.sqrt(lo)), np.arcsin(np.sqrt(hi))
                p_lo = np.sin(max(t_lo - a, 0.0)) ** 2
                p_hi = np.sin(min(t_hi + a, np.pi / 2)) ** 2
                worst = min(worst, p_lo - eps[k], (1 - eps[k]) - p_hi)
    return float(worst)


def _sphere_bound(anchors, eps):
    """Exact margin for caps around +-p_j on the sphere (Mobius moves)."""
    worst = np.inf
    r = len(anchors)
    for j in range(r):
        rad = 2 * np.arcsin(np.sqrt(eps[j]))
        for c in (anchors[j], -anchors[j]):
            for k in range(r):
                if k == j:
                    continue
                d = _angle(c, anchors[k])
                lo = np.sin(max(d - rad, 0.0) / 2) ** 2
                hi = np.sin(min(d + rad, np.pi) / 2) ** 2
                worst = min(worst, lo - eps[k], (1 - eps[k]) - hi)
    return float(worst)


def analytic_separation(model, moves, eps, anchors=None):
    """Closure-separation margin from exact bounds, or None when no bound applies."""
    if len(moves) == 1:
        return np.inf
    if not model.is_grassmannian:
        return _vector_bound(model, moves, eps)
    if anchors is not None and all(a is not None for a in anchors):
        return _sphere_bound(np.asarray(anchors, dtype=float), eps)
    return None


def calibrate_epsilons(model, core, moves, margin, rng, n_samples=300, anchors=None):
    """Largest uniform eps = 2^-k (k = 2..20) whose closures separate with the margin.

    The separation is judged by the exact bound when one applies and by
    sampling otherwise; sampling always has to agree.
    """
    r = len(moves)
    if r == 1:
        return np.array([0.25])
    state = rng.bit_generator.state
    for k in EPS_EXPONENTS:
        eps = np.full(r, 2.0 ** -k)
        bound = analytic_separation(model, moves, eps, anchors)
        if bound is not None and bound < margin:
            continue
        rng.bit_generator.state = state  # common random numbers across candidates
        if separation_margin(model, moves, eps, rng, n_samples) >= margin:
            return eps
    raise SeparationFailure(f"no eps >= 2^-{EPS_EXPONENTS[-1]} separates the neighborhoods "
                            f"with margin {margin}")


def lambdas_for(eps, phase=0.0):
    eps = np.asarray(eps, dtype=float)
    return (1 - eps) / eps * np.exp(1j * phase)


def build_group(model: FlagModel, r: int, seed: int, opts: MoveSearchOptions = None,
                tol: Tolerances = DEFAULT_TOL, calibration_samples=300, phase=0.0):
    opts = opts or MoveSearchOptions()
    ss = np.random.SeedSequence(seed)
    move_seed, cal_seed = ss.spawn(2)
    core = schottky_pair_core(model)
    moves, anchors = find_moves(model, core, r, np.random.default_rng(move_seed), opts, tol)
    eps = calibrate_epsilons(model, core, moves, tol.cert_margin,
                             np.random.default_rng(cal_seed), calibration_samples, anchors)
    return SchottkyGroupSpec(model, core, moves, eps, lambdas_for(eps, phase), seed, opts, anchors)


# word arithmetic --------------------------------------------------------------


def word_matrix(group: SchottkyGroupSpec, w) -> np.ndarray:
    M = np.eye(group.model.ambient_dim, dtype=complex)
    for a in w:
        M = M @ group.letter_matrix(a)
    return M


def _walk_words(group, max_len, x, visit):
    """Depth-first over reduced words, adding letters on the left.

    ``visit(word, matrix, images)`` is called for every nonempty word with
    the word's matrix and the images of ``x`` under it.
    """
    letters = [(j, s) for j in range(1, group.r + 1) for s in (1, -1)]
    model = group.model

    def rec(word, M, imgs):
        if len(word) == max_len:
            return
        for a in letters:
            if word and word[0] == (a[0], -a[1]):
                continue
            g = group.letter_matrix(a)
            M2 = g @ M
            M2 = M2 / np.linalg.norm(M2)
            imgs2 = model.apply(g, imgs) if imgs is not None else None
            w2 = (a,) + word
            visit(w2, M2, imgs2)
            rec(w2, M2, imgs2)

    rec((), np.eye(model.ambient_dim, dtype=complex), x)


# sampling -------------------------------------------------------------------


def fundamental_domain_sample(group: SchottkyGroupSpec, n: int, seed, batch=None):
    """n points with eps_j <= phi_j <= 1 - eps_j for all j (rejection sampling)."""
    rng = np.random.default_rng(seed)
    batch = batch or max(64, n)
    got = []
    total = 0
    while sum(len(g) for g in got) < n:
        x = group.model.sample(rng, batch)
        total += batch
        ph = group.phi_all(x)
        ok = np.all((ph >= group.eps) & (ph <= 1 - group.eps), axis=-1)
        got.append(x[ok])
        accepted = sum(len(g) for g in got)
        if total >= 20 * batch and accepted / total < 1e-4:
            raise SamplingStarved(f"fundamental-domain acceptance {accepted / total:.2e}")
        if total > 1000 * max(n, batch):
            raise SamplingStarved("fundamental-domain sampling did not finish")
    return np.concatenate(got)[:n]


def core_base_points(group: SchottkyGroupSpec):
    """One point on each core f_j(C0), f_j(C1)."""
    model = group.model
    if model.is_grassmannian:
        V0 = model.reference_point()
        flip = np.eye(2 * model.n + 1)
        flip[0, 0] = flip[1, 1] = -1  # rotation by pi carrying p to -p
        V1 = model.apply(geom.mobius_embed(model, geom.rotation_embed(flip)), V0)
        bases = [V0, V1]
    else:
        bases = [group.core.C0.basis[:, 0], group.core.C1.basis[:, 0]]
    out = []
    for f in group.moves:
        for b in bases:
            out.append(model.apply(f, b))
    return out


def limit_set_sample(group: SchottkyGroupSpec, depth: int, seed=None):
    """Images of the 2r core base points under every reduced word of length ``depth``.

    Returns a list of (word, base_index, point).
    """
    bases = core_base_points(group)
    out = []
    for w in reduced_words(group.r, depth):
        M = word_matrix(group, w)
        for i, b in enumerate(bases):
            out.append((w, i, group.model.apply(M, b)))
    return out


def point_coordinates(model: FlagModel, x):
    """Real coordinates for export: sphere point for the Grassmannian model, re/im otherwise."""
    if model.is_grassmannian:
        return list(geom.twistor_project(model, x))
    x = model.canonical(x)
    return list(x.real) + list(x.imag)


# certificate ------------------------------------------------------------------


@dataclass
class PingPongCertificate:
    samples: int
    word_length: int
    checks: dict
    min_phi_separation: float
    margin_required: float
    verdict: str
    limitation: str = PROPERNESS_NOTE

    @property
    def passed(self):
        return self.verdict == "pass"

    def first_failure(self):
        for name, c in self.checks.items():
            if not c["passed"]:
                return name
        return None

    def to_json(self):
        return {
            "samples": self.samples,
            "word_length": self.word_length,
            "checks": self.checks,
            "min_phi_separation": self.min_phi_separation,
            "margin_required": self.margin_required,
            "verdict": self.verdict,
            "limitation": self.limitation,
        }


def _check(value, threshold, passed):
    return {"value": float(value), "threshold": float(threshold), "passed": bool(passed)}


def certify_ping_pong(group: SchottkyGroupSpec, n_samples=2000, max_word_len=4, seed=0,
                      tol: Tolerances = DEFAULT_TOL, raise_on_fail=True) -> PingPongCertificate:
    model = group.model
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5c077]))
    r = group.r
    checks = {}

    # (i) equivariance of phi_j under gamma_j
    x = model.sample(rng, n_samples)
    worst_eq = 0.0
    for j in range(1, r + 1):
        t = abs(group.lambdas[j - 1])
        before = group.phi_j(j, x)
        after = group.phi_j(j, model.apply(group.generator(j), x))
        worst_eq = max(worst_eq, float(np.abs(after - phi_law(before, t)).max()))
    checks["equivariance"] = _check(worst_eq, 1e-8, worst_eq < 1e-8)

    # (ii) gamma_j maps {phi_j >= eps} into closure(V_j), gamma_j^-1 maps {phi_j <= 1-eps} into closure(U_j)
    worst_in = np.inf
    for j in range(1, r + 1):
        e = group.eps[j - 1]
        y = model.sample(rng, n_samples)
        ph = model.phi(y)
        keep = (ph > 1e-9) & (ph < 1 - 1e-9)
        y, ph = y[keep], ph[keep]
        # half of the points pushed onto the level eps itself, the rest above it
        levels = np.where(np.arange(len(y)) % 2 == 0, e, e + (1 - e) * rng.uniform(0, 1, len(y)))
        out_u = geom.flow_parameter(ph, levels)
        pts = np.array([model.apply(model.g_lambda(t), p) for t, p in zip(out_u, y)])
        pts = model.apply(group.moves[j - 1], pts)
        img = group.phi_j(j, model.apply(group.generator(j), pts))
        worst_in = min(worst_in, float((img - (1 - e)).min()))
        mirrored = model.apply(group.moves[j - 1],
                               np.array([model.apply(model.g_lambda(t), p)
                                         for t, p in zip(geom.flow_parameter(ph, 1 - levels), y)]))
        img = group.phi_j(j, model.apply(group.generator(j, -1), mirrored))
        worst_in = min(worst_in, float((e - img).min()))
    checks["generator_inclusion"] = _check(worst_in, -SLACK, worst_in >= -SLACK)

    # closure separation, re-sampled
    sep = separation_margin(model, group.moves, group.eps, rng, max(100, n_samples // (2 * r)))
    bound = analytic_separation(model, group.moves, group.eps, group.anchors)
    if bound is not None:
        sep = min(sep, bound)
    checks["closure_separation"] = _check(sep if np.isfinite(sep) else 1.0, tol.cert_margin,
                                          sep >= tol.cert_margin)
    checks["closure_separation"]["method"] = "sampled" if bound is None else "bound+sampled"

    # (iii) + (iv) reduced words on fundamental-domain samples
    F = fundamental_domain_sample(group, n_samples, rng.integers(2 ** 63))
    state = {"incl": np.inf, "scalar": np.inf, "words": 0}

    def visit(w, M, imgs):
        state["words"] += 1
        state["scalar"] = min(state["scalar"], distance_from_scalars(M))
        j, s = w[0]
        e = group.eps[j - 1]
        ph = group.phi_j(j, imgs)
        m = (ph - (1 - e)).min() if s > 0 else (e - ph).min()
        state["incl"] = min(state["incl"], float(m))

    _walk_words(group, max_word_len, F, visit)
    checks["word_inclusion"] = _check(state["incl"], -SLACK, state["incl"] >= -SLACK)
    checks["word_inclusion"]["words"] = state["words"]
    checks["non_scalar"] = _check(state["scalar"], 1e-6, state["scalar"] >= 1e-6)

    verdict = "pass" if all(c["passed"] for c in checks.values()) else "fail"
    cert = PingPongCertificate(n_samples, max_word_len, checks,
                               float(sep) if np.isfinite(sep) else 1.0, tol.cert_margin, verdict)
    if raise_on_fail and not cert.passed:
        raise CertificateFailed(f"ping-pong check '{cert.first_failure()}' failed", cert)
    return cert


def group_hash(group: SchottkyGroupSpec) -> str:
    import hashlib
    import json
    blob = json.dumps(group.to_json(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()
