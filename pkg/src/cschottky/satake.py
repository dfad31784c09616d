"""Real-form involutions on root systems and the minimal-orbit codimension scan.

An involution is stored as an integer matrix acting on simple-root
coordinates (column i is the expansion of sigma(alpha_i)).  Involutions that
come from a signed permutation of the ambient coordinates keep that
permutation as well.  Every involution is checked on construction:
sigma^2 = id, sigma(Delta) = Delta, and the positive system is a sigma-order.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Dict, Optional, Tuple

from .errors import UnsupportedRealForm, UnsupportedType
from .rootsys import EXCEPTIONAL_RANKS, RootSystem, build_root_system, complement, parabolic


@dataclass(frozen=True)
class RealFormSpec:
    family: str  # su, so, sp, so*, EII, EIII, EVI, EVII, FII, split, sl_H
    p: Optional[int] = None
    q: Optional[int] = None
    n: Optional[int] = None

    @property
    def label(self) -> str:
        if self.family in ("su", "so", "sp"):
            return f"{self.family}({self.p},{self.q})"
        if self.family == "so*":
            return f"so*({2 * self.n})"
        if self.family == "sl_H":
            return f"sl({self.n},H)"
        if self.family == "split":
            return "split"
        return self.family

    def to_json(self):
        return {k: v for k, v in (("family", self.family), ("p", self.p), ("q", self.q),
                                   ("n", self.n), ("label", self.label)) if v is not None}


def su(p, q):
    return RealFormSpec("su", p, q)


def so(p, q):
    return RealFormSpec("so", p, q)


def sp(p, q):
    return RealFormSpec("sp", p, q)


def so_star(n):
    return RealFormSpec("so*", n=n)


SPLIT = RealFormSpec("split")


def form_from_label(label: str) -> RealFormSpec:
    """Parse labels like 'su(2,2)', 'so*(8)', 'EIII', 'split'."""
    s = label.replace(" ", "")
    if s in ("split", "EII", "EIII", "EVI", "EVII", "FII", "EIV", "EV", "EI", "FI"):
        return SPLIT if s in ("split", "EI", "EV", "FI") else RealFormSpec(s)
    if s.startswith("so*(") and s.endswith(")"):
        return so_star(int(s[4:-1]) // 2)
    for fam in ("su", "so", "sp"):
        if s.startswith(fam + "(") and s.endswith(")"):
            p, q = (int(x) for x in s[len(fam) + 1:-1].split(","))
            return RealFormSpec(fam, p, q)
    if s.startswith("sl(") and s.endswith(",H)"):
        return RealFormSpec("sl_H", n=int(s[3:-3]))
    raise UnsupportedRealForm(f"cannot parse real form {label!r}")


@dataclass(frozen=True)
class SigmaInvolution:
    root_system: RootSystem = field(repr=False)
    form: RealFormSpec
    matrix: Tuple[Tuple[int, ...], ...]  # matrix[j][i] = coefficient of alpha_j in sigma(alpha_i)
    ambient: Optional[Tuple[Tuple[int, int], ...]] = None  # e_k -> sign * e_target, 0-based

    def apply_coords(self, coords) -> Tuple[int, ...]:
        n = len(coords)
        return tuple(sum(self.matrix[j][i] * coords[i] for i in range(n)) for j in range(n))

    def apply(self, root):
        rs = self.root_system
        return rs.combine(self.apply_coords(rs.simple_coordinates(root)))

    def apply_ambient(self, vec):
        if self.ambient is None:
            raise ValueError("this involution has no ambient signed-permutation form")
        out = [0] * len(vec)
        for k, (target, sign) in enumerate(self.ambient):
            out[target] += sign * vec[k]
        return tuple(out)

    @cached_property
    def imaginary_roots(self):
        return frozenset(r for r in self.root_system.roots if self.apply(r) == tuple(-c for c in r))

    @cached_property
    def real_roots(self):
        return frozenset(r for r in self.root_system.roots if self.apply(r) == tuple(r))

    @cached_property
    def _positive_index(self) -> Dict[Tuple[int, ...], int]:
        return {r: i for i, r in enumerate(self.root_system.positive_roots)}

    @cached_property
    def _positive_image(self) -> Tuple[int, ...]:
        """Index of sigma(beta) among positive roots, or -1 if it is negative."""
        idx = self._positive_index
        return tuple(idx.get(self.apply(r), -1) for r in self.root_system.positive_roots)

    def verify(self):
        rs = self.root_system
        roots = rs.root_set
        for r in rs.roots:
            img = self.apply(r)
            if img not in roots:
                raise UnsupportedRealForm(
                    f"{self.form.label}: sigma({rs.format_root(r)}) = {img} is not a root")
            if self.apply(img) != tuple(r):
                raise UnsupportedRealForm(f"{self.form.label}: sigma is not an involution")
        imag = self.imaginary_roots
        positive = set(rs.positive_roots)
        for r in rs.positive_roots:
            if r not in imag and self.apply(r) not in positive:
                raise UnsupportedRealForm(
                    f"{self.form.label}: positive system is not a sigma-order "
                    f"(sigma({rs.format_root(r)}) is negative)")
        return self

    def to_json(self):
        return {"form": self.form.to_json(), "matrix": [list(row) for row in self.matrix]}


def _from_ambient(rs: RootSystem, form, mapping):
    """mapping: list of (target, sign) per 1-based coordinate k (targets 1-based)."""
    amb = tuple((t - 1, s) for t, s in mapping)
    dim = rs.ambient_dim
    cols = []
    for a in rs.simple_roots:
        out = [0] * dim
        for k, (t, s) in enumerate(amb):
            out[t] += s * a[k]
        cols.append(rs.simple_coordinates(tuple(out)))
    n = rs.rank
    matrix = tuple(tuple(cols[i][j] for i in range(n)) for j in range(n))
    return SigmaInvolution(rs, form, matrix, amb).verify()


def _from_table(rs: RootSystem, form, images: Dict[int, Dict[int, int]], imaginary=(), fixed=()):
    """images[i] = {j: coeff} for sigma(alpha_i); imaginary simple roots map to minus themselves."""
    n = rs.rank
    cols = {}
    for i in imaginary:
        cols[i] = {i: -1}
    for i in fixed:
        cols[i] = {i: 1}
    cols.update(images)
    if set(cols) != set(range(1, n + 1)):
        raise UnsupportedRealForm(f"{form.label}: table does not cover all simple roots")
    matrix = tuple(tuple(cols[i].get(j, 0) for i in range(1, n + 1)) for j in range(1, n + 1))
    return SigmaInvolution(rs, form, matrix).verify()


def _identity(rs, form):
    n = rs.rank
    matrix = tuple(tuple(int(i == j) for i in range(n)) for j in range(n))
    amb = tuple((k, 1) for k in range(rs.ambient_dim))
    return SigmaInvolution(rs, form, matrix, amb).verify()


EXCLUSION_REASONS = {
    "sl_H": "sl(n,H) has a single conjugacy class of Cartan subalgebras",
    "so(1,odd)": "so(1,2n-1) has a single conjugacy class of Cartan subalgebras",
    "E8": "no real form of E8 has a compact hypersurface orbit in any E8-flag manifold",
    "G2": "the only non-compact real form of G2 is split",
    "EIV": "EIV is not among the non-split forms treated for E6 (scan covers EII, EIII, split)",
}


def sigma_for(rs: RootSystem, form: RealFormSpec) -> SigmaInvolution:
    t, n = rs.type_label, rs.rank
    fam = form.family
    if fam == "split":
        return _identity(rs, form)
    if fam == "sl_H":
        raise UnsupportedRealForm(EXCLUSION_REASONS["sl_H"])
    if t == "A" and fam == "su":
        p, q = form.p, form.q
        if not (1 <= p <= q and p + q == n + 1):
            raise UnsupportedRealForm(f"su({p},{q}) is not a real form of A{n}")
        mapping = []
        for k in range(1, n + 2):
            if k <= p or k >= q + 1:
                mapping.append((n + 2 - k, -1))
            else:
                mapping.append((k, -1))
        return _from_ambient(rs, form, mapping)
    if t in ("B", "D") and fam == "so":
        p, q = form.p, form.q
        total = 2 * n + 1 if t == "B" else 2 * n
        if not (1 <= p <= q and p + q == total):
            raise UnsupportedRealForm(f"so({p},{q}) is not a real form of {rs.name}")
        if t == "D" and p == 1:
            raise UnsupportedRealForm(EXCLUSION_REASONS["so(1,odd)"])
        mapping = [(k, 1 if k <= p else -1) for k in range(1, n + 1)]
        return _from_ambient(rs, form, mapping)
    if t == "C" and fam == "sp":
        p, q = form.p, form.q
        if not (1 <= p <= q and p + q == n):
            raise UnsupportedRealForm(f"sp({p},{q}) is not a real form of C{n}")
        mapping = []
        for k in range(1, n + 1):
            if k <= 2 * p:
                mapping.append((k + 1, 1) if k % 2 else (k - 1, 1))
            else:
                mapping.append((k, -1))
        return _from_ambient(rs, form, mapping)
    if t == "D" and fam == "so*":
        if form.n != n:
            raise UnsupportedRealForm(f"so*({2 * form.n}) is not a real form of D{n}")
        paired = n if n % 2 == 0 else n - 1
        mapping = []
        for k in range(1, n + 1):
            if k <= paired:
                mapping.append((k + 1, 1) if k % 2 else (k - 1, 1))
            else:
                mapping.append((k, -1))
        return _from_ambient(rs, form, mapping)
    if t == "E6" and fam == "EII":
        return _from_table(rs, form, {1: {6: 1}, 6: {1: 1}, 3: {5: 1}, 5: {3: 1}}, fixed=(2, 4))
    if t == "E6" and fam == "EIII":
        return _from_table(rs, form, {
            1: {6: 1, 3: 1, 4: 1, 5: 1},
            6: {1: 1, 3: 1, 4: 1, 5: 1},
            2: {2: 1, 3: 1, 4: 2, 5: 1},
        }, imaginary=(3, 4, 5))
    if t == "E6" and fam == "EIV":
        raise UnsupportedRealForm(EXCLUSION_REASONS["EIV"])
    if t == "E7" and fam == "EVI":
        return _from_table(rs, form, {
            4: {2: 1, 4: 1, 5: 1},
            6: {5: 1, 6: 1, 7: 1},
        }, imaginary=(2, 5, 7), fixed=(1, 3))
    if t == "E7" and fam == "EVII":
        return _from_table(rs, form, {
            1: {1: 1, 2: 1, 3: 2, 4: 2, 5: 1},
            6: {2: 1, 3: 1, 4: 2, 5: 2, 6: 1},
        }, imaginary=(2, 3, 4, 5), fixed=(7,))
    if t == "F4" and fam == "FII":
        return _from_ambient(rs, form, [(1, 1), (2, -1), (3, -1), (4, -1)])
    if t == "G2":
        raise UnsupportedRealForm(EXCLUSION_REASONS["G2"])
    raise UnsupportedRealForm(f"{form.label} is not a real form of {rs.name}")


def _nilradical_mask(rs: RootSystem, gamma) -> int:
    gmask = 0
    for i in gamma:
        gmask |= 1 << (i - 1)
    bits = 0
    for idx, r in enumerate(rs.positive_roots):
        if rs.support_mask(r) & ~gmask:
            bits |= 1 << idx
    return bits


def _sigma_mask(sigma: SigmaInvolution, bits: int) -> int:
    out = 0
    for idx, img in enumerate(sigma._positive_image):
        if bits >> idx & 1 and img >= 0:
            out |= 1 << img
    return out


def codim_witness(rs: RootSystem, sigma: SigmaInvolution, gamma):
    """The set Gamma^n ∩ sigma(Gamma^n) as a sorted list of roots."""
    bits = _nilradical_mask(rs, gamma)
    both = bits & _sigma_mask(sigma, bits)
    return sorted((r for i, r in enumerate(rs.positive_roots) if both >> i & 1), reverse=True)


def minimal_orbit_codim(rs: RootSystem, sigma: SigmaInvolution, gamma) -> int:
    parabolic(rs, gamma)  # validates indices
    bits = _nilradical_mask(rs, gamma)
    return bin(bits & _sigma_mask(sigma, bits)).count("1")


@dataclass(frozen=True)
class ClassificationRecord:
    type_label: str
    rank: int
    real_form: str
    gamma_indices: Tuple[int, ...]
    codim: Optional[int]
    is_hypersurface: bool
    manifold_name: str
    status: str  # computed | excluded_with_citation
    witness: Tuple[str, ...] = ()
    reason: str = ""

    @property
    def removed(self) -> Tuple[int, ...]:
        return tuple(i for i in range(1, self.rank + 1) if i not in self.gamma_indices)

    def to_json(self):
        d = {
            "type": self.type_label,
            "rank": self.rank,
            "real_form": self.real_form,
            "gamma": list(self.gamma_indices),
            "removed": list(self.removed),
            "codim": self.codim,
            "is_hypersurface": self.is_hypersurface,
            "manifold_name": self.manifold_name,
            "status": self.status,
        }
        if self.witness:
            d["witness"] = list(self.witness)
        if self.reason:
            d["reason"] = self.reason
        return d


def manifold_name(type_label, n, gamma) -> str:
    removed = [i for i in range(1, n + 1) if i not in set(gamma)]
    if not removed:
        return "point"
    if len(removed) == 1:
        k = removed[0]
        if type_label == "A":
            return f"P_{n}" if k in (1, n) else f"Gr_{k}(C^{n + 1})"
        if type_label == "B":
            return f"Q_{2 * n - 1}" if k == 1 else f"IGr_{k}(C^{2 * n + 1})"
        if type_label == "C":
            return f"P_{2 * n - 1}" if k == 1 else f"IGr^sp_{k}(C^{2 * n})"
        if type_label == "D":
            if k == 1:
                return f"Q_{2 * n - 2}"
            if k == n:
                return f"IGr_{n}(C^{2 * n})^0"
            if k == n - 1:
                return f"IGr_{n}(C^{2 * n})^1"
            return f"IGr_{k}(C^{2 * n})"
    name = type_label if type_label in EXCEPTIONAL_RANKS else f"{type_label}{n}"
    return f"{name}/Q[" + ",".join(str(i) for i in sorted(gamma)) + "]"


def real_forms(type_label, n):
    """(form, excluded_reason or None) pairs scanned for a root system."""
    out = []
    if type_label == "A":
        if n >= 2:
            for p in range(1, (n + 1) // 2 + 1):
                out.append((su(p, n + 1 - p), None))
            if (n + 1) % 2 == 0 and n + 1 >= 4:
                out.append((RealFormSpec("sl_H", n=(n + 1) // 2), EXCLUSION_REASONS["sl_H"]))
        out.append((SPLIT, None))
    elif type_label == "B":
        for p in range(1, n):
            out.append((so(p, 2 * n + 1 - p), None))
        out.append((SPLIT, None))
    elif type_label == "C":
        for p in range(1, n // 2 + 1):
            out.append((sp(p, n - p), None))
        out.append((SPLIT, None))
    elif type_label == "D":
        out.append((so_star(n), None))
        out.append((so(1, 2 * n - 1), EXCLUSION_REASONS["so(1,odd)"]))
        for p in range(2, n):
            out.append((so(p, 2 * n - p), None))
        out.append((SPLIT, None))
    elif type_label == "E6":
        out += [(RealFormSpec("EII"), None), (RealFormSpec("EIII"), None),
                (RealFormSpec("EIV"), EXCLUSION_REASONS["EIV"]), (SPLIT, None)]
    elif type_label == "E7":
        out += [(RealFormSpec("EVI"), None), (RealFormSpec("EVII"), None), (SPLIT, None)]
    elif type_label == "F4":
        out += [(RealFormSpec("FII"), None), (SPLIT, None)]
    elif type_label == "G2":
        out += [(RealFormSpec("non-split"), EXCLUSION_REASONS["G2"]), (SPLIT, None)]
    return out


def scan_root_system(rs: RootSystem):
    records = []
    n = rs.rank
    subsets = [frozenset(c) for size in range(n + 1) for c in combinations(range(1, n + 1), size)]
    for form, reason in real_forms(rs.type_label, n):
        if reason is not None:
            records.append(ClassificationRecord(rs.type_label, n, form.label, (), None, False,
                                                "", "excluded_with_citation", reason=reason))
            continue
        sigma = sigma_for(rs, form)
        for gamma in subsets:
            bits = _nilradical_mask(rs, gamma)
            both = bits & _sigma_mask(sigma, bits)
            codim = bin(both).count("1")
            witness = ()
            if codim == 1:
                witness = tuple(rs.format_root(r) for i, r in enumerate(rs.positive_roots)
                                if both >> i & 1)
            records.append(ClassificationRecord(
                rs.type_label, n, form.label, tuple(sorted(gamma)), codim, codim == 1,
                manifold_name(rs.type_label, n, gamma), "computed", witness))
    return records


def scan_targets(max_rank: int):
    targets = []
    for t, lo in (("A", 1), ("B", 2), ("C", 2), ("D", 4)):
        for n in range(lo, max_rank + 1):
            targets.append((t, n))
    for t in ("E6", "E7", "E8", "F4", "G2"):
        if EXCEPTIONAL_RANKS[t] <= max_rank:
            targets.append((t, EXCEPTIONAL_RANKS[t]))
    return targets


def classify_all(max_rank: int):
    if max_rank < 2:
        raise UnsupportedType("max_rank must be at least 2")
    records = []
    for t, n in scan_targets(max_rank):
        if t == "E8":
            records.append(ClassificationRecord("E8", 8, "all", (), None, False, "",
                                                "excluded_with_citation",
                                                reason=EXCLUSION_REASONS["E8"]))
            continue
        records.extend(scan_root_system(build_root_system(t, n)))
    return records


def hypersurface_records(records):
    return [r for r in records if r.is_hypersurface]


def maximal_gamma(rs: RootSystem, k: int):
    return complement(rs, [k])
