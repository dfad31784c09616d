"""Exact root systems and parabolic subsets.

Root coordinates are stored as integer tuples scaled by 2, so the
half-integer E- and F-type roots are exact.  Simple roots are indexed from 1
(Bourbaki labels alpha_1 .. alpha_n), matching the usual tables.  No floating
point is used anywhere in this module.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from typing import Dict, FrozenSet, Tuple

from .errors import NotARoot, UnsupportedType

Root = Tuple[int, ...]  # doubled coordinates

EXCEPTIONAL_RANKS = {"E6": 6, "E7": 7, "E8": 8, "F4": 4, "G2": 2}


def normalize_type(type_label, rank=None):
    """Return (label, rank) with exceptional labels in the form 'E6', 'F4', ..."""
    label = str(type_label).upper()
    if label in ("E", "F", "G"):
        if rank is None:
            raise UnsupportedType(f"type {label} needs a rank")
        label = f"{label}{rank}"
    if label in EXCEPTIONAL_RANKS:
        fixed = EXCEPTIONAL_RANKS[label]
        if rank is not None and int(rank) != fixed:
            raise UnsupportedType(f"{label} has rank {fixed}, not {rank}")
        return label, fixed
    if label not in ("A", "B", "C", "D"):
        raise UnsupportedType(f"unknown root system type {type_label!r}")
    if rank is None:
        raise UnsupportedType(f"type {label} needs a rank")
    return label, int(rank)


def _unit(dim, k, scale=2):
    v = [0] * dim
    v[k] = scale
    return v


def _add(*vs):
    return tuple(sum(c) for c in zip(*vs))


def _neg(v):
    return tuple(-c for c in v)


def _e(dim, k):
    """Doubled coordinates of e_k (1-indexed)."""
    return tuple(_unit(dim, k - 1))


def _half(signs):
    return tuple(signs)


def _classical(label, n):
    if label == "A":
        d = n + 1
        e = lambda k: _e(d, k)
        roots = set()
        for k, l in combinations(range(1, d + 1), 2):
            r = _add(e(k), _neg(e(l)))
            roots |= {r, _neg(r)}
        simple = [_add(e(k), _neg(e(k + 1))) for k in range(1, n + 1)]
        return d, roots, simple
    d = n
    e = lambda k: _e(d, k)
    roots = set()
    for k, l in combinations(range(1, d + 1), 2):
        for sk, sl in product((1, -1), repeat=2):
            roots.add(_add(tuple(sk * c for c in e(k)), tuple(sl * c for c in e(l))))
    simple = [_add(e(k), _neg(e(k + 1))) for k in range(1, n)]
    if label == "B":
        for k in range(1, d + 1):
            roots |= {e(k), _neg(e(k))}
        simple.append(e(n))
    elif label == "C":
        for k in range(1, d + 1):
            two = tuple(2 * c for c in e(k))
            roots |= {two, _neg(two)}
        simple.append(tuple(2 * c for c in e(n)))
    else:  # D
        simple.append(_add(e(n - 1), e(n)))
    return d, roots, simple


def _e8_roots():
    roots = set()
    d = 8
    for k, l in combinations(range(1, d + 1), 2):
        for sk, sl in product((1, -1), repeat=2):
            roots.add(_add(tuple(sk * c for c in _e(d, k)), tuple(sl * c for c in _e(d, l))))
    for signs in product((1, -1), repeat=8):
        if signs.count(-1) % 2 == 0:
            roots.add(_half(signs))
    return roots


def _exceptional(label):
    if label in ("E6", "E7", "E8"):
        rank = EXCEPTIONAL_RANKS[label]
        roots = _e8_roots()
        if label == "E6":
            roots = {r for r in roots if r[5] == r[6] == -r[7]}
        elif label == "E7":
            roots = {r for r in roots if r[6] == -r[7]}
        e = lambda k: _e(8, k)
        simple = [
            (1, -1, -1, -1, -1, -1, -1, 1),  # 1/2(e1 - e2 - ... - e7 + e8)
            _add(e(1), e(2)),
        ]
        for j in range(3, rank + 1):
            simple.append(_add(e(j - 1), _neg(e(j - 2))))
        return 8, roots, simple
    if label == "F4":
        d = 4
        e = lambda k: _e(d, k)
        roots = set()
        for k in range(1, 5):
            roots |= {e(k), _neg(e(k))}
        for k, l in combinations(range(1, 5), 2):
            for sk, sl in product((1, -1), repeat=2):
                roots.add(_add(tuple(sk * c for c in e(k)), tuple(sl * c for c in e(l))))
        for signs in product((1, -1), repeat=4):
            roots.add(_half(signs))
        simple = [(1, -1, -1, -1), e(4), _add(e(3), _neg(e(4))), _add(e(2), _neg(e(3)))]
        return d, roots, simple
    if label == "G2":
        d = 3
        e = lambda k: _e(d, k)
        roots = set()
        for k, l in combinations(range(1, 4), 2):
            r = _add(e(k), _neg(e(l)))
            roots |= {r, _neg(r)}
        for k in range(1, 4):
            others = [l for l in range(1, 4) if l != k]
            r = _add(tuple(2 * c for c in e(k)), _neg(e(others[0])), _neg(e(others[1])))
            roots |= {r, _neg(r)}
        simple = [_add(e(1), _neg(e(2))), _add(tuple(-2 * c for c in e(1)), e(2), e(3))]
        return d, roots, simple
    raise UnsupportedType(label)


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _invert(matrix):
    """Exact inverse of a square matrix of Fractions (Gauss-Jordan)."""
    n = len(matrix)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


@dataclass(frozen=True)
class RootSystem:
    type_label: str
    rank: int
    ambient_dim: int
    roots: Tuple[Root, ...] = field(repr=False)
    simple_roots: Tuple[Root, ...] = field(repr=False)

    @cached_property
    def _gram_inverse(self):
        gram = [[_dot(a, b) for b in self.simple_roots] for a in self.simple_roots]
        return _invert(gram)

    @cached_property
    def _coords(self) -> Dict[Root, Tuple[int, ...]]:
        return {r: self._solve(r) for r in self.roots}

    def _solve(self, root):
        rhs = [_dot(a, root) for a in self.simple_roots]
        coeffs = [sum(g * b for g, b in zip(row, rhs)) for row in self._gram_inverse]
        if any(c.denominator != 1 for c in coeffs):
            raise NotARoot(f"{root} is not an integral combination of simple roots")
        ints = tuple(int(c) for c in coeffs)
        if self.combine(ints) != tuple(root):
            raise NotARoot(f"{root} does not lie in the span of the simple roots")
        return ints

    @cached_property
    def positive_roots(self) -> Tuple[Root, ...]:
        return tuple(r for r in self.roots if all(c >= 0 for c in self._coords[r]))

    @cached_property
    def root_set(self) -> FrozenSet[Root]:
        return frozenset(self.roots)

    def combine(self, coeffs) -> Root:
        """Sum of c_i * alpha_i in doubled ambient coordinates."""
        out = [0] * self.ambient_dim
        for c, a in zip(coeffs, self.simple_roots):
            for i, x in enumerate(a):
                out[i] += c * x
        return tuple(out)

    def simple_coordinates(self, root) -> Tuple[int, ...]:
        root = tuple(root)
        if root not in self.root_set:
            raise NotARoot(f"{root} is not a root of {self.name}")
        return self._coords[root]

    def simple_root(self, i: int) -> Root:
        return self.simple_roots[i - 1]

    def support_mask(self, root) -> int:
        mask = 0
        for i, c in enumerate(self.simple_coordinates(root)):
            if c:
                mask |= 1 << i
        return mask

    @property
    def name(self):
        if self.type_label in EXCEPTIONAL_RANKS:
            return self.type_label
        return f"{self.type_label}{self.rank}"

    def format_root(self, root) -> str:
        """Readable form such as 'e1-e4' or '1/2(e1-e2-e3-e4)'."""
        root = tuple(root)
        if all(c % 2 == 0 for c in root):
            terms = []
            for i, c in enumerate(root):
                c //= 2
                if c == 0:
                    continue
                sign = "-" if c < 0 else "+"
                mag = "" if abs(c) == 1 else str(abs(c))
                terms.append(f"{sign}{mag}e{i + 1}")
            s = "".join(terms)
            return s[1:] if s.startswith("+") else s
        inner = "".join(("-" if c < 0 else "+") + f"e{i + 1}" for i, c in enumerate(root) if c)
        return "1/2(" + (inner[1:] if inner.startswith("+") else inner) + ")"

    def to_json(self) -> dict:
        return {
            "type": self.type_label,
            "rank": self.rank,
            "ambient_dim": self.ambient_dim,
            "scale": 2,
            "simple_roots": [list(a) for a in self.simple_roots],
            "positive_roots": [list(a) for a in sorted(self.positive_roots)],
        }


def build_root_system(type_label, rank=None) -> RootSystem:
    label, n = normalize_type(type_label, rank)
    if label == "E8":
        raise UnsupportedType("E8 is not supported: no real form has a compact hypersurface orbit")
    if label in EXCEPTIONAL_RANKS:
        dim, roots, simple = _exceptional(label)
    else:
        minimum = {"A": 1, "B": 2, "C": 2, "D": 4}[label]
        if n < minimum:
            raise UnsupportedType(f"type {label} requires rank >= {minimum}")
        dim, roots, simple = _classical(label, n)
    rs = RootSystem(label if label in EXCEPTIONAL_RANKS else label, n, dim,
                    tuple(sorted(roots)), tuple(tuple(a) for a in simple))
    # every root must expand over the simple roots; this also validates the tables
    for r in rs.roots:
        rs.simple_coordinates(r)
    return rs


@dataclass(frozen=True)
class ParabolicSubset:
    root_system: RootSystem = field(repr=False)
    gamma: FrozenSet[int]

    @cached_property
    def _gamma_mask(self):
        mask = 0
        for i in self.gamma:
            mask |= 1 << (i - 1)
        return mask

    @cached_property
    def levi_roots(self) -> FrozenSet[Root]:
        rs = self.root_system
        return frozenset(r for r in rs.roots if rs.support_mask(r) & ~self._gamma_mask == 0)

    @cached_property
    def nilradical(self) -> FrozenSet[Root]:
        rs = self.root_system
        return frozenset(r for r in rs.positive_roots if rs.support_mask(r) & ~self._gamma_mask)


def parabolic(rs: RootSystem, gamma_indices) -> ParabolicSubset:
    gamma = frozenset(int(i) for i in gamma_indices)
    bad = [i for i in gamma if not 1 <= i <= rs.rank]
    if bad:
        raise ValueError(f"simple root indices out of range 1..{rs.rank}: {bad}")
    return ParabolicSubset(rs, gamma)


def complement(rs: RootSystem, removed) -> FrozenSet[int]:
    """Gamma = Pi minus the listed simple roots."""
    removed = set(removed)
    return frozenset(i for i in range(1, rs.rank + 1) if i not in removed)


def simple_coordinates(rs: RootSystem, root) -> Tuple[int, ...]:
    return rs.simple_coordinates(root)
