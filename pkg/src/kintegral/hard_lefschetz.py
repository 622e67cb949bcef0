"""Graded nilpotent pairs (V, omega): Jordan types, weight filtrations and the
Hard Lefschetz conditions used for orbifold cohomology."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from .algebra import (
    ShapeError,
    as_matrix,
    column_space_basis,
    exact_parse,
    identity,
    inverse,
    is_zero,
    matrix_power,
    nullspace,
    rank,
    zeros,
)
from .orbifold_data import OrbifoldDatum, frac_mod1


@dataclass(frozen=True, eq=False)
class GradedNilpotentPair:
    """A graded space with a degree +2 operator; ``omega[i, j]`` maps e_j to e_i."""

    degrees: tuple[Fraction, ...]
    omega: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = len(self.degrees)
        object.__setattr__(self, "degrees", tuple(Fraction(d) for d in self.degrees))
        if self.omega.shape != (n, n):
            raise ShapeError("omega must be square of the size of V")
        for i in range(n):
            for j in range(n):
                if not is_zero(self.omega[i, j], 0) and self.degrees[i] != self.degrees[j] + 2:
                    raise ShapeError(f"omega is not homogeneous of degree 2 at ({i}, {j})")

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def graded_dims(self) -> dict[Fraction, int]:
        return dict(sorted(Counter(self.degrees).items()))

    def indices(self, p) -> list[int]:
        return [i for i, d in enumerate(self.degrees) if d == p]

    def power(self, k: int) -> np.ndarray:
        return matrix_power(self.omega, k)

    def graded_rank(self, k: int, p) -> int:
        """rank of omega^k : V^p -> V^{p+2k}."""
        src = self.indices(p)
        dst = self.indices(Fraction(p) + 2 * k)
        if not src or not dst:
            return 0
        return rank(self.power(k)[np.ix_(dst, src)])

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "GradedNilpotentPair":
        degs = tuple(Fraction(str(d)) for d in obj["degrees"])
        om = as_matrix([[exact_parse(x) for x in row] for row in obj["omega"]])
        return cls(degs, om)


@dataclass(frozen=True)
class JordanType:
    """Sorted multiset of (a, lambda): block of a+1 vectors with centre lambda."""

    blocks: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(sorted(((int(a), Fraction(l)) for a, l in self.blocks),
                                                        key=lambda b: (-b[0], -b[1]))))

    @property
    def dim(self) -> int:
        return sum(a + 1 for a, _ in self.blocks)

    def ungraded(self) -> tuple[int, ...]:
        return tuple(sorted((a for a, _ in self.blocks), reverse=True))

    def centres(self) -> set[Fraction]:
        return {l for _, l in self.blocks}

    def to_json(self) -> list:
        return [[a, str(l)] for a, l in self.blocks]


def _check_nilpotent(p: GradedNilpotentPair) -> None:
    if any(not is_zero(x, 0) for x in p.power(p.dim).flat) and p.dim:
        raise ShapeError("omega is not nilpotent")


def jordan_type(p: GradedNilpotentPair) -> JordanType:
    """Block lengths from graded rank sequences; centre = generator degree + length."""
    _check_nilpotent(p)
    blocks = []
    for deg in sorted(set(p.degrees)):
        for a in range(p.dim):
            m = (p.graded_rank(a, deg) - p.graded_rank(a + 1, deg)) \
                - (p.graded_rank(a + 1, deg - 2) - p.graded_rank(a + 2, deg - 2))
            blocks.extend([(a, deg + a)] * m)
    t = JordanType(tuple(blocks))
    if t.dim != p.dim:
        raise ArithmeticError("Jordan type does not account for the whole space")
    return t


def _span(cols: list[np.ndarray], n: int) -> np.ndarray:
    if not cols:
        return zeros(n, 0)
    return np.stack(cols, axis=1)


def _embed(vecs: np.ndarray, idx: list[int], n: int) -> list[np.ndarray]:
    out = []
    for j in range(vecs.shape[1]):
        v = zeros(n)
        for k, i in enumerate(idx):
            v[i] = vecs[k, j]
        out.append(v)
    return out


def _graded_kernel(p: GradedNilpotentPair, k: int, deg) -> list[np.ndarray]:
    """Basis of ker omega^k inside V^deg, as vectors of V."""
    idx = p.indices(deg)
    if not idx:
        return []
    dst = p.indices(Fraction(deg) + 2 * k)
    if k == 0:
        return []
    if not dst:
        return _embed(identity(len(idx)), idx, p.dim)
    block = p.power(k)[np.ix_(dst, idx)]
    return _embed(nullspace(block), idx, p.dim)


def jordan_basis(p: GradedNilpotentPair) -> list[tuple[int, Fraction, np.ndarray]]:
    """Homogeneous generators v with omega^a v != 0 = omega^{a+1} v, one per block.

    Each generator is picked from K_{a+1} cap V^p modulo
    (K_a cap V^p) + omega(K_{a+2} cap V^{p-2}); ties follow the basis order.
    """
    _check_nilpotent(p)
    n = p.dim
    out = []
    for deg in sorted(set(p.degrees)):
        for a in range(n - 1, -1, -1):
            W = _graded_kernel(p, a + 1, deg)
            if not W:
                continue
            S = _graded_kernel(p, a, deg)
            S = S + [p.omega @ v for v in _graded_kernel(p, a + 2, deg - 2)]
            chosen = list(S)
            base = rank(_span(chosen, n)) if chosen else 0
            for w in W:
                trial = chosen + [w]
                r = rank(_span(trial, n))
                if r > base:
                    chosen.append(w)
                    base = r
                    out.append((a, deg + a, w))
    return out


def canonical_model(t: JordanType) -> GradedNilpotentPair:
    """The standard pair with one Jordan chain per block of ``t``."""
    degs: list[Fraction] = []
    pos = []
    for a, lam in t.blocks:
        start = len(degs)
        for i in range(a + 1):
            degs.append(lam - a + 2 * i)
        pos.append((start, a))
    om = zeros(len(degs), len(degs))
    for start, a in pos:
        for i in range(a):
            om[start + i + 1, start + i] = Fraction(1)
    return GradedNilpotentPair(tuple(degs), om)


def chain_matrix(p: GradedNilpotentPair, basis=None) -> np.ndarray:
    """Columns omega^i v for all generators v: an adapted basis of V."""
    basis = jordan_basis(p) if basis is None else basis
    cols = []
    for a, _, v in sorted(basis, key=lambda b: (-b[0], -b[1])):
        w = v
        for _ in range(a + 1):
            cols.append(w)
            w = p.omega @ w
    return _span(cols, p.dim)


def is_bicentric_hl(p: GradedNilpotentPair) -> dict | None:
    """Bicentre {n, n+1} and the split V = V_0 (+) V_1, or None."""
    t = jordan_type(p)
    cs = sorted(t.centres())
    if not cs:
        return {"n": None, "V0": zeros(0, 0), "V1": zeros(0, 0), "type": t}
    if len(cs) > 2 or (len(cs) == 2 and cs[1] - cs[0] != 1):
        return None
    n = cs[0]
    v0, v1 = [], []
    for a, lam, v in jordan_basis(p):
        w = v
        for _ in range(a + 1):
            (v0 if lam == n else v1).append(w)
            w = p.omega @ w
    return {"n": n, "V0": _span(v0, p.dim), "V1": _span(v1, p.dim), "type": t}


def hl_isomorphisms_hold(p: GradedNilpotentPair) -> bool:
    """omega^k : V_j^{n+j-k} -> V_j^{n+j+k} is an isomorphism for all k, j."""
    bc = is_bicentric_hl(p)
    if bc is None:
        return False
    if bc["n"] is None:
        return True
    n = bc["n"]
    for j, key in ((0, "V0"), (1, "V1")):
        V = bc[key]
        if V.shape[1] == 0:
            continue
        degs = {}
        for c in range(V.shape[1]):
            d = {p.degrees[i] for i in range(p.dim) if not is_zero(V[i, c], 0)}
            degs.setdefault(d.pop(), []).append(V[:, c])
        for k in range(p.dim + 1):
            lo, hi = degs.get(n + j - k, []), degs.get(n + j + k, [])
            if len(lo) != len(hi):
                return False
            if lo and rank(_span([p.power(k) @ v for v in lo], p.dim)) != len(lo):
                return False
    return True


def _subspace_eq(a: np.ndarray, b: np.ndarray) -> bool:
    ra, rb = rank(a) if a.shape[1] else 0, rank(b) if b.shape[1] else 0
    if ra != rb:
        return False
    if ra == 0:
        return True
    return rank(np.concatenate([a, b], axis=1)) == ra


def weight_filtration(p: GradedNilpotentPair) -> dict[int, np.ndarray]:
    """W_k = sum_{j>=0} ker omega^{k+j+1} cap im omega^j, for -dim <= k <= dim."""
    _check_nilpotent(p)
    n = p.dim
    out = {}
    for k in range(-n, n + 1):
        cols = []
        for j in range(n + 1):
            e = k + j + 1
            if e <= 0:
                continue
            ker = nullspace(p.power(e))
            im = p.power(j)
            # intersection of column spaces: solve ker x = im y
            if ker.shape[1] == 0:
                continue
            both = np.concatenate([ker, -im], axis=1)
            sol = nullspace(both)
            for c in range(sol.shape[1]):
                cols.append(ker @ sol[: ker.shape[1], c])
        basis = column_space_basis(_span(cols, n)) if cols else zeros(n, 0)
        out[k] = basis
    return out


def weight_filtration_check(p: GradedNilpotentPair) -> dict:
    """Verify omega W_k in W_{k-2}, omega^i : Gr_i = Gr_{-i}, and the bicentric description."""
    W = weight_filtration(p)
    n = p.dim

    def dim(k):
        if k < -n:
            return 0
        if k > n:
            return n
        return W[k].shape[1]

    def get(k):
        if k < -n:
            return zeros(n, 0)
        if k > n:
            return identity(n)
        return W[k]

    ok_shift = all(rank(np.concatenate([get(k - 2), p.omega @ get(k)], axis=1)) == dim(k - 2)
                   for k in range(-n, n + 1) if get(k).shape[1])
    ok_iso = True
    for i in range(0, n + 1):
        gi = dim(i) - dim(i - 1)
        gmi = dim(-i) - dim(-i - 1)
        if gi != gmi:
            ok_iso = False
            continue
        if gi == 0:
            continue
        # omega^i W_i + W_{-i-1} must be all of W_{-i}
        img = np.concatenate([get(-i - 1), p.power(i) @ get(i)], axis=1)
        if rank(img) != dim(-i):
            ok_iso = False
    ok_bic = None
    bc = is_bicentric_hl(p)
    if bc is not None and bc["n"] is not None:
        c = bc["n"]
        ok_bic = True
        for k in range(-n, n + 1):
            cols = []
            for key, shift in (("V0", 0), ("V1", 1)):
                V = bc[key]
                for j in range(V.shape[1]):
                    d = next(p.degrees[i] for i in range(n) if not is_zero(V[i, j], 0))
                    if d >= c + shift - k:
                        cols.append(V[:, j])
            if not _subspace_eq(_span(cols, n), get(k)):
                ok_bic = False
    return {"shift": ok_shift, "gr_iso": ok_iso, "bicentric_form": ok_bic,
            "pass": ok_shift and ok_iso and ok_bic is not False}


def graded_iso_witness(p1: GradedNilpotentPair, p2: GradedNilpotentPair) -> dict:
    """A graded phi with phi omega_1 = omega_2 phi, or a diagnostic."""
    if p1.graded_dims() != p2.graded_dims():
        return {"witness": None, "reason": "graded dimensions differ"}
    t1, t2 = jordan_type(p1), jordan_type(p2)
    if t1.ungraded() != t2.ungraded():
        return {"witness": None, "reason": "no ungraded intertwiner: block sizes differ"}
    if t1 != t2:
        why = "graded Jordan types differ"
        if is_bicentric_hl(p1) is None:
            why += " (first pair is not bicentric)"
        return {"witness": None, "reason": why, "types": (t1, t2)}
    B1 = chain_matrix(p1)
    B2 = chain_matrix(p2)
    phi = B2 @ inverse(B1)
    return {"witness": phi, "reason": None, "types": (t1, t2)}


# --------------------------------------------------------------------------
# criteria on orbifold data

def hl_coarse_check(datum: OrbifoldDatum) -> bool:
    """Hard Lefschetz for the coarse map holds iff age_v = age_{inv(v)} everywhere."""
    return all(s.age == datum.sector(s.inv).age for s in datum.sectors)


def gen_hl_coarse_check(datum: OrbifoldDatum) -> dict:
    """For each fractional age f, look for n_f with n_v + 2 age_v in {n_f, n_f + 1}."""
    groups: dict[Fraction, list] = {}
    for s in datum.sectors:
        groups.setdefault(frac_mod1(s.age), []).append(s)
    out = {}
    for f, members in sorted(groups.items()):
        vals = sorted({s.dim + 2 * s.age for s in members})
        ok = len(vals) == 1 or (len(vals) == 2 and vals[1] - vals[0] == 1)
        out[str(f)] = {"sectors": [s.label for s in members], "values": [str(v) for v in vals],
                       "n_f": str(vals[0]) if ok else None, "pass": ok}
    return {"groups": out, "pass": all(g["pass"] for g in out.values())}


def cohomology_pair(datum: OrbifoldDatum, xi: np.ndarray | None = None) -> GradedNilpotentPair:
    """(H_CR, cup with an untwisted class) as a graded pair, classes by Chen-Ruan degree."""
    xi = datum.line_bundles[0].xi0 if xi is None else xi
    return GradedNilpotentPair(tuple(datum.cr_degrees()), datum.cup_operator(xi))


def load_pair(path) -> GradedNilpotentPair:
    with open(path) as fh:
        return GradedNilpotentPair.from_json(json.load(fh))
