"""Truncated quantum D-modules.

Correlator tables are inputs.  From them we build the quantum product as a
matrix-valued power series in the chosen tau' coordinates and the Novikov
variables q_a = exp(t^a), then the Dubrovin connection, its fundamental
solution L(tau, z) (and the dual solution on compactly supported classes),
the J-function and the flat coordinates of the standard opposite subspace.

Coordinate names: ``t<i>`` is the coordinate dual to basis class i, ``q`` (or
``q1``, ``q2``, ...) the Novikov variables of the nef basis.  L is returned as
``Lhat(q, tau', z) exp(-tau_{0,2}/z)``; the exponential factor is available
through :meth:`FundamentalSolution.full` with weight-zero log coordinates.
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Any, Iterable, Mapping, Sequence

import mpmath
import numpy as np

from .algebra import (
    DEFAULT_TOLERANCE,
    SeriesSpace,
    cnum,
    ShapeError,
    TruncatedSeries,
    exact_parse,
    format_scalar,
    identity,
    inverse,
    is_zero,
    max_abs,
    rank,
    zeros,
)
from .orbifold_data import DataError, OrbifoldDatum


class MissingCorrelatorError(KeyError):
    """The table does not determine the product to the requested order."""

    def __init__(self, needed: list, order: int, complete_through: int):
        self.needed = needed
        super().__init__(f"correlators known through order {complete_through}, "
                         f"order {order} requested; {len(needed)} keys missing, e.g. {needed[:5]}")


class HomogeneityError(DataError):
    pass


class NonFlatError(ArithmeticError):
    pass


class BigCellError(ArithmeticError):
    pass


class MiniversalityError(ArithmeticError):
    pass


class LocusError(ValueError):
    pass


Key = tuple  # (sorted ordinary insertions, dual index or None, d)


# --------------------------------------------------------------------------
# correlator tables

@dataclass(frozen=True, eq=False)
class CorrelatorTable:
    """Genus-zero primary correlators <phi_..., c_k>_{0,m,d} (divisor-reduced).

    For compact data every insertion is an ordinary basis index and ``dual`` is
    None.  For non-compact data exactly one insertion is compactly supported
    and stored separately as ``dual``.  Absent keys of weighted degree at most
    ``complete_through`` are zero.
    """

    entries: Mapping[Key, Any]
    nef_rank: int = 0
    complete_through: int | None = None
    weights: Mapping[int, int] = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj: Mapping[str, Any], datum: OrbifoldDatum) -> "CorrelatorTable":
        r = int(obj.get("nef_basis", len(datum.nef_basis)))
        if r != len(datum.nef_basis):
            raise DataError(f"/nef_basis: table uses {r} Novikov variables, datum has {len(datum.nef_basis)}")
        entries: dict = {}
        for n, e in enumerate(obj.get("entries", [])):
            ins = tuple(sorted(int(i) for i in e["insertions"]))
            dual = e.get("compact")
            d = tuple(int(x) for x in e.get("d", [0] * r))
            if len(d) != r:
                raise DataError(f"/entries/{n}/d: expected {r} components")
            if datum.compact and dual is not None:
                raise DataError(f"/entries/{n}/compact: compact data take ordinary insertions only")
            if not datum.compact and dual is None:
                raise DataError(f"/entries/{n}/compact: non-compact data need one compact insertion")
            if any(not (0 <= i < datum.rank) for i in ins):
                raise DataError(f"/entries/{n}/insertions: index out of range")
            key = (ins, None if dual is None else int(dual), d)
            val = exact_parse(e["value"])
            if key in entries and entries[key] != val:
                raise DataError(f"/entries/{n}: conflicting duplicate of an earlier entry")
            if not homogeneous(key, datum):
                raise HomogeneityError(f"/entries/{n}: insertion degrees violate the degree axiom")
            entries[key] = val
        ct = obj.get("complete_through")
        weights = {int(k): int(v) for k, v in obj.get("weights", {}).items()}
        return cls(entries, r, None if ct is None else int(ct), weights)

    def to_json(self) -> dict:
        out = []
        for (ins, dual, d), v in sorted(self.entries.items(), key=lambda kv: (kv[0][2], kv[0][0], kv[0][1] or -1)):
            e = {"insertions": list(ins), "d": list(d), "value": format_scalar(v)}
            if dual is not None:
                e["compact"] = dual
            out.append(e)
        obj: dict = {"nef_basis": self.nef_rank, "entries": out}
        if self.complete_through is not None:
            obj["complete_through"] = self.complete_through
        if self.weights:
            obj["weights"] = {str(k): v for k, v in self.weights.items()}
        return obj

    def perturbed(self, amount=Fraction(1, 7), which: int = 0, avoid=()) -> "CorrelatorTable":
        """Copy with one non-classical entry shifted (negative controls).

        Entries with an insertion in ``avoid`` are skipped; pass the divisor
        indices, since those entries are reconstructed by the divisor axiom.
        """
        keys = [k for k in sorted(self.entries, key=lambda k: (k[2], k[0], k[1] or -1))
                if (any(k[2]) or len(k[0]) + (k[1] is not None) > 3) and not set(k[0]) & set(avoid)]
        if not keys:
            keys = sorted(self.entries, key=lambda k: (k[2], k[0], k[1] or -1))
        k = keys[which % len(keys)]
        new = dict(self.entries)
        new[k] = new[k] + amount
        return CorrelatorTable(new, self.nef_rank, self.complete_through, self.weights)


def homogeneous(key: Key, datum: OrbifoldDatum) -> bool:
    """Degree axiom: sum of degrees = 2(n + <c_1, d> + m - 3)."""
    ins, dual, d = key
    degs = datum.cr_degrees()
    total = sum(degs[i] for i in ins)
    m = len(ins)
    if dual is not None:
        total += datum.cr_degrees(True)[dual]
        m += 1
    c1d = sum(c * k for c, k in zip(nef_coordinates(datum, datum.c1), d))
    return total == 2 * (datum.dimension + c1d + m - 3)


def load_table(path, datum: OrbifoldDatum) -> CorrelatorTable:
    with open(path) as fh:
        return CorrelatorTable.from_json(json.load(fh), datum)


def divisor_indices(datum: OrbifoldDatum) -> list[int]:
    """Basis indices of the nef classes p_a (each must be a basis vector)."""
    out = []
    for a, p in enumerate(datum.nef_basis):
        nz = [i for i, x in enumerate(p) if not is_zero(x, 0)]
        if len(nz) != 1 or p[nz[0]] != 1:
            raise DataError(f"/nef_basis/{a}: nef classes must be basis classes")
        out.append(nz[0])
    u = datum.untwisted.label
    h2 = [i for i, c in enumerate(datum.basis) if c.sector == u and c.degree == 2]
    if sorted(out) != sorted(h2):
        raise DataError("the nef basis must span the untwisted degree-2 classes")
    return out


def nef_coordinates(datum: OrbifoldDatum, x: np.ndarray) -> list:
    """Coefficients of an untwisted degree-2 class on the nef basis."""
    if not datum.nef_basis:
        return []
    idx = divisor_indices(datum)
    return [x[i] for i in idx]


def novikov_names(r: int) -> list[str]:
    return ["q"] if r == 1 else [f"q{a + 1}" for a in range(r)]


# --------------------------------------------------------------------------
# quantum product

class QuantumProduct:
    """phi_i o_tau as matrix-valued series A_i(t', q), for every basis index i.

    ``A[i][l, j]`` is the coefficient of phi_l in phi_i o phi_j.
    """

    def __init__(self, table: CorrelatorTable, datum: OrbifoldDatum, order: int,
                 directions: Sequence[int] | None = None, weights: Mapping[str, int] | None = None,
                 q_weight: int = 1):
        self.table = table
        self.datum = datum
        self.order = int(order)
        self.unit = datum.class_index(datum.basis[[i for i, c in enumerate(datum.basis)
                                                   if c.sector == datum.untwisted.label and c.degree == 0][0]].name)
        self.divisors = divisor_indices(datum) if datum.nef_basis else []
        cands = [i for i in range(datum.rank) if i != self.unit and i not in self.divisors]
        self.directions = list(cands if directions is None else directions)
        for i in self.directions:
            if i not in cands:
                raise DataError(f"t{i} is not a tau' coordinate (unit and divisor directions are fixed)")
        self.qnames = novikov_names(len(self.divisors))
        names = [f"t{i}" for i in self.directions] + self.qnames
        w = dict(weights or {})
        for k, v in table.weights.items():
            w.setdefault(f"t{k}", v)
        ws = tuple(w.get(n, q_weight if n in self.qnames else 1) for n in names)
        if any(x <= 0 for x in ws):
            raise DataError("variable weights must be positive")
        self.space = SeriesSpace(tuple(names), self.order, 0, 0, ws)
        c1n = nef_coordinates(datum, datum.c1) if self.divisors else []
        rest = datum.c1.copy()
        for i in self.divisors:
            rest[i] = Fraction(0)
        if any(not is_zero(x, 0) for x in rest):
            raise DataError("c_1 must lie in the span of the nef basis")
        self.c1_nef = c1n
        self._check_complete()
        self.A = self._build()

    # monomials -----------------------------------------------------------------
    @cached_property
    def monomials(self) -> list[tuple[int, ...]]:
        sp = self.space
        out = []
        bounds = [sp.order // w for w in sp.weights]
        for e in itertools.product(*[range(b + 1) for b in bounds]):
            if sp.degree(e) <= sp.order:
                out.append(tuple(e))
        out.sort(key=lambda e: (sp.degree(e), e))
        return out

    def _split(self, e):
        k = len(self.directions)
        L = []
        for i, x in zip(self.directions, e[:k]):
            L.extend([i] * x)
        return L, tuple(e[k:])

    def _value(self, ins: list[int], dual: int | None, d: tuple):
        """Correlator with the unit handled by the string equation."""
        datum = self.datum
        u = self.unit
        if dual is None:
            if u in ins:
                if len(ins) != 3 or any(d):
                    return 0
                rest = list(ins)
                rest.remove(u)
                return datum.pairing[rest[0], rest[1]]
        else:
            if u in ins:
                if len(ins) != 2 or any(d):
                    return 0
                rest = list(ins)
                rest.remove(u)
                return datum.pairing[dual, rest[0]]
        key = (tuple(sorted(ins)), dual, tuple(d))
        if not homogeneous(key, datum):
            return 0
        return self.table.entries.get(key, 0)

    def _check_complete(self):
        ct = self.table.complete_through
        if ct is None or ct >= self.order:
            return
        needed = []
        for e in self.monomials:
            if self.space.degree(e) <= ct:
                continue
            L, d = self._split(e)
            for i, j in itertools.combinations_with_replacement(range(self.datum.rank), 2):
                for k in range(len(self.datum.dual_basis)):
                    if self.datum.compact:
                        ins, dual = [i, j, k] + L, None
                    else:
                        ins, dual = [i, j] + L, k
                    if self.unit in ins:
                        continue
                    key = (tuple(sorted(ins)), dual, d)
                    if homogeneous(key, self.datum) and key not in self.table.entries:
                        needed.append(key)
        if needed:
            needed = sorted(set(needed), key=lambda k: (k[2], k[0], k[1] or -1))
            raise MissingCorrelatorError(needed, self.order, ct)

    def _build(self) -> list[TruncatedSeries]:
        datum = self.datum
        N = datum.rank
        nd = len(datum.dual_basis)
        Pinv = datum.pairing_inverse
        A = []
        for i in range(N):
            terms = {}
            for e in self.monomials:
                L, d = self._split(e)
                denom = 1
                for x in e[: len(self.directions)]:
                    denom *= factorial(x)
                Y = zeros(nd, N)
                nonzero = False
                for j in range(N):
                    for k in range(nd):
                        if datum.compact:
                            v = self._value([i, j, k] + L, None, d)
                        else:
                            v = self._value([i, j] + L, k, d)
                        if not is_zero(v, 0):
                            Y[k, j] = v
                            nonzero = True
                if nonzero:
                    terms[(e, 0)] = (Pinv @ Y) / denom
            A.append(TruncatedSeries(self.space, terms))
        return A

    # derived data -------------------------------------------------------------------
    def zero(self) -> TruncatedSeries:
        return TruncatedSeries(self.space, {})

    def classical(self, i: int) -> np.ndarray:
        return self.A[i].coefficient(tuple([0] * len(self.space.variables)), 0, zeros(self.datum.rank, self.datum.rank))

    def product(self, a: np.ndarray, b: np.ndarray) -> TruncatedSeries:
        """a o_tau b as a vector-valued series."""
        M = sum((self.A[i] * a[i] for i in range(self.datum.rank) if not is_zero(a[i], 0)), self.zero())
        return M * b

    def variable_of(self, i: int) -> str:
        if i in self.directions:
            return f"t{i}"
        if i in self.divisors:
            return self.qnames[self.divisors.index(i)]
        raise KeyError(i)

    def derivative(self, s: TruncatedSeries, i: int) -> TruncatedSeries:
        """d/dt^i; on Novikov variables this is q d/dq."""
        if i == self.unit:
            return TruncatedSeries(s.space, {})
        if i in self.directions:
            return s.derivative(f"t{i}")
        return s.euler(self.qnames[self.divisors.index(i)])

    def lost_degree(self, i: int) -> int:
        """Weighted degree d/dt^i removes; q d/dq keeps the degree."""
        if i in self.directions:
            return self.space.weights[self.space.variables.index(f"t{i}")]
        return 0

    def reliable(self, s: TruncatedSeries, lost: int) -> TruncatedSeries:
        """Drop the top ``lost`` degrees, where a derivative saw truncated input."""
        if not lost:
            return s
        top = self.order - lost
        return TruncatedSeries(s.space, {k: v for k, v in s.terms.items() if self.space.degree(k[0]) <= top})

    def euler_operator(self) -> TruncatedSeries:
        """E o_tau restricted to the active coordinates (t^0 = 0)."""
        degs = self.datum.cr_degrees()
        out = self.zero()
        for i in self.directions:
            w = 1 - Fraction(degs[i]) / 2
            if w:
                out = out + TruncatedSeries.variable(self.space, f"t{i}") * self.A[i] * w
        for a, i in enumerate(self.divisors):
            c = self.c1_nef[a]
            if not is_zero(c, 0):
                out = out + self.A[i] * c
        return out

    def apply_euler(self, s: TruncatedSeries) -> TruncatedSeries:
        """The Euler vector field acting as a derivation on coefficients."""
        degs = self.datum.cr_degrees()
        out = TruncatedSeries(s.space, {})
        for i in self.directions:
            w = 1 - Fraction(degs[i]) / 2
            if w:
                out = out + s.euler(f"t{i}") * w
        for a, i in enumerate(self.divisors):
            c = self.c1_nef[a]
            if not is_zero(c, 0):
                out = out + s.euler(self.qnames[a]) * c
        return out


def quantum_product(table: CorrelatorTable, datum: OrbifoldDatum, order: int, **kw) -> QuantumProduct:
    return QuantumProduct(table, datum, order, **kw)


def _residual(s: TruncatedSeries):
    return s.max_abs()


def wdvv_check(qp: QuantumProduct, tol: float = DEFAULT_TOLERANCE) -> dict:
    """Associativity, commutativity, unit and Frobenius property, coefficient-wise."""
    N = qp.datum.rank
    assoc = mpmath.mpf(0)
    for i in range(N):
        for j in range(i + 1, N):
            assoc = max(assoc, _residual(qp.A[i] * qp.A[j] - qp.A[j] * qp.A[i]))
    comm = mpmath.mpf(0)
    for i in range(N):
        for j in range(N):
            comm = max(comm, _residual(qp.A[i].map(lambda m, j=j: m[:, j]) - qp.A[j].map(lambda m, i=i: m[:, i])))
    unit = _residual(qp.A[qp.unit] - identity(N))
    # Frobenius: (a o b, c) = (a, b o c)  <=>  P A_i = (P A_i)^T-compatible
    frob = mpmath.mpf(0)
    if qp.datum.compact:
        P = qp.datum.pairing
        for i in range(N):
            frob = max(frob, _residual(qp.A[i].map(lambda m: P @ m - (P @ m).T)))
    worst = max(assoc, comm, unit, frob)
    return {"associativity": assoc, "commutativity": comm, "unit": unit, "frobenius": frob,
            "max_residual": worst, "pass": worst <= tol}


def euler_axiom_check(qp: QuantumProduct, tol: float = DEFAULT_TOLERANCE) -> dict:
    """E(c_ij^k) = (1 - w_i - w_j + w_k) c_ij^k with w = 1 - deg/2."""
    degs = qp.datum.cr_degrees()
    w = [1 - Fraction(d) / 2 for d in degs]
    N = qp.datum.rank
    worst = mpmath.mpf(0)
    for i in range(N):
        Ei = qp.apply_euler(qp.A[i])
        expect = qp.A[i].map(lambda m: np.array([[m[k, j] * (1 - w[i] - w[j] + w[k]) for j in range(N)]
                                                  for k in range(N)], dtype=object))
        worst = max(worst, _residual(Ei - expect))
    return {"residual": worst, "pass": worst <= tol}


def euler_field(datum: OrbifoldDatum) -> TruncatedSeries:
    """E = c_1 + sum_i (1 - deg phi_i / 2) t^i phi_i as a vector field (linear series)."""
    names = tuple(f"t{i}" for i in range(datum.rank))
    sp = SeriesSpace(names, 1, 0, 0)
    out = TruncatedSeries.constant(sp, datum.c1.copy())
    for i, d in enumerate(datum.cr_degrees()):
        w = 1 - Fraction(d) / 2
        if w:
            out = out + TruncatedSeries.variable(sp, f"t{i}") * (datum.basis_vector(i) * w)
    return out


# --------------------------------------------------------------------------
# Dubrovin connection

def adjoint(m: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Adjoint on the dual space: (A^dag c, phi) = (c, A phi)."""
    Pi = inverse(P)
    return Pi.T @ m.T @ P.T


class DubrovinConnection:
    """nabla_i = d_i + A_i / z and nabla_{z d_z} = z d_z - (E o)/z + mu.

    With ``dual=True`` the operators act on compactly supported classes
    through adjoints.
    """

    def __init__(self, qp: QuantumProduct, dual: bool = False, mu: np.ndarray | None = None):
        self.qp = qp
        self.datum = qp.datum
        self.dual = dual
        P = self.datum.pairing
        if dual:
            self.A = [a.map(lambda m: adjoint(m, P)) for a in qp.A]
        else:
            self.A = list(qp.A)
        self.mu = self.datum.mu_matrix(dual) if mu is None else mu
        self.size = len(self.datum.dual_basis) if dual else self.datum.rank
        E = qp.euler_operator()
        self.E = E.map(lambda m: adjoint(m, P)) if dual else E

    @property
    def space(self) -> SeriesSpace:
        return self.qp.space

    def coordinates(self) -> list[int]:
        return [self.qp.unit] + list(self.qp.directions) + list(self.qp.divisors)

    def flatness(self, tol: float = DEFAULT_TOLERANCE) -> dict:
        qp = self.qp
        coords = [i for i in self.coordinates() if i != qp.unit]
        worst_tt = mpmath.mpf(0)
        for a, b in itertools.combinations(coords, 2):
            # [nabla_a, nabla_b] = (d_a A_b - d_b A_a)/z + [A_a, A_b]/z^2
            r1 = qp.derivative(self.A[b], a) - qp.derivative(self.A[a], b)
            r2 = self.A[a] * self.A[b] - self.A[b] * self.A[a]
            k = max(qp.lost_degree(a), qp.lost_degree(b))
            worst_tt = max(worst_tt, _residual(qp.reliable(r1, k)), _residual(qp.reliable(r2, k)))
        worst_z = mpmath.mpf(0)
        # the unit direction holds identically: E carries t^0 1 and A_0 = id
        for a in coords:
            # [nabla_a, nabla_{z d_z}]: z^{-2} part [A_a, E o]; z^{-1} part -d_a(E o) + A_a + [A_a, mu]
            r2 = self.A[a] * self.E - self.E * self.A[a]
            r1 = -qp.derivative(self.E, a) + self.A[a] + self.A[a].map(lambda m: m @ self.mu - self.mu @ m)
            k = qp.lost_degree(a)
            worst_z = max(worst_z, _residual(qp.reliable(r1, k)), _residual(qp.reliable(r2, k)))
        worst = max(worst_tt, worst_z)
        return {"tau_tau": worst_tt, "tau_z": worst_z, "max_residual": worst, "pass": worst <= tol}


def connection_flatness(conn: DubrovinConnection, tol: float = DEFAULT_TOLERANCE) -> dict:
    return conn.flatness(tol)


def default_z_window(qp: QuantumProduct) -> int:
    """Largest z^{-1} power the homogeneity of L allows at this order, plus slack."""
    degs = qp.datum.cr_degrees()
    per = [Fraction(1)]
    for i in qp.directions:
        per.append(1 - Fraction(degs[i]) / 2)
    per.extend(Fraction(c) for c in qp.c1_nef if not is_zero(c, 0))
    m = max(per)
    return int(qp.order * m) + qp.datum.dimension + 1


# --------------------------------------------------------------------------
# fundamental solutions

def _mat_key_add(store, zp, m):
    if zp in store:
        store[zp] = store[zp] + m
    else:
        store[zp] = m


class FundamentalSolution:
    """Lhat(q, tau', z) with L = Lhat exp(-tau_{0,2}/z); dual version on H_c."""

    def __init__(self, conn: DubrovinConnection, z_lo: int | None = None, check_flat: bool = True):
        qp = conn.qp
        if check_flat:
            fl = conn.flatness()
            if not fl["pass"]:
                raise NonFlatError(f"connection is not flat (residual {mpmath.nstr(fl['max_residual'], 5)})")
        self.conn = conn
        self.qp = qp
        self.z_lo = default_z_window(qp) if z_lo is None else int(z_lo)
        self.space = qp.space.with_window(self.z_lo, 0)
        self.cup = [self._classical_cup(i) for i in qp.divisors]
        self.series = self._solve()

    def _classical_cup(self, i: int) -> np.ndarray:
        datum = self.qp.datum
        A0 = self.conn.A[i].coefficient(tuple([0] * len(self.qp.space.variables)), 0, None)
        cup = datum.cup_operator(datum.basis_vector(i), dual=self.conn.dual)
        if A0 is None:
            A0 = zeros(self.conn.size, self.conn.size)
        if max_abs(A0 - cup) > DEFAULT_TOLERANCE:
            raise DataError(f"classical product by t{i} disagrees with the datum's cup product")
        return cup

    def _solve(self) -> TruncatedSeries:
        qp, conn = self.qp, self.conn
        n = conn.size
        k = len(qp.directions)
        Lo = self.z_lo
        coeff = {}  # monomial -> {zpow: matrix}
        zero_e = tuple([0] * len(qp.space.variables))
        coeff[zero_e] = {0: identity(n)}
        Aterms = [{e: c for (e, _), c in conn.A[i].terms.items()} for i in range(qp.datum.rank)]

        def sub(e, f):
            return tuple(x - y for x, y in zip(e, f))

        def leq(f, e):
            return all(x <= y for x, y in zip(f, e))

        for e in qp.monomials:
            if e == zero_e:
                continue
            store: dict = {}
            pos = next((j for j in range(k) if e[j] > 0), None)
            if pos is not None:
                i = qp.directions[pos]
                base = list(e)
                base[pos] -= 1
                base = tuple(base)
                for f, Am in Aterms[i].items():
                    if not leq(f, base):
                        continue
                    rest = coeff.get(sub(base, f))
                    if not rest:
                        continue
                    for zp, M in rest.items():
                        if zp - 1 < -Lo:
                            continue
                        _mat_key_add(store, zp - 1, (Am @ M) * Fraction(-1, e[pos]))
            else:
                a = next(j for j in range(k, len(e)) if e[j] > 0) - k
                i = qp.divisors[a]
                P = self.cup[a]
                R: dict = {}
                for f, Am in Aterms[i].items():
                    if f == zero_e or not leq(f, e):
                        continue
                    rest = coeff.get(sub(e, f))
                    if not rest:
                        continue
                    for zp, M in rest.items():
                        if zp - 1 < -Lo:
                            continue
                        _mat_key_add(R, zp - 1, -(Am @ M))
                ea = e[k + a]
                prev = zeros(n, n)
                for m in range(1, Lo + 1):
                    Rm = R.get(-m, zeros(n, n))
                    X = (Rm - (P @ prev - prev @ P)) / ea
                    if any(not is_zero(x, 0) for x in X.flat):
                        store[-m] = X
                    prev = X
            store = {zp: M for zp, M in store.items() if any(not is_zero(x, 0) for x in M.flat)}
            if store:
                coeff[e] = store
        terms = {}
        for e, st in coeff.items():
            for zp, M in st.items():
                terms[(e, zp)] = M
        return TruncatedSeries(self.space, terms)

    # views ------------------------------------------------------------------
    def log_names(self) -> list[str]:
        return [f"t{self.qp.unit}"] + [f"t{i}" for i in self.qp.divisors]

    def full_space(self, extra: Sequence[str] = ()) -> SeriesSpace:
        names = list(self.space.variables) + self.log_names() + list(extra)
        weights = list(self.space.weights) + [0] * (len(self.log_names()) + len(extra))
        return SeriesSpace(tuple(names), self.space.order, self.space.z_lo, self.space.z_hi, tuple(weights))

    def lift(self, s: TruncatedSeries, space: SeriesSpace) -> TruncatedSeries:
        pad = len(space.variables) - len(s.space.variables)
        return TruncatedSeries(space, {(e + (0,) * pad, z): c for (e, z), c in s.terms.items()})

    def exp_factor(self, space: SeriesSpace, include_unit: bool = True) -> TruncatedSeries:
        """exp(-(t^0 + sum_a t^a p_a)/z) acting on the (dual) space."""
        qp, n = self.qp, self.conn.size
        gen = TruncatedSeries(space, {})
        names = self.log_names()
        if include_unit:
            gen = gen + TruncatedSeries.monomial(space, {names[0]: 1}, -1, identity(n) * -1)
        for a, i in enumerate(qp.divisors):
            gen = gen + TruncatedSeries.monomial(space, {names[a + 1]: 1}, -1, self.cup[a] * -1)
        return gen.exp()

    def full(self, include_unit: bool = True, extra: Sequence[str] = ()) -> TruncatedSeries:
        sp = self.full_space(extra)
        return self.lift(self.series, sp) * self.exp_factor(sp, include_unit)

    def adjoint_series(self, s: TruncatedSeries | None = None) -> TruncatedSeries:
        """L^dag = P^{-1} L^T P (maps ordinary classes to ordinary classes)."""
        P = self.qp.datum.pairing
        Pi = self.qp.datum.pairing_inverse
        s = self.series if s is None else s
        return s.map(lambda m: Pi @ m.T @ P)


def fundamental_solution(conn: DubrovinConnection, z_lo: int | None = None) -> FundamentalSolution:
    return FundamentalSolution(conn, z_lo)


def unitarity_check(L: FundamentalSolution, Ltilde: FundamentalSolution | None = None,
                    tol: float = DEFAULT_TOLERANCE) -> dict:
    """(L(-z) a, L(z) b) = (a, b); for non-compact data the dual solution supplies a."""
    datum = L.qp.datum
    P = datum.pairing
    left = L if Ltilde is None else Ltilde
    if not datum.compact and Ltilde is None:
        raise DataError("non-compact data need the dual fundamental solution")
    M = left.series.z_negate().map(lambda m: m.T.copy()) * P * L.series
    r = (M - P).max_abs()
    return {"residual": r, "pass": r <= tol}


def j_function(L: FundamentalSolution, Ltilde: FundamentalSolution | None = None,
               with_logs: bool = False) -> TruncatedSeries:
    """J(tau, -z) = L(tau, -z)^{-1} 1, computed as P^{-1} L'(tau, z)^T P 1.

    L' is L itself for compact data and the dual solution otherwise.
    """
    datum = L.qp.datum
    src = L
    if not datum.compact:
        if Ltilde is None:
            raise DataError("non-compact data need the dual fundamental solution")
        src = Ltilde
    s = src.full() if with_logs else src.series
    return src.adjoint_series(s) * datum.unit()


def cy_j_shape_check(L: FundamentalSolution, Ltilde: FundamentalSolution | None = None, tol: float = DEFAULT_TOLERANCE) -> dict:
    """On the degree-2 locus of CY data: J = 1 - tau/z + sum_{k>=2} alpha_k / z^k, alpha_k in H^{2k}."""
    qp = L.qp
    datum = qp.datum
    if not datum.calabi_yau:
        raise LocusError("the shape check applies to Calabi-Yau data")
    degs = datum.cr_degrees()
    J = j_function(L, Ltilde)
    worst = mpmath.mpf(0)
    for (e, zp), v in J.terms.items():
        if zp == 0:
            expect = datum.unit() if not any(e) else zeros(datum.rank)
            worst = max(worst, max_abs(v - expect))
            continue
        if zp > 0:
            worst = max(worst, max_abs(v))
            continue
        for i, x in enumerate(v):
            if not is_zero(x, tol) and degs[i] != -2 * zp:
                worst = max(worst, abs(cnum(x)))
    # z^{-1} coefficient equals -tau
    tau = TruncatedSeries(J.space, {})
    for i in qp.directions:
        tau = tau + TruncatedSeries.monomial(J.space, {f"t{i}": 1}, -1, -datum.basis_vector(i))
    r1 = (J.map_terms(lambda e, z, c: c if z == -1 else c * 0) - tau).max_abs()
    worst = max(worst, r1)
    return {"residual": worst, "pass": worst <= tol}


def opposite_project(L: FundamentalSolution, Ltilde: FundamentalSolution | None = None,
                     with_logs: bool = False, tol: float = DEFAULT_TOLERANCE) -> TruncatedSeries:
    """Flat coordinates: the z^{-1} coefficient of J(tau,-z) read against 1 + H_-."""
    J = j_function(L, Ltilde, with_logs)
    datum = L.qp.datum
    lead = J.z_part(0)
    expect = TruncatedSeries.constant(J.space, datum.unit())
    if (lead - expect).max_abs() > tol or any(z > 0 for z in J.z_powers()):
        raise BigCellError("the J-function point leaves the big cell of the standard opposite subspace")
    return J.z_part(-1)


def residue_product(qp: QuantumProduct, tol: float = DEFAULT_TOLERANCE) -> dict:
    """F-manifold product from the residual part A_X(tau, 0) and U = A_E(tau, 0)."""
    N = qp.datum.rank
    u = qp.datum.unit()
    # miniversality: X -> A_X 1 must be invertible at tau
    M = zeros(N, N)
    for i in range(N):
        col = qp.A[i].coefficient(tuple([0] * len(qp.space.variables)), 0, zeros(N, N)) @ u
        M[:, i] = col
    if rank(M) < N:
        raise MiniversalityError("X -> A_X(tau,0) 1 is not an isomorphism at tau = 0")
    worst = mpmath.mpf(0)
    for i in range(N):
        for j in range(N):
            prod = qp.A[i].map(lambda m, j=j: m[:, j])
            via = qp.A[i] * (qp.A[j] * u)
            worst = max(worst, _residual(prod - via))
    ea = euler_axiom_check(qp, tol)
    worst = max(worst, ea["residual"])
    return {"product_residual": worst, "euler_axiom": ea["residual"], "pass": worst <= tol}


# --------------------------------------------------------------------------
# tables from potentials

def table_from_potential(datum: OrbifoldDatum, sector_index: int, coeffs: Mapping[int, Any],
                         complete_through: int | None = None) -> CorrelatorTable:
    """One-variable potential F_0(t) = sum a_m t^m along the class phi_s (non-compact data).

    <phi_s^{m-1}, c_s'>_0 = m! a_m where c_s' is the compactly supported class of
    the same (zero-dimensional) sector.
    """
    s = datum.basis[sector_index].sector
    dual = [k for k in datum.classes_in(s, dual=True)]
    if len(dual) != 1:
        raise DataError("potential sector must carry a single compact class")
    entries = {}
    for m, a in coeffs.items():
        if m < 3 or is_zero(a, 0):
            continue
        key = ((sector_index,) * (m - 1), dual[0], ())
        if not homogeneous(key, datum):
            raise HomogeneityError(f"t^{m} term violates the degree axiom")
        entries[key] = a * factorial(m)
    top = max(coeffs) if coeffs else 0
    return CorrelatorTable(entries, 0, complete_through if complete_through is not None else top - 2)
