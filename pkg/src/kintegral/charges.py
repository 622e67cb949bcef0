"""Central charges, integral periods and the closed-form charge formulas.

A charge is stored as a scalar :class:`TruncatedSeries` over the coordinate
space of a fundamental solution: the tau' and Novikov variables, weight-zero
log coordinates ``t<i>`` for the unit and divisor directions, and ``logz``
for z^rho.  The universal factor exp(-t^0/z) is kept symbolic (``t0_factor``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import mpmath
import numpy as np

from .algebra import (
    DEFAULT_TOLERANCE,
    SeriesSpace,
    TruncatedSeries,
    cnum,
    column_space_basis,
    exact_parse,
    identity,
    is_zero,
    max_abs,
    nilpotent_exp,
    numeric,
    rank,
    unipotent_log,
    zeros,
)
from .galois import action, galois_on_sol
from .gamma_frame import FramedSection, KClass, psi_map, root_of_unity, skyscraper
from .orbifold_data import DataError, OrbifoldDatum
from .qdm import FundamentalSolution, LocusError, QuantumProduct, j_function


class MissingPotentialError(KeyError):
    pass


class HypothesisError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class ChargeFunction:
    """Z = exp(-t^0/z)^{t0_factor} * series."""

    series: TruncatedSeries
    t0_factor: bool = True
    provenance: str = "pipeline"

    @property
    def space(self) -> SeriesSpace:
        return self.series.space

    def on_h2(self) -> TruncatedSeries:
        """Drop the z-dependence bookkeeping: restrict to t^0 = 0 (factor becomes 1)."""
        return self.series

    def constant(self):
        return self.series.coefficient(tuple([0] * len(self.space.variables)), 0)

    def __add__(self, other: "ChargeFunction") -> "ChargeFunction":
        return ChargeFunction(self.series + other.series, self.t0_factor or other.t0_factor, "sum")

    def __mul__(self, k) -> "ChargeFunction":
        return ChargeFunction(self.series * k, self.t0_factor, self.provenance)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"t0_factor": self.t0_factor, "provenance": self.provenance, "series": self.series.to_json()}


def by_names(s: TruncatedSeries, tol: float = 0) -> dict:
    """Terms keyed by variable names, so series over different spaces can be compared."""
    out = {}
    for (e, z), c in s.terms.items():
        if tol and is_zero(c, tol):
            continue
        key = (tuple((n, k) for n, k in zip(s.space.variables, e) if k), Fraction(z))
        out[key] = c
    return out


def charge_difference(a: ChargeFunction | TruncatedSeries, b: ChargeFunction | TruncatedSeries,
                      ignore: Sequence[str] = ()):
    """Max coefficient difference, matching monomials by variable name."""
    sa = a.series if isinstance(a, ChargeFunction) else a
    sb = b.series if isinstance(b, ChargeFunction) else b
    da, db = by_names(sa), by_names(sb)

    def keep(key):
        return not any(n in ignore for n, _ in key[0])

    worst = mpmath.mpf(0)
    for key in set(da) | set(db):
        if not keep(key):
            continue
        x = cnum(da.get(key, 0)) - cnum(db.get(key, 0))
        worst = max(worst, abs(x))
    return worst


# --------------------------------------------------------------------------
# the generic pipeline

def c_factor(n: int):
    """(2 pi)^{n/2} / (2 pi i)^n; the z^{n/2} part is applied as a z-shift."""
    return (2 * mpmath.pi) ** (mpmath.mpf(n) / 2) / (2j * mpmath.pi) ** n


def charge_space(L: FundamentalSolution) -> SeriesSpace:
    sp = L.full_space(("logz",))
    n = L.qp.datum.dimension
    return sp.with_window(L.z_lo + n, n)


def _relift(s: TruncatedSeries, space: SeriesSpace) -> TruncatedSeries:
    pad = len(space.variables) - len(s.space.variables)
    return TruncatedSeries(space, {(e + (0,) * pad, z): c for (e, z), c in s.terms.items()})


def central_charge(V: KClass | FramedSection, L: FundamentalSolution, Ltilde: FundamentalSolution | None = None,
                   ) -> ChargeFunction:
    """Z(V) = c(z) (1, L z^{-mu} z^rho Psi(V)); compactly supported classes use the dual solution."""
    datum = L.qp.datum
    psi = V if isinstance(V, FramedSection) else psi_map(V, datum)
    cs = psi.compact_support
    sol = L
    if cs:
        if Ltilde is None:
            raise DataError("compactly supported classes need the dual fundamental solution")
        sol = Ltilde
    n = datum.dimension
    sp = charge_space(L)
    Lfull = _relift(sol.full(include_unit=False, extra=("logz",)), sp)
    if cs:
        row = datum.pairing @ datum.unit()      # (1, c) = c . P 1
    else:
        row = datum.unit() @ datum.pairing      # (1, x) = 1^T P x
    # z^rho Psi, then z^{-mu} and the z^{n/2} of c(z)
    vec = TruncatedSeries.constant(sp, psi.vector.copy())
    if not cs and any(not is_zero(x, 0) for x in datum.c1):
        rho = TruncatedSeries.monomial(sp, {"logz": 1}, 0, datum.rho_operator)
        vec = rho.exp() * vec
    degs = datum.cr_degrees(cs)
    size = len(degs)
    total = TruncatedSeries(sp, {})
    for j in range(size):
        comp = vec.map(lambda v, j=j: v[j])
        if comp.is_zero():
            continue
        col = Lfull.map(lambda m, j=j: row @ m[:, j])
        total = total + (col * comp).z_shift(n - Fraction(degs[j]) / 2)
    return ChargeFunction(total * c_factor(n), True, "pipeline")


# --------------------------------------------------------------------------
# closed forms for quotients

def _group_data(datum: OrbifoldDatum):
    if datum.group is None:
        raise DataError("closed-form charges need a quotient datum")
    return datum.group


def _twisted_index(datum: OrbifoldDatum, label: str) -> int:
    return [i for i in datum.classes_in(label) if datum.basis[i].degree == 0][0]


def charge_c2(datum: OrbifoldDatum, rho, space: SeriesSpace | None = None) -> ChargeFunction:
    """exp(-t^0/z) (dim rho/|G| + sum Tr(g|rho) sin(pi f_g) t^(g) / (|C(g)| pi))."""
    G = _group_data(datum)
    if datum.dimension != 2 or not G.special:
        raise DataError("charge_c2 needs a finite subgroup of SL(2, C)")
    chi = G.virtual_character(rho)
    names = tuple(f"t{_twisted_index(datum, s.label)}" for s in datum.sectors[1:])
    sp = space or SeriesSpace(names, 1, 0, 0)
    out = TruncatedSeries.constant(sp, Fraction(G.dim(chi), G.order))
    for k, s in enumerate(datum.sectors[1:], start=1):
        f = min(x for x in s.eigenphases if x)
        f = min(f, 1 - f)
        coeff = cnum(chi[k]) * mpmath.sin(mpmath.pi * numeric(f)) / (s.centralizer * mpmath.pi)
        out = out + TruncatedSeries.monomial(sp, {names[k - 1]: 1}, 0, coeff)
    return ChargeFunction(out, True, "closed form (C^2/G)")


@dataclass(frozen=True, eq=False)
class PotentialInput:
    """F_{0,(g)} per sector as one-variable series, plus an optional full F_0 and instanton data."""

    sectors: Mapping[str, Mapping[int, Any]] = field(default_factory=dict)
    F0: Mapping[int, Any] = field(default_factory=dict)
    instantons: Mapping[tuple, Any] = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "PotentialInput":
        sectors = {}
        for label, body in obj.get("sectors", {}).items():
            sectors[label] = {int(e): exact_parse(c) for c, e in body["coeffs"]}
        F0 = {int(e): exact_parse(c) for c, e in obj.get("F0", [])}
        inst = {tuple(int(x) for x in e["d"]): exact_parse(e["value"]) for e in obj.get("instantons", [])}
        for label, co in sectors.items():
            if any(e < 2 for e in co if not is_zero(co[e], 0)):
                raise DataError(f"/sectors/{label}: F_0,(g) must start at degree 2")
        return cls(sectors, F0, inst)

    def sector(self, label: str) -> Mapping[int, Any]:
        key = label if label in self.sectors else f"({label})"
        if key not in self.sectors:
            if self.F0 and len(self.sectors) == 0:
                # one-variable case: F_{0,(g)} = dF_0/dt
                return {e - 1: c * e for e, c in self.F0.items() if e >= 1}
            raise MissingPotentialError(f"no potential supplied for sector {label}")
        return self.sectors[key]


def load_potentials(path) -> PotentialInput:
    with open(path) as fh:
        return PotentialInput.from_json(json.load(fh))


def _one_var(space: SeriesSpace, name: str, coeffs: Mapping[int, Any]) -> TruncatedSeries:
    out = TruncatedSeries(space, {})
    for e, c in coeffs.items():
        out = out + TruncatedSeries.monomial(space, {name: e}, 0, c)
    return out


def charge_c3(datum: OrbifoldDatum, rho, pots: PotentialInput | None = None,
              space: SeriesSpace | None = None) -> ChargeFunction:
    """dim rho/|G| + sum_{n_g=1} A_g t^(g)/|C(g)| + sum_{n_g=0} B_g F_{0,(g^-1)}(tau), on H^2_CR."""
    G = _group_data(datum)
    if datum.dimension != 3 or not G.special:
        raise DataError("charge_c3 needs a finite subgroup of SL(3, C)")
    chi = G.virtual_character(rho)
    deg2 = [s for s in datum.sectors[1:] if s.age == 1]
    names = tuple(f"t{_twisted_index(datum, s.label)}" for s in deg2)
    sp = space or SeriesSpace(names, 12, 0, 0)
    out = TruncatedSeries.constant(sp, Fraction(G.dim(chi), G.order))
    for k, s in enumerate(datum.sectors[1:], start=1):
        tr = cnum(chi[k])
        if s.dim == 1:
            f = min(x for x in s.eigenphases if x)
            f = min(f, 1 - f)
            A = tr * mpmath.sin(mpmath.pi * numeric(f)) / mpmath.pi
            name = f"t{_twisted_index(datum, s.label)}"
            out = out + TruncatedSeries.monomial(sp, {name: 1}, 0, A / s.centralizer)
        elif s.dim == 0:
            B = tr
            for f in s.eigenphases:
                B = B / mpmath.gamma(1 - numeric(f))
            if s.age == 1:
                name = f"t{_twisted_index(datum, s.label)}"
                F = TruncatedSeries.monomial(sp, {name: 1}, 0, Fraction(1, s.centralizer))
            else:
                if pots is None:
                    raise MissingPotentialError(f"sector {s.label} has age 2 and needs F_0,({s.inv})")
                inv = datum.sector(s.inv)
                name = f"t{_twisted_index(datum, inv.label)}"
                if name not in sp.variables:
                    raise MissingPotentialError(f"no coordinate for sector {inv.label}")
                F = _one_var(sp, name, pots.sector(inv.label))
            out = out + F * B
    return ChargeFunction(out, False, "closed form (C^3/G)")


# --------------------------------------------------------------------------
# compact Calabi-Yau threefolds

@dataclass(frozen=True)
class SheafKind:
    kind: str                       # "pt", "curve", "surface", "structure"
    cls: tuple = ()                 # [C] or [S] as basis coefficients
    genus: int = 0
    chi_S: Any = 0                  # topological Euler number of S
    chi_X: Any = 0                  # topological Euler number of X
    c2: tuple = ()


def cy3_potential(datum: OrbifoldDatum, L: FundamentalSolution, pots: PotentialInput | None = None,
                  qp: QuantumProduct | None = None) -> TruncatedSeries:
    """F_0 on H^2 in the charge space: (1/6) int tau^3 + sum_d N_d q^d.

    N_d comes from ``pots.instantons`` or, failing that, from the correlator
    table through the divisor equation.
    """
    qp = qp or L.qp
    sp = charge_space(L)
    div = qp.divisors
    logs = [f"t{i}" for i in div]
    tau = sum((TruncatedSeries.variable(sp, n) * datum.basis_vector(i) for n, i in zip(logs, div)),
              TruncatedSeries(sp, {}))
    # int tau^3 as a series: expand by monomials
    terms = {}
    for (e1, z1), v1 in tau.terms.items():
        for (e2, z2), v2 in tau.terms.items():
            for (e3, z3), v3 in tau.terms.items():
                x = datum.integrate(datum.mul(datum.mul(v1, v2), v3))
                key = (tuple(a + b + c for a, b, c in zip(e1, e2, e3)), 0)
                terms[key] = terms.get(key, 0) + x
    F = TruncatedSeries(sp, terms) * Fraction(1, 6)
    inst = dict(pots.instantons) if pots and pots.instantons else {}
    if not inst:
        for (ins, dual, d), v in qp.table.entries.items():
            if any(d) and len(ins) == 3 and all(i in div for i in ins):
                w = 1
                for i in ins:
                    w *= d[div.index(i)]
                if w:
                    inst.setdefault(d, Fraction(v) / w if not isinstance(v, mpmath.mpc) else v / w)
    for d, N in inst.items():
        F = F + TruncatedSeries.monomial(sp, dict(zip(qp.qnames, d)), 0, N)
    return F


def _tau_pair(datum, L, sp, x) -> TruncatedSeries:
    """int tau . x for tau = sum t^a p_a."""
    out = TruncatedSeries(sp, {})
    for i in L.qp.divisors:
        val = datum.integrate(datum.mul(datum.basis_vector(i), x))
        if not is_zero(val, 0):
            out = out + TruncatedSeries.variable(sp, f"t{i}") * val
    return out


def _directional(F: TruncatedSeries, L: FundamentalSolution, datum, x) -> TruncatedSeries:
    """Derivative of F along the degree-2 class x = sum x_a p_a (q d/dq plus d/dt^a)."""
    out = TruncatedSeries(F.space, {})
    for a, i in enumerate(L.qp.divisors):
        c = x[i]
        if is_zero(c, 0):
            continue
        out = out + (F.derivative(f"t{i}") + F.euler(L.qp.qnames[a])) * c
    return out


def cy3_sheaf_charges(kind: SheafKind, datum: OrbifoldDatum, L: FundamentalSolution,
                      pots: PotentialInput | None = None) -> ChargeFunction:
    """Closed forms on H^2 of a compact CY3 for O_pt, O_C, O_S and O."""
    if datum.dimension != 3 or not datum.calabi_yau or not datum.compact:
        raise DataError("closed-form sheaf charges need a compact Calabi-Yau threefold")
    sp = charge_space(L)
    tpi = 2j * mpmath.pi
    one = TruncatedSeries.constant(sp, Fraction(1))
    if kind.kind == "pt":
        return ChargeFunction(one, True, "closed form (CY3)")
    if kind.kind == "curve":
        C = np.array(kind.cls, dtype=object)
        # deg-4 class [C]: int tau . [C]
        s = one * (1 - kind.genus) - _tau_pair(datum, L, sp, C) / tpi
        return ChargeFunction(s, True, "closed form (CY3)")
    F = cy3_potential(datum, L, pots)
    if kind.kind == "surface":
        S = np.array(kind.cls, dtype=object)
        S3 = datum.integrate(datum.mul(datum.mul(S, S), S))
        S2 = datum.mul(S, S)
        s = one * (Fraction(S3) / 8 + Fraction(kind.chi_S) / 24) + _tau_pair(datum, L, sp, S2) / (2 * tpi) \
            + _directional(F, L, datum, S) / tpi ** 2
        return ChargeFunction(s, True, "closed form (CY3)")
    if kind.kind == "structure":
        c2 = np.array(kind.c2, dtype=object)
        H = F * 2
        for a, i in enumerate(L.qp.divisors):
            H = H - TruncatedSeries.variable(sp, f"t{i}") * (F.derivative(f"t{i}") + F.euler(L.qp.qnames[a]))
        s = one * (-mpmath.zeta(3) * numeric(kind.chi_X) / tpi ** 3) - _tau_pair(datum, L, sp, c2) / (24 * tpi) \
            + H / tpi ** 3
        return ChargeFunction(s, True, "closed form (CY3)")
    raise ValueError(f"unknown sheaf kind {kind.kind!r}")


def sheaf_class(kind: SheafKind, datum: OrbifoldDatum) -> KClass:
    """The K-class whose charge the closed form describes (for the pipeline cross-check)."""
    from .gamma_frame import EigenPiece, point_sheaf, structure_sheaf
    u = datum.untwisted.label
    if kind.kind == "pt":
        return point_sheaf(datum)
    if kind.kind == "structure":
        return structure_sheaf(datum)
    pt = datum.pt_class()
    if kind.kind == "curve":
        ch = np.array(kind.cls, dtype=object) + pt * (1 - kind.genus)
        return KClass((EigenPiece(u, Fraction(0), 0, ch),), None, "O_C")
    if kind.kind == "surface":
        S = np.array(kind.cls, dtype=object)
        S2 = datum.mul(S, S)
        ch = S - S2 / 2 + datum.mul(S2, S) / 6
        return KClass((EigenPiece(u, Fraction(0), 0, ch),), None, "O_S")
    raise ValueError(kind.kind)


# --------------------------------------------------------------------------
# integral periods

def _check_euler_vanishes(L: FundamentalSolution) -> None:
    qp = L.qp
    datum = qp.datum
    if not datum.calabi_yau:
        raise LocusError("integral periods are defined here for Calabi-Yau data")
    degs = datum.cr_degrees()
    bad = [i for i in qp.directions if degs[i] != 2]
    if bad:
        raise LocusError(f"E does not vanish along t{bad[0]} (degree {degs[bad[0]]}); restrict to H^2")


def integral_period(V: KClass | FramedSection, L: FundamentalSolution,
                    Ltilde: FundamentalSolution | None = None) -> ChargeFunction:
    """Pi_A(tau) = (s0(tau, e^{pi i} z), A(tau, z))_F for A = Z_K(V).

    On the Calabi-Yau locus s0(tau, e^{pi i} z) = (2 pi e^{pi i} z)^{n/2}/(-2 pi)^n 1, i.e.
    c(z) 1, so the period is built here from the flat section itself:
    (1, A) with A = L z^{-mu} Psi(V) and the prefactor written via the rotated z.
    """
    _check_euler_vanishes(L)
    datum = L.qp.datum
    n = datum.dimension
    # prefactor (2 pi e^{pi i} z)^{n/2} / (-2 pi)^n, with z^{n/2} applied as a shift
    pref = (2 * mpmath.pi) ** (mpmath.mpf(n) / 2) * mpmath.expjpi(mpmath.mpf(n) / 2) / (-2 * mpmath.pi) ** n
    Z = central_charge(V, L, Ltilde)
    return ChargeFunction(Z.series * (pref / c_factor(n)), Z.t0_factor, "integral period")


def a0_vector(datum: OrbifoldDatum, xi=None, tol: float = DEFAULT_TOLERANCE) -> dict:
    """+-Psi(O_pt) and the check that it spans Im (Log M)^n for M = G^Sol(xi)."""
    from .gamma_frame import point_sheaf
    n = datum.dimension
    xi = xi if xi is not None else (datum.line_bundles[0] if datum.line_bundles else None)
    g = action(datum, xi)
    if all(is_zero(x, 0) for x in g.xi0):
        raise HypothesisError("xi_0 = 0: the Galois action has no nilpotent part")
    M = galois_on_sol(g, datum)
    N = unipotent_log(M)
    Nn = identity(datum.rank)
    for _ in range(n):
        Nn = Nn @ N
    img = column_space_basis(Nn)
    if img.shape[1] != 1:
        raise HypothesisError(f"Im (Log M)^n has dimension {img.shape[1]}, expected 1")
    psi = psi_map(point_sheaf(datum), datum).vector
    stacked = np.concatenate([img, psi.reshape(-1, 1)], axis=1)
    spans = rank(stacked) == 1
    return {"vector": psi, "image": img[:, 0], "spans": spans, "sign": "+-", "pass": spans}


# --------------------------------------------------------------------------
# invariance checks

def galois_charge_check(datum: OrbifoldDatum, rho, chi_name: str, tol: float = DEFAULT_TOLERANCE,
                        pots: PotentialInput | None = None) -> dict:
    """Z(O_0 (x) rho (x) chi)(tau) = Z(O_0 (x) rho)(t^(g) -> chi(g) t^(g)) for a linear character chi."""
    G = _group_data(datum)
    base = charge_c2(datum, rho) if datum.dimension == 2 else charge_c3(datum, rho, pots)
    chi = G.character(chi_name)
    rho_chi = G.virtual_character(rho)
    twisted = tuple(a * b for a, b in zip(rho_chi, chi))
    combo = G.decompose(twisted)
    sp = base.space
    lhs = charge_c2(datum, combo, sp) if datum.dimension == 2 else charge_c3(datum, combo, pots, sp)
    moved = {}
    for (e, z), c in base.series.terms.items():
        w = c
        for k, x in enumerate(e):
            if x:
                label = [s.label for s in datum.sectors[1:]
                         if f"t{_twisted_index(datum, s.label)}" == sp.variables[k]][0]
                w = cnum(w) * cnum(chi[datum.sector_index(label)]) ** x
        moved[(e, z)] = w
    rhs = TruncatedSeries(sp, moved)
    r = (lhs.series - rhs).max_abs()
    return {"residual": r, "pass": r <= tol}


def degree_zero_check(Z: ChargeFunction, L: FundamentalSolution, tol: float = DEFAULT_TOLERANCE) -> dict:
    """For CY data every surviving term is z^0 and of total Euler weight 0."""
    qp = L.qp
    degs = qp.datum.cr_degrees()
    weight = {}
    for i in qp.directions:
        weight[f"t{i}"] = 1 - Fraction(degs[i]) / 2
    worst = mpmath.mpf(0)
    for (e, z), c in Z.series.terms.items():
        w = sum(weight.get(n, 0) * k for n, k in zip(Z.space.variables, e))
        if z != 0 or w != 0:
            worst = max(worst, abs(cnum(c)))
    return {"residual": worst, "pass": worst <= tol}
