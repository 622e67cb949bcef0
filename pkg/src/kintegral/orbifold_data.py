"""Inertia stacks, ages and Chen-Ruan cohomology as finite linear data.

Two sources of data are supported.  Global quotients [C^n/G] are built from a
:class:`GroupActionSpec` (conjugacy classes, eigenphases, character table);
compact orbifolds are read from an explicit JSON description of their sector
cohomology rings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Mapping, Sequence

import mpmath
import numpy as np

from .algebra import (
    Cyclotomic,
    as_matrix,
    as_vector,
    cnum,
    exact_parse,
    identity,
    inverse,
    is_zero,
    nilpotent_exp,
    numeric,
    rationalize,
    zeros,
)


class DataError(ValueError):
    """Input data violating a structural invariant."""


class UnsupportedPairingError(ValueError):
    """Pairing requested between two classes without a proper integral."""


def frac_mod1(x) -> Fraction:
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


# --------------------------------------------------------------------------
# group actions

@dataclass(frozen=True)
class ConjugacyClass:
    label: str
    size: int
    centralizer: int
    eigenphases: tuple[Fraction, ...]

    @property
    def age(self) -> Fraction:
        return sum(self.eigenphases, Fraction(0))

    @property
    def fixed_dim(self) -> int:
        return sum(1 for f in self.eigenphases if f == 0)


@dataclass(frozen=True)
class GroupActionSpec:
    """A finite group acting linearly on C^n, given by class data only."""

    order: int
    dimension: int
    classes: tuple[ConjugacyClass, ...]
    characters: tuple[tuple[str, tuple[Cyclotomic, ...]], ...]
    special: bool = True

    def __post_init__(self):
        self.validate()

    # construction ------------------------------------------------------------
    @classmethod
    def cyclic(cls, m: int, weights: Sequence[int]) -> "GroupActionSpec":
        """Z_m acting on C^n by zeta^{w_j}; class k is the generator's k-th power."""
        if m < 1:
            raise DataError("/group/cyclic: the group order must be positive")
        if not weights:
            raise DataError("/weights: at least one weight is required")
        classes = []
        for k in range(m):
            phases = tuple(frac_mod1(Fraction(k * w, m)) for w in weights)
            classes.append(ConjugacyClass(_cyclic_label(k, m), 1, m, phases))
        chars = tuple((f"rho_{l}", tuple(Cyclotomic.zeta(m, l * k) for k in range(m))) for l in range(m))
        special = sum(weights) % m == 0
        return cls(m, len(weights), tuple(classes), chars, special)

    def validate(self) -> None:
        if sum(c.size for c in self.classes) != self.order:
            raise DataError("class sizes do not add up to |G|")
        for c in self.classes:
            if c.size * c.centralizer != self.order:
                raise DataError(f"class {c.label}: size * centralizer != |G|")
            if len(c.eigenphases) != self.dimension:
                raise DataError(f"class {c.label}: expected {self.dimension} eigenphases")
            if any(not (0 <= f < 1) for f in c.eigenphases):
                raise DataError(f"class {c.label}: eigenphases must lie in [0,1)")
            if self.special and c.age.denominator != 1:
                raise DataError(f"class {c.label}: determinant is not 1")
        if self.classes[0].eigenphases != (Fraction(0),) * self.dimension:
            raise DataError("the first class must be the identity")
        names = [n for n, _ in self.characters]
        for a, ra in self.characters:
            if len(ra) != len(self.classes):
                raise DataError(f"character {a}: wrong length")
            for b, rb in self.characters:
                ip = self.inner(ra, rb)
                want = 1 if a == b else 0
                if ip != want:
                    raise DataError(f"characters {a}, {b} are not orthonormal")
        if len(names) != len(set(names)):
            raise DataError("duplicate character names")
        self.inverse_map()

    # helpers -----------------------------------------------------------------
    def inner(self, a: Sequence, b: Sequence):
        tot = Cyclotomic()
        for c, x, y in zip(self.classes, a, b):
            tot = tot + Cyclotomic.rational(Fraction(c.size, self.order)) * x * _conj(y)
        return tot.as_rational() if isinstance(tot, Cyclotomic) and tot.is_rational() else tot

    def index(self, label: str) -> int:
        for i, c in enumerate(self.classes):
            if c.label == label:
                return i
        raise KeyError(label)

    def character(self, name: str) -> tuple[Cyclotomic, ...]:
        for n, row in self.characters:
            if n == name:
                return row
        raise KeyError(f"unknown irreducible {name!r}")

    @property
    def irreducibles(self) -> list[str]:
        return [n for n, _ in self.characters]

    def dim(self, chi: Sequence) -> int:
        d = chi[0]
        d = d.as_rational() if isinstance(d, Cyclotomic) else d
        return int(d)

    def regular_character(self) -> tuple[Cyclotomic, ...]:
        return tuple(Cyclotomic.rational(self.order if i == 0 else 0) for i in range(len(self.classes)))

    def virtual_character(self, combo: Mapping[str, int] | str) -> tuple[Cyclotomic, ...]:
        if isinstance(combo, str):
            if combo in ("reg", "regular"):
                return self.regular_character()
            combo = {combo: 1}
        out = [Cyclotomic() for _ in self.classes]
        for name, k in combo.items():
            if name in ("reg", "regular"):
                row = self.regular_character()
            else:
                row = self.character(name)
            out = [o + Cyclotomic.rational(k) * r for o, r in zip(out, row)]
        return tuple(out)

    def decompose(self, chi: Sequence) -> dict[str, int]:
        out = {}
        for n, row in self.characters:
            m = self.inner(chi, row)
            if m:
                out[n] = int(m)
        return out

    @cached_property
    def _inverse(self) -> tuple[int, ...]:
        res = []
        for i, c in enumerate(self.classes):
            target = tuple(sorted(frac_mod1(-f) for f in c.eigenphases))
            conj = tuple(_conj(row[i]) for _, row in self.characters)
            cands = [j for j, d in enumerate(self.classes)
                     if tuple(sorted(d.eigenphases)) == target
                     and tuple(row[j] for _, row in self.characters) == conj]
            if len(cands) != 1:
                raise DataError(f"class {c.label}: inverse class not determined by eigenphases and characters")
            res.append(cands[0])
        return tuple(res)

    def inverse_map(self) -> tuple[int, ...]:
        return self._inverse

    def linear_characters(self) -> list[str]:
        return [n for n, row in self.characters if row[0] == 1]

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "GroupActionSpec":
        g = obj["group"]
        if "cyclic" in g:
            return cls.cyclic(int(g["cyclic"]), [int(w) for w in obj["weights"]])
        classes = tuple(ConjugacyClass(c["label"], int(c["size"]), int(c["centralizer"]),
                                       tuple(Fraction(str(f)) for f in c["eigenphases"]))
                        for c in g["classes"])
        chars = tuple((name, tuple(_as_cyclotomic(exact_parse(v)) for v in row))
                      for name, row in g["characters"].items())
        return cls(int(g["order"]), len(classes[0].eigenphases), classes, chars, bool(g.get("special", True)))


def _cyclic_label(k: int, m: int) -> str:
    return "1" if k == 0 else (f"g" if k == 1 else f"g^{k}")


def _conj(x):
    if isinstance(x, Cyclotomic):
        return x.conjugate()
    if isinstance(x, (int, Fraction)):
        return x
    return mpmath.conj(x)


def _as_cyclotomic(x) -> Cyclotomic:
    if isinstance(x, Cyclotomic):
        return x
    if isinstance(x, (int, Fraction)):
        return Cyclotomic.rational(x)
    raise DataError("character values must be exact (rational or cyclotomic)")


# --------------------------------------------------------------------------
# orbifold data

@dataclass(frozen=True)
class Sector:
    """One connected component X_v of the inertia stack."""

    label: str
    age: Fraction
    dim: int
    inv: str
    centralizer: int | None = None
    eigenphases: tuple[Fraction, ...] = ()


@dataclass(frozen=True)
class BasisClass:
    name: str
    sector: str
    degree: int  # degree inside H*(X_v)

    def cr_degree(self, age: Fraction) -> Fraction:
        return Fraction(self.degree) + 2 * age


@dataclass(frozen=True)
class EigenPiece:
    """(pr*V)_{v,f}: eigenvalue exp(2 pi i f), rank and Chern character on X_v."""

    sector: str
    f: Fraction
    rank: int
    ch: np.ndarray = field(compare=False)


@dataclass(frozen=True)
class LineBundle:
    name: str
    xi0: np.ndarray = field(compare=False)
    f: tuple[tuple[str, Fraction], ...] = ()
    character: str | None = None

    def fv(self, sector: str) -> Fraction:
        return dict(self.f).get(sector, Fraction(0))


@dataclass(frozen=True, eq=False)
class OrbifoldDatum:
    """Finite description of an orbifold's inertia stack and its cohomology.

    ``pairing[k, l]`` is the orbifold pairing (c_k, phi_l) between the
    *dual* basis ``c`` and the ordinary basis ``phi``.  For compact data the
    dual basis is the ordinary basis itself; for non-compact data it is the
    compactly supported basis.
    """

    name: str
    kind: str
    dimension: int
    sectors: tuple[Sector, ...]
    basis: tuple[BasisClass, ...]
    pairing: np.ndarray
    mult: np.ndarray            # sector-internal cup products: mult[i, j] = phi_i * phi_j
    restriction: Mapping[str, np.ndarray]   # untwisted class -> sector class
    c1: np.ndarray
    tangent: tuple[EigenPiece, ...]
    line_bundles: tuple[LineBundle, ...] = ()
    compact_basis: tuple[BasisClass, ...] | None = None
    cmult: np.ndarray | None = None         # cmult[i, j] = phi_i * c_j  (compact support module)
    group: GroupActionSpec | None = None
    nef_basis: tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        self._validate()

    # indexing -------------------------------------------------------------
    @property
    def compact(self) -> bool:
        return self.compact_basis is None

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def dual_basis(self) -> tuple[BasisClass, ...]:
        return self.basis if self.compact else self.compact_basis

    def sector(self, label: str) -> Sector:
        for s in self.sectors:
            if s.label == label:
                return s
        raise KeyError(f"unknown sector {label!r}")

    def sector_index(self, label: str) -> int:
        return [s.label for s in self.sectors].index(label)

    @property
    def untwisted(self) -> Sector:
        return self.sectors[0]

    def classes_in(self, label: str, dual: bool = False) -> list[int]:
        b = self.dual_basis if dual else self.basis
        return [i for i, c in enumerate(b) if c.sector == label]

    def cr_degrees(self, dual: bool = False) -> list[Fraction]:
        b = self.dual_basis if dual else self.basis
        return [c.cr_degree(self.sector(c.sector).age) for c in b]

    def sector_degrees(self, dual: bool = False) -> list[int]:
        b = self.dual_basis if dual else self.basis
        return [c.degree for c in b]

    def class_index(self, name: str, dual: bool = False) -> int:
        b = self.dual_basis if dual else self.basis
        for i, c in enumerate(b):
            if c.name == name:
                return i
        raise KeyError(f"unknown class {name!r}")

    def unit(self, label: str | None = None) -> np.ndarray:
        """Unit class of a sector (the untwisted one by default)."""
        label = label or self.untwisted.label
        v = zeros(self.rank)
        for i in self.classes_in(label):
            if self.basis[i].degree == 0:
                v[i] = Fraction(1)
                return v
        raise DataError(f"sector {label} has no degree-0 class")

    def unit_all(self) -> np.ndarray:
        return sum((self.unit(s.label) for s in self.sectors), zeros(self.rank))

    def basis_vector(self, i: int, dual: bool = False) -> np.ndarray:
        v = zeros(len(self.dual_basis if dual else self.basis))
        v[i] = Fraction(1)
        return v

    # ring structure -----------------------------------------------------------
    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Sector-wise cup product on H*(IX) (ordinary classes)."""
        return np.einsum("i,j,ijk->k", a, b, self.mult)

    def mul_c(self, a: np.ndarray, c: np.ndarray) -> np.ndarray:
        """Ordinary class times compactly supported class (sector-wise)."""
        if self.compact:
            return self.mul(a, c)
        return np.einsum("i,j,ijk->k", a, c, self.cmult)

    def sector_exp(self, a: np.ndarray, label: str) -> np.ndarray:
        """exp of a class supported on the sector X_v (nilpotent above degree 0)."""
        u = self.unit(label)
        iu = int(np.flatnonzero([x != 0 for x in u])[0])
        const = a[iu]
        nil = a - const * u
        out = u
        term = u
        for k in range(1, self.dimension + 1):
            term = self.mul(term, nil) / k
            out = out + term
        if not is_zero(const, 0):
            out = out * mpmath.exp(numeric(const))
        return out

    def restrict(self, x: np.ndarray, label: str) -> np.ndarray:
        """Restriction of an untwisted class to the sector X_v."""
        if label == self.untwisted.label:
            return x
        return self.restriction[label] @ x

    def cup_operator(self, x: np.ndarray, dual: bool = False) -> np.ndarray:
        """Matrix of pr*(x) cup on H_CR (or on the compactly supported space)."""
        b = self.dual_basis if dual else self.basis
        m = zeros(len(b), len(b))
        for j, c in enumerate(b):
            xv = self.restrict(x, c.sector)
            e = zeros(len(b))
            e[j] = Fraction(1)
            m[:, j] = self.mul_c(xv, e) if dual else self.mul(xv, e)
        return m

    def inv_pullback(self, x: np.ndarray, dual: bool = False) -> np.ndarray:
        """(inv* x)_v = x_{inv(v)}, classes matched by position within sectors."""
        out = zeros(len(x))
        for s in self.sectors:
            dst = self.classes_in(s.label, dual)
            src = self.classes_in(s.inv, dual)
            for i, j in zip(dst, src):
                out[i] = x[j]
        return out

    def degree_part(self, x: np.ndarray, degree: int, dual: bool = False) -> np.ndarray:
        out = zeros(len(x))
        for i, d in enumerate(self.sector_degrees(dual)):
            if d == degree:
                out[i] = x[i]
        return out

    def sector_part(self, x: np.ndarray, label: str, dual: bool = False) -> np.ndarray:
        out = zeros(len(x))
        for i in self.classes_in(label, dual):
            out[i] = x[i]
        return out

    # pairing ------------------------------------------------------------------
    @cached_property
    def pairing_inverse(self) -> np.ndarray:
        return inverse(self.pairing)

    def integrate(self, x: np.ndarray, dual: bool | None = None):
        """Orbifold integral over IX of a class (compactly supported if non-compact)."""
        if dual is None:
            dual = not self.compact
        if not self.compact and not dual:
            raise UnsupportedPairingError("ordinary classes have no integral on a non-compact orbifold")
        return x @ self.pairing @ self.unit_all()

    @cached_property
    def mu(self) -> np.ndarray:
        return self.mu_matrix(False)

    def mu_matrix(self, dual: bool = False) -> np.ndarray:
        degs = self.cr_degrees(dual)
        m = zeros(len(degs), len(degs))
        for i, d in enumerate(degs):
            m[i, i] = d / 2 - Fraction(self.dimension, 2)
        return m

    @cached_property
    def rho_operator(self) -> np.ndarray:
        return self.cup_operator(self.c1)

    def line_bundle(self, name: str) -> LineBundle:
        for lb in self.line_bundles:
            if lb.name == name:
                return lb
        raise KeyError(f"unknown line bundle {name!r}")

    def pt_class(self) -> np.ndarray:
        """Poincare dual of a non-stacky point (untwisted top degree, integral 1)."""
        top = [i for i in self.classes_in(self.untwisted.label) if self.basis[i].degree == 2 * self.dimension]
        if len(top) != 1:
            raise DataError("untwisted top cohomology is not one-dimensional")
        v = self.basis_vector(top[0])
        return v / self.integrate(v)

    @property
    def calabi_yau(self) -> bool:
        return all(is_zero(x, 0) for x in self.c1)

    # validation -------------------------------------------------------------------
    def _validate(self) -> None:
        labels = [s.label for s in self.sectors]
        if self.sectors[0].age != 0:
            raise DataError("the untwisted sector must come first with age 0")
        for s in self.sectors:
            if s.age < 0:
                raise DataError(f"sector {s.label}: negative age")
            if s.inv not in labels:
                raise DataError(f"sector {s.label}: unknown inv partner {s.inv}")
            partner = self.sector(s.inv)
            if partner.inv != s.label:
                raise DataError(f"inv is not an involution at {s.label}")
            if s.age + partner.age != self.dimension - s.dim:
                raise DataError(f"sector {s.label}: ages violate the codimension identity")
            if len(self.classes_in(s.label)) != len(self.classes_in(s.inv)):
                raise DataError(f"sectors {s.label}, {s.inv} have different Betti data")
        for c in list(self.basis) + list(self.compact_basis or ()):
            if c.sector not in labels:
                raise DataError(f"class {c.name}: unknown sector")
            if c.degree % 2:
                raise DataError(f"class {c.name}: odd degree classes are not supported")
        n_dual = len(self.dual_basis)
        if self.pairing.shape != (n_dual, self.rank):
            raise DataError("pairing matrix has the wrong shape")
        try:
            self.pairing_inverse
        except ZeroDivisionError:
            raise DataError("pairing is degenerate") from None
        dual_deg = self.cr_degrees(True)
        ord_deg = self.cr_degrees(False)
        for k in range(n_dual):
            for l in range(self.rank):
                if is_zero(self.pairing[k, l], 0):
                    continue
                a, b = self.dual_basis[k], self.basis[l]
                if self.sector(a.sector).inv != b.sector:
                    raise DataError(f"pairing couples {a.name} and {b.name} outside inv-partner sectors")
                if self.compact and dual_deg[k] + ord_deg[l] != 2 * self.dimension:
                    raise DataError(f"pairing couples {a.name}, {b.name} of degrees not adding to 2n")
        if self.compact:
            p = self.pairing
            if any(not is_zero(p[i, j] - p[j, i]) for i in range(self.rank) for j in range(self.rank)):
                raise DataError("pairing is not symmetric")
        for s in self.sectors:
            total = sum(p.rank for p in self.tangent if p.sector == s.label)
            if total != self.dimension:
                raise DataError(f"sector {s.label}: tangent ranks add to {total}, expected {self.dimension}")


# --------------------------------------------------------------------------
# builders

def inertia_of_quotient(spec: GroupActionSpec, name: str | None = None) -> OrbifoldDatum:
    """Inertia data and Chen-Ruan spaces of [C^n/G]."""
    n = spec.dimension
    inv = spec.inverse_map()
    sectors = []
    basis = []
    cbasis = []
    for i, c in enumerate(spec.classes):
        partner = spec.classes[inv[i]]
        if tuple(sorted(frac_mod1(-f) for f in c.eigenphases)) != tuple(sorted(partner.eigenphases)):
            raise DataError(f"class {c.label}: inconsistent with its inverse")
        label = "0" if i == 0 else c.label
        sectors.append(Sector(label, c.age, c.fixed_dim, "0" if inv[i] == 0 else partner.label,
                              c.centralizer, c.eigenphases))
        unit = "1" if i == 0 else f"1_({c.label})"
        basis.append(BasisClass(unit, label, 0))
        if i == 0:
            top = {3: "alpha", 2: "beta"}.get(n, "top")
        elif c.fixed_dim == 0:
            top = f"1c_({c.label})"
        else:
            top = f"beta_({c.label})" if c.fixed_dim == 1 else f"top_({c.label})"
        cbasis.append(BasisClass(top, label, 2 * c.fixed_dim))
    r = len(sectors)
    pairing = zeros(r, r)
    for i, c in enumerate(spec.classes):
        pairing[i, inv[i]] = Fraction(1, c.centralizer)
    mult = zeros(r, r, r)
    cmult = zeros(r, r, r)
    for i in range(r):
        mult[i, i, i] = Fraction(1)
        cmult[i, i, i] = Fraction(1)
    tangent = []
    for i, c in enumerate(spec.classes):
        label = sectors[i].label
        counts: dict[Fraction, int] = {}
        for f in c.eigenphases:
            counts[f] = counts.get(f, 0) + 1
        for f, k in sorted(counts.items()):
            ch = zeros(r)
            ch[i] = Fraction(k)
            tangent.append(EigenPiece(label, f, k, ch))
    lbs = []
    for chi_name in spec.linear_characters():
        row = spec.character(chi_name)
        fv = []
        for i, s in enumerate(sectors):
            val = cnum(row[i])
            f = frac_mod1(rationalize(mpmath.arg(val) / (2 * mpmath.pi), spec.order))
            fv.append((s.label, f))
        lbs.append(LineBundle(f"L_{chi_name}", zeros(r), tuple(fv), chi_name))
    restriction = {s.label: zeros(r, r) for s in sectors[1:]}
    for i, s in enumerate(sectors[1:], start=1):
        restriction[s.label][i, 0] = Fraction(1)
    return OrbifoldDatum(
        name=name or f"[C^{n}/G_{spec.order}]",
        kind="quotient",
        dimension=n,
        sectors=tuple(sectors),
        basis=tuple(basis),
        pairing=pairing,
        mult=mult,
        restriction=restriction,
        c1=zeros(r),
        tangent=tuple(tangent),
        line_bundles=tuple(lbs),
        compact_basis=tuple(cbasis),
        cmult=cmult,
        group=spec,
    )


def compact_from_json(obj: Mapping[str, Any], name: str = "compact") -> OrbifoldDatum:
    """Build a compact orbifold datum from its JSON description."""
    n = int(obj["dimension"])
    sectors = []
    basis: list[BasisClass] = []
    tangent_raw = []
    inv = obj.get("inv", {})
    for s in obj["sectors"]:
        label = str(s["label"])
        first = len(basis)
        for c in s["classes"]:
            basis.append(BasisClass(c["name"], label, int(c["degree"])))
        dim = max(int(c["degree"]) for c in s["classes"]) // 2
        sectors.append(Sector(label, Fraction(str(s.get("age", 0))), int(s.get("dim", dim)),
                              str(inv.get(label, label)), s.get("centralizer")))
        tangent_raw.append((label, first, s.get("tangent", [])))
    r = len(basis)

    def vec(vals, first=0):
        v = zeros(r)
        for i, x in enumerate(vals):
            v[first + i] = exact_parse(x)
        return v

    tangent = []
    for label, first, pieces in tangent_raw:
        for p in pieces:
            tangent.append(EigenPiece(label, Fraction(str(p["f"])), int(p["rank"]), vec(p["ch"], first)))
    pairing = as_matrix([[exact_parse(x) for x in row] for row in obj["pairing"]])
    mult = zeros(r, r, r)
    for s in sectors:
        for i in [i for i, c in enumerate(basis) if c.sector == s.label]:
            if basis[i].degree == 0:
                for j in [j for j, c in enumerate(basis) if c.sector == s.label]:
                    mult[i, j, j] = Fraction(1)
                    mult[j, i, j] = Fraction(1)
    for i, j, k, val in obj.get("cup", []):
        v = exact_parse(val)
        mult[i, j, k] = v
        mult[j, i, k] = v
    restriction = {}
    for s in sectors[1:]:
        m = zeros(r, r)
        given = obj.get("restriction", {}).get(s.label)
        if given is None:
            m[_unit_index(basis, s.label), _unit_index(basis, sectors[0].label)] = Fraction(1)
        else:
            for (src, dst, val) in given:
                m[dst, src] = exact_parse(val)
        restriction[s.label] = m
    lbs = []
    for lb in obj.get("line_bundles", []):
        lbs.append(LineBundle(lb["name"], vec(lb["xi0"]),
                              tuple((str(k), Fraction(str(v))) for k, v in lb.get("f", {}).items())))
    nef = tuple(vec(p) for p in obj.get("nef_basis", []))
    return OrbifoldDatum(
        name=obj.get("name", name),
        kind="compact",
        dimension=n,
        sectors=tuple(sectors),
        basis=tuple(basis),
        pairing=pairing,
        mult=mult,
        restriction=restriction,
        c1=vec(obj["c1"]),
        tangent=tuple(tangent),
        line_bundles=tuple(lbs),
        nef_basis=nef,
    )


def _unit_index(basis, label):
    for i, c in enumerate(basis):
        if c.sector == label and c.degree == 0:
            return i
    raise DataError(f"sector {label} lacks a unit class")


def datum_from_json(obj: Mapping[str, Any], name: str | None = None) -> OrbifoldDatum:
    kind = obj.get("kind")
    if kind == "quotient":
        return inertia_of_quotient(GroupActionSpec.from_json(obj), obj.get("name", name))
    if kind == "compact":
        return compact_from_json(obj, name or "compact")
    raise DataError(f"unknown datum kind {kind!r}")


def load_datum(path) -> OrbifoldDatum:
    with open(path) as fh:
        return datum_from_json(json.load(fh), str(path))


# --------------------------------------------------------------------------
# operations

def chen_ruan_pairing(a: np.ndarray, b: np.ndarray, datum: OrbifoldDatum, a_dual: bool | None = None):
    """(a, b)_orb.  For non-compact data ``a`` must be compactly supported."""
    if a_dual is None:
        a_dual = not datum.compact
    if not datum.compact and not a_dual:
        raise UnsupportedPairingError("two ordinary classes on a non-compact orbifold")
    return a @ datum.pairing @ b


def condition_checks(datum: OrbifoldDatum) -> dict:
    """Uniqueness conditions for the opposite subspace and the dilaton shift."""
    groups: dict[tuple, list[Sector]] = {}
    for s in datum.sectors:
        key = tuple(lb.fv(s.label) for lb in datum.line_bundles)
        groups.setdefault(key, []).append(s)
    witnesses = []
    opposite = True
    for key, members in groups.items():
        vals = sorted({s.dim + 2 * s.age for s in members})
        ok = len(vals) <= 1 or (len(vals) == 2 and vals[1] - vals[0] == 1)
        if ok:
            witnesses.append({"sectors": [s.label for s in members], "n_alpha": vals[0]})
        else:
            opposite = False
            witnesses.append({"sectors": [s.label for s in members], "n_alpha": None, "values": vals})
    dilaton = True
    for s in datum.sectors[1:]:
        if s.age == 0 and not any(lb.fv(s.label) > 0 for lb in datum.line_bundles):
            dilaton = False
    return {"uniqueness_opposite": opposite, "witnesses": witnesses, "uniqueness_dilaton": dilaton}
