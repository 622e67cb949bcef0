"""Orbifold Chern character, Gamma and Todd classes, Kawasaki-Riemann-Roch
and the K-group framing."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import mpmath
import numpy as np

from .algebra import (
    Cyclotomic,
    DEFAULT_TOLERANCE,
    cnum,
    is_zero,
    loggamma_taylor,
    nilpotent_exp,
    numeric,
    ps_exp,
    ps_log1p,
    zeros,
)
from .orbifold_data import DataError, EigenPiece, OrbifoldDatum, UnsupportedPairingError, frac_mod1


class IntegralityError(ArithmeticError):
    """An Euler characteristic that is not an integer."""


def root_of_unity(f: Fraction):
    """exp(2 pi i f) as an exact number."""
    f = frac_mod1(f)
    if f == 0:
        return Fraction(1)
    return Cyclotomic.zeta(f.denominator, f.numerator)


# --------------------------------------------------------------------------
# K-classes

@dataclass(frozen=True, eq=False)
class KClass:
    """Virtual orbifold bundle given by its eigen-data, or a twisted skyscraper.

    Bundles carry a list of :class:`EigenPiece`; negative ranks encode virtual
    differences.  A skyscraper O_0 (x) rho on a quotient [C^n/G] is stored by the
    virtual character of rho (one value per conjugacy class) and lives in
    compactly supported K-theory.
    """

    pieces: tuple[EigenPiece, ...] = ()
    character: tuple | None = None
    label: str = ""

    @property
    def compact_support(self) -> bool:
        return self.character is not None

    def __add__(self, other: "KClass") -> "KClass":
        if self.compact_support != other.compact_support and (self.pieces or other.pieces):
            if not (self.is_zero() or other.is_zero()):
                raise TypeError("cannot add bundles and compactly supported classes")
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.compact_support:
            ch = tuple(a + b for a, b in zip(self.character, other.character))
            return KClass((), ch, f"{self.label}+{other.label}")
        return KClass(self.pieces + other.pieces, None, f"{self.label}+{other.label}")

    def scale(self, k: int) -> "KClass":
        if self.compact_support:
            return KClass((), tuple(Fraction(k) * c for c in self.character), f"{k}*{self.label}")
        return KClass(tuple(EigenPiece(p.sector, p.f, k * p.rank, p.ch * k) for p in self.pieces),
                      None, f"{k}*{self.label}")

    __rmul__ = lambda self, k: self.scale(k)  # noqa: E731

    def __neg__(self) -> "KClass":
        return self.scale(-1)

    def __sub__(self, other: "KClass") -> "KClass":
        return self + (-other)

    def is_zero(self) -> bool:
        if self.compact_support:
            return all(not c for c in self.character)
        return all(p.rank == 0 and all(is_zero(x, 0) for x in p.ch) for p in self.pieces)


ZERO = KClass((), None, "0")


def structure_sheaf(datum: OrbifoldDatum) -> KClass:
    return KClass(tuple(EigenPiece(s.label, Fraction(0), 1, datum.unit(s.label)) for s in datum.sectors),
                  None, "O")


def line_bundle(datum: OrbifoldDatum, name: str | None = None, power: int = 1) -> KClass:
    """Tensor power of a registered orbifold line bundle L_xi."""
    lb = datum.line_bundles[0] if name is None else datum.line_bundle(name)
    pieces = []
    for s in datum.sectors:
        x = datum.restrict(lb.xi0, s.label) * power
        pieces.append(EigenPiece(s.label, frac_mod1(power * lb.fv(s.label)), 1, datum.sector_exp(x, s.label)))
    return KClass(tuple(pieces), None, f"{lb.name}^{power}")


def tangent_bundle(datum: OrbifoldDatum) -> KClass:
    return KClass(datum.tangent, None, "T")


def point_sheaf(datum: OrbifoldDatum) -> KClass:
    """Skyscraper at a non-stacky point."""
    return KClass((EigenPiece(datum.untwisted.label, Fraction(0), 0, datum.pt_class()),), None, "O_pt")


def skyscraper(datum: OrbifoldDatum, rho: Mapping[str, int] | str = "reg") -> KClass:
    """O_0 (x) rho on a global quotient, rho a virtual representation."""
    if datum.group is None:
        raise DataError("twisted skyscrapers need a quotient datum")
    chi = datum.group.virtual_character(rho)
    name = rho if isinstance(rho, str) else "+".join(f"{k}*{n}" for n, k in rho.items())
    return KClass((), chi, f"O_0({name})")


def tensor(a: KClass, b: KClass, datum: OrbifoldDatum) -> KClass:
    if a.compact_support and b.compact_support:
        raise TypeError("product of two compactly supported classes is not supported")
    if b.compact_support:
        a, b = b, a
    if a.compact_support:
        # the bundle b acts on the fibre at 0 through its character
        chi = []
        for i, s in enumerate(datum.sectors):
            tr = sum((p.rank * root_of_unity(p.f) for p in b.pieces if p.sector == s.label), Fraction(0))
            chi.append(a.character[i] * tr)
        return KClass((), tuple(chi), f"{a.label}*{b.label}")
    pieces = []
    for p in a.pieces:
        for q in b.pieces:
            if p.sector == q.sector:
                pieces.append(EigenPiece(p.sector, frac_mod1(p.f + q.f), p.rank * q.rank, datum.mul(p.ch, q.ch)))
    return KClass(tuple(pieces), None, f"{a.label}*{b.label}")


def dual(a: KClass, datum: OrbifoldDatum) -> KClass:
    if a.compact_support:
        chi = tuple(c.conjugate() if isinstance(c, Cyclotomic) else c for c in a.character)
        return KClass((), chi, f"{a.label}^v")
    pieces = []
    for p in a.pieces:
        ch = p.ch.copy()
        for i, d in enumerate(datum.sector_degrees()):
            if (d // 2) % 2:
                ch[i] = -ch[i]
        pieces.append(EigenPiece(p.sector, frac_mod1(-p.f), p.rank, ch))
    return KClass(tuple(pieces), None, f"{a.label}^v")


# --------------------------------------------------------------------------
# characteristic classes

def _ch_parts(piece: EigenPiece, datum: OrbifoldDatum) -> list[np.ndarray]:
    """[ch_0, ch_1, ...] of a piece, ch_k the sector-degree-2k part."""
    return [datum.degree_part(piece.ch, 2 * k) for k in range(datum.dimension + 1)]


def _multiplicative(V: KClass, datum: OrbifoldDatum,
                    log_factor: Callable[[Fraction, int], list]) -> np.ndarray:
    """prod over Chern roots of phi_f(delta), given log phi_f as a Taylor series.

    sum_i log phi_f(delta_i) = rank * a_0 + sum_k a_k * k! * ch_k, so no roots
    are ever needed.
    """
    if V.compact_support:
        raise TypeError("characteristic classes of compactly supported classes are not defined here")
    K = datum.dimension
    out = zeros(datum.rank)
    for s in datum.sectors:
        exponent = zeros(datum.rank)
        const = 0
        for p in (p for p in V.pieces if p.sector == s.label):
            a = log_factor(p.f, K)
            const = const + p.rank * a[0]
            parts = _ch_parts(p, datum)
            for k in range(1, K + 1):
                if any(not is_zero(x, 0) for x in parts[k]):
                    exponent = exponent + parts[k] * (a[k] * mpmath.factorial(k))
        u = datum.unit(s.label)
        val = datum.sector_exp(exponent, s.label) if any(not is_zero(x, 0) for x in exponent) else u
        if not is_zero(const, 0):
            val = val * mpmath.exp(const)
        out = out + val
    return out


def _log_gamma_factor(f: Fraction, K: int) -> list:
    return loggamma_taylor(f, K)


def _log_todd_factor(f: Fraction, K: int) -> list:
    n = K + 1
    if f == 0:
        # log(x / (1 - e^{-x})) = x/2 - sum B_{2k} x^{2k} / (2k (2k)!)
        out = [mpmath.mpf(0)] * n
        if n > 1:
            out[1] = mpmath.mpf(1) / 2
        for k in range(1, n):
            if 2 * k < n:
                out[2 * k] = -mpmath.bernoulli(2 * k) / (2 * k * mpmath.factorial(2 * k))
        return out
    lam = mpmath.expjpi(-2 * numeric(f))
    # -log(1 - lam e^{-x}) = -log(1-lam) - log(1 + w),  w = lam (1 - e^{-x}) / (1 - lam)
    w = [mpmath.mpf(0)] + [-(lam / (1 - lam)) * (-1) ** k / mpmath.factorial(k) for k in range(1, n)]
    lg = ps_log1p(w, n)
    out = [-x for x in lg]
    out[0] = out[0] - mpmath.log(1 - lam)
    return out


def gamma_class(V: KClass, datum: OrbifoldDatum) -> np.ndarray:
    """Gamma-hat class of V on the inertia stack."""
    return _multiplicative(V, datum, _log_gamma_factor)


def todd_class(V: KClass, datum: OrbifoldDatum) -> np.ndarray:
    """Orbifold Todd class of V on the inertia stack."""
    return _multiplicative(V, datum, _log_todd_factor)


def orbifold_chern_character(V: KClass, datum: OrbifoldDatum) -> np.ndarray:
    """tch(V); compactly supported when V is a twisted skyscraper."""
    if V.compact_support:
        return koszul_tch(V.character, datum)
    out = zeros(datum.rank)
    ranks = {s.label: sum(p.rank for p in V.pieces if p.sector == s.label) for s in datum.sectors}
    if len(set(ranks.values())) > 1:
        raise DataError(f"eigen-data ranks differ between sectors: {ranks}")
    for p in V.pieces:
        out = out + p.ch * root_of_unity(p.f)
    return out


def koszul_tch(chi, datum: OrbifoldDatum) -> np.ndarray:
    """tch of O_0 (x) rho from the equivariant Koszul resolution.

    The component on the sector of g is Tr(g|rho) * prod_{f_j>0}(1 - e^{-2 pi i f_j})
    times the compactly supported top class of the fixed locus.
    """
    out = zeros(len(datum.dual_basis))
    for i, s in enumerate(datum.sectors):
        coeff = chi[i]
        for f in s.eigenphases:
            if f != 0:
                coeff = coeff * (1 - root_of_unity(-f))
        idx = [j for j in datum.classes_in(s.label, dual=True)
               if datum.dual_basis[j].degree == 2 * s.dim]
        out[idx[0]] = coeff
    return out


# --------------------------------------------------------------------------
# Riemann-Roch and the framing

def kawasaki_chi(V: KClass, datum: OrbifoldDatum, tol: float = DEFAULT_TOLERANCE) -> int:
    """Kawasaki-Riemann-Roch; raises :class:`IntegralityError` off the integers."""
    value = kawasaki_value(V, datum)
    n = int(mpmath.nint(numeric(value).real if isinstance(numeric(value), mpmath.mpc) else numeric(value)))
    if abs(cnum(value) - n) > tol:
        raise IntegralityError(f"chi = {mpmath.nstr(cnum(value), 15)} is not an integer")
    return n


def kawasaki_value(V: KClass, datum: OrbifoldDatum):
    if V.is_zero():
        return Fraction(0)
    td = todd_class(tangent_bundle(datum), datum)
    ch = orbifold_chern_character(V, datum)
    if V.compact_support:
        return datum.integrate(datum.mul_c(td, ch), dual=True)
    if not datum.compact:
        raise UnsupportedPairingError("chi of a bundle on a non-compact orbifold")
    return datum.integrate(datum.mul(ch, td))


@dataclass(frozen=True, eq=False)
class FramedSection:
    """Psi(V) together with its ambient datum."""

    vector: np.ndarray = field(repr=False)
    datum: OrbifoldDatum = field(repr=False)
    compact_support: bool = False
    label: str = ""

    def __add__(self, other: "FramedSection") -> "FramedSection":
        return FramedSection(self.vector + other.vector, self.datum, self.compact_support, self.label)

    def __rmul__(self, k) -> "FramedSection":
        return FramedSection(self.vector * k, self.datum, self.compact_support, self.label)


def degree_scale(x: np.ndarray, datum: OrbifoldDatum, base, dual: bool = False) -> np.ndarray:
    """base^{deg/2} acting on sector-internal degrees."""
    out = x.copy()
    for i, d in enumerate(datum.sector_degrees(dual)):
        if d:
            out[i] = out[i] * base ** (d // 2)
    return out


def psi_map(V: KClass, datum: OrbifoldDatum) -> FramedSection:
    """Psi(V) = (2 pi)^{-n/2} Gamma(TX) cup (2 pi i)^{deg/2} inv* tch(V)."""
    n = datum.dimension
    cs = V.compact_support
    if V.is_zero():
        return FramedSection(zeros(len(datum.dual_basis) if cs else datum.rank), datum, cs, V.label)
    gam = gamma_class(tangent_bundle(datum), datum)
    tch = orbifold_chern_character(V, datum)
    x = degree_scale(datum.inv_pullback(tch, dual=cs), datum, 2j * mpmath.pi, dual=cs)
    x = datum.mul_c(gam, x) if cs else datum.mul(gam, x)
    return FramedSection(x * (2 * mpmath.pi) ** (-mpmath.mpf(n) / 2), datum, cs, V.label)


def psi_display_normalized(V: KClass, datum: OrbifoldDatum) -> np.ndarray:
    """Psi(V) rescaled by (2 pi)^{n/2} / (2 pi i)^n, the factor absorbed by c(z)."""
    n = datum.dimension
    return psi_map(V, datum).vector * ((2 * mpmath.pi) ** (mpmath.mpf(n) / 2) / (2j * mpmath.pi) ** n)


def e_pi_i_rho(datum: OrbifoldDatum) -> np.ndarray:
    return nilpotent_exp(datum.rho_operator, 1j * mpmath.pi)


def e_pi_i_mu(datum: OrbifoldDatum, dual: bool = False) -> np.ndarray:
    m = datum.mu_matrix(dual)
    out = zeros(*m.shape)
    for i in range(m.shape[0]):
        out[i, i] = mpmath.expjpi(numeric(m[i, i]))
    return out


def mukai_pairing_check(V1: KClass, V2: KClass, datum: OrbifoldDatum,
                        tol: float = DEFAULT_TOLERANCE) -> dict:
    """Compare (e^{pi i rho} Psi(V1), e^{pi i mu} Psi(V2)) with chi(V1 (x) V2^v)."""
    if not datum.compact:
        raise UnsupportedPairingError("the Mukai identity is checked on compact data only")
    a = e_pi_i_rho(datum) @ psi_map(V1, datum).vector
    b = e_pi_i_mu(datum) @ psi_map(V2, datum).vector
    lhs = cnum(a @ datum.pairing @ b)
    rhs = cnum(kawasaki_value(tensor(V1, dual(V2, datum), datum), datum)) if not (V1.is_zero() or V2.is_zero()) \
        else mpmath.mpc(0)
    return {"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs), "pass": abs(lhs - rhs) < tol}


def square_root_check(V: KClass, datum: OrbifoldDatum, tol: float = DEFAULT_TOLERANCE) -> dict:
    """The Gamma class as a square root of the Todd class, sector by sector."""
    gam = gamma_class(V, datum)
    td = todd_class(V, datum)
    left_g = degree_scale(gam, datum, -1)
    inv_g = datum.inv_pullback(gam)
    residuals = {}
    for s in datum.sectors:
        lhs = datum.mul(datum.sector_part(left_g, s.label), datum.sector_part(inv_g, s.label))
        c1 = zeros(datum.rank)
        age = Fraction(0)
        twisted_rank = 0
        for p in V.pieces:
            if p.sector == s.label:
                c1 = c1 + datum.degree_part(p.ch, 2)
                age += p.f * p.rank
                if p.f != 0:
                    twisted_rank += p.rank
        factor = datum.sector_exp(c1 * (1j * mpmath.pi), s.label) * mpmath.expjpi(numeric(age))
        lhs = datum.mul(lhs, factor)
        rhs = degree_scale(datum.sector_part(td, s.label), datum, 2j * mpmath.pi) * (2j * mpmath.pi) ** twisted_rank
        r = max(abs(cnum(x)) for x in (lhs - rhs))
        residuals[s.label] = r
    worst = max(residuals.values())
    return {"residuals": residuals, "max_residual": worst, "pass": worst < tol}
