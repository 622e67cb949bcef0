"""Galois (large-radius monodromy) actions, z-monodromy and checks on
externally supplied symplectic transforms."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any, Mapping, Sequence

import mpmath
import numpy as np

from .algebra import (
    DEFAULT_TOLERANCE,
    ShapeError,
    as_matrix,
    cnum,
    exact_parse,
    identity,
    inverse,
    matrix_power,
    max_abs,
    nilpotent_exp,
    zeros,
)
from .gamma_frame import KClass, dual, e_pi_i_mu, e_pi_i_rho, psi_map, root_of_unity, tensor
from .gamma_frame import line_bundle as lb_class
from .orbifold_data import LineBundle, OrbifoldDatum, frac_mod1


@dataclass(frozen=True, eq=False)
class GaloisAction:
    """G(xi) on coordinates and dG(xi) on tangent vectors."""

    name: str
    xi0: np.ndarray = field(repr=False)
    f: Mapping[str, Fraction] = field(default_factory=dict)

    def fv(self, sector: str) -> Fraction:
        return self.f.get(sector, Fraction(0))

    def __add__(self, other: "GaloisAction") -> "GaloisAction":
        keys = set(self.f) | set(other.f)
        return GaloisAction(f"{self.name}+{other.name}", self.xi0 + other.xi0,
                            {k: frac_mod1(self.fv(k) + other.fv(k)) for k in keys})

    def scale(self, k: int) -> "GaloisAction":
        return GaloisAction(f"{k}*{self.name}", self.xi0 * k, {s: frac_mod1(k * v) for s, v in self.f.items()})

    def sector_scaling(self, datum: OrbifoldDatum, dual: bool = False) -> np.ndarray:
        """dG(xi): multiplication by exp(2 pi i f_v(xi)) on each sector."""
        b = datum.dual_basis if dual else datum.basis
        m = zeros(len(b), len(b))
        for i, c in enumerate(b):
            m[i, i] = root_of_unity(self.fv(c.sector))
        return m

    def on_coordinates(self, tau: np.ndarray, datum: OrbifoldDatum) -> np.ndarray:
        """G(xi)(tau): shift of the untwisted part by -2 pi i xi_0, scaling elsewhere."""
        out = self.sector_scaling(datum) @ tau
        return out - 2j * mpmath.pi * self.xi0


def action(datum: OrbifoldDatum, xi: str | LineBundle | GaloisAction | None) -> GaloisAction:
    if isinstance(xi, GaloisAction):
        return xi
    if xi is None or xi == "0":
        return GaloisAction("0", zeros(datum.rank), {})
    lb = xi if isinstance(xi, LineBundle) else datum.line_bundle(xi)
    return GaloisAction(lb.name, lb.xi0, dict(lb.f))


def galois_on_sol(xi, datum: OrbifoldDatum, dual: bool = False) -> np.ndarray:
    """Matrix of alpha -> (+)_v exp(-2 pi i xi_0) exp(2 pi i f_v(xi)) alpha."""
    g = action(datum, xi)
    cup = datum.cup_operator(g.xi0, dual=dual)
    return g.sector_scaling(datum, dual) @ nilpotent_exp(cup, -2j * mpmath.pi)


def sol_pairing_matrix(datum: OrbifoldDatum) -> np.ndarray:
    """S[j, k] = (e^{pi i rho} c_j, e^{pi i mu} phi_k)_orb."""
    if datum.compact:
        left = e_pi_i_rho(datum)
    else:
        left = identity(len(datum.dual_basis))  # rho = 0 on the quotients handled here
        if any(x != 0 for x in datum.c1):
            raise ShapeError("non-compact data with c_1 != 0 are not supported")
    return left.T @ datum.pairing @ e_pi_i_mu(datum)


def z_monodromy(datum: OrbifoldDatum) -> np.ndarray:
    """(-1)^n exp(-2 pi i rho) (+)_v exp(2 pi i age_v)."""
    n = datum.dimension
    ages = zeros(datum.rank, datum.rank)
    for i, c in enumerate(datum.basis):
        ages[i, i] = root_of_unity(datum.sector(c.sector).age)
    m = nilpotent_exp(datum.rho_operator, -2j * mpmath.pi) @ ages
    return m * (-1) ** n


def galois_power_order(xi, datum: OrbifoldDatum) -> int:
    """Smallest k_0 making the sector scaling trivial: the lcm of the f_v denominators."""
    g = action(datum, xi)
    return lcm(1, *(Fraction(v).denominator for v in g.f.values()))


def power_identity_check(xi, datum: OrbifoldDatum, tol: float = DEFAULT_TOLERANCE) -> dict:
    """(G^H(xi))^{k_0} is the identity on the degree-zero (z^0) part."""
    k0 = galois_power_order(xi, datum)
    dg = action(datum, xi).sector_scaling(datum)
    r = max_abs(matrix_power(dg, k0) - identity(datum.rank))
    return {"k0": k0, "residual": r, "pass": r <= tol}


def tensor_line_bundle_check(xi, V: KClass, datum: OrbifoldDatum, tol: float = DEFAULT_TOLERANCE) -> dict:
    """Psi(L_xi^v (x) V) against G^Sol(xi) Psi(V)."""
    g = action(datum, xi)
    if g.name == "0":
        twisted = V
    else:
        twisted = tensor(dual(lb_class(datum, g.name), datum), V, datum)
    cs = V.compact_support
    lhs = psi_map(twisted, datum).vector
    rhs = galois_on_sol(g, datum, dual=cs) @ psi_map(V, datum).vector
    r = max_abs(lhs - rhs) if len(lhs) else 0
    return {"residual": r, "pass": r <= tol}


# --------------------------------------------------------------------------
# external transforms

@dataclass(frozen=True, eq=False)
class ExternalTransform:
    """U(z) = sum_k U_k z^k, a Laurent polynomial matrix."""

    coeffs: Mapping[int, np.ndarray]
    z_lo: int = 0
    z_hi: int = 0

    def __post_init__(self):
        shapes = {c.shape for c in self.coeffs.values()}
        if len(shapes) > 1:
            raise ShapeError("coefficient matrices differ in shape")
        for k in self.coeffs:
            if not (-self.z_lo <= k <= self.z_hi):
                raise ShapeError(f"z^{k} lies outside the declared window")

    @property
    def shape(self):
        return next(iter(self.coeffs.values())).shape

    def at(self, k: int) -> np.ndarray:
        return self.coeffs.get(k, zeros(*self.shape))

    def negate_z(self) -> "ExternalTransform":
        return ExternalTransform({k: c * (-1) ** (k % 2) for k, c in self.coeffs.items()}, self.z_hi, self.z_lo)

    @classmethod
    def constant(cls, m: np.ndarray) -> "ExternalTransform":
        return cls({0: m})

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "ExternalTransform":
        """``{"matrix": [[ [[k, c], ...], ...], ...], "z_window": [lo, hi]}``."""
        rows = obj["matrix"]
        n, m = len(rows), len(rows[0])
        coeffs: dict[int, np.ndarray] = {}
        for i, row in enumerate(rows):
            for j, entry in enumerate(row):
                for k, c in entry:
                    k = int(k)
                    coeffs.setdefault(k, zeros(n, m))
                    coeffs[k][i, j] = coeffs[k][i, j] + exact_parse(c)
        if not coeffs:
            coeffs[0] = zeros(n, m)
        lo, hi = obj.get("z_window", [max(0, -min(coeffs)), max(0, max(coeffs))])
        return cls(coeffs, int(lo), int(hi))


def load_transform(path) -> ExternalTransform:
    with open(path) as fh:
        return ExternalTransform.from_json(json.load(fh))


def _f_part(d: Fraction) -> Fraction:
    return frac_mod1(Fraction(d) / 2)


def validate_transform(U: ExternalTransform, d1: OrbifoldDatum, d2: OrbifoldDatum,
                       pullbacks: Sequence[tuple[np.ndarray, np.ndarray]] = (),
                       tol: float = DEFAULT_TOLERANCE) -> dict:
    """Check the structural properties expected of an analytic continuation map."""
    if d1.dimension != d2.dimension:
        raise ShapeError("dimension mismatch")
    if U.shape != (d2.rank, d1.rank):
        raise ShapeError(f"U has shape {U.shape}, expected {(d2.rank, d1.rank)}")
    checks = {}

    def record(name, residual):
        checks[name] = {"residual": residual, "pass": residual <= tol}

    r1, r2 = d1.rho_operator, d2.rho_operator
    record("rho", max((max_abs(c @ r1 - r2 @ c) for c in U.coeffs.values()), default=0))

    deg1, deg2 = d1.cr_degrees(), d2.cr_degrees()
    worst = mpmath.mpf(0)
    wdeg = mpmath.mpf(0)
    for k, c in U.coeffs.items():
        for i in range(d2.rank):
            for j in range(d1.rank):
                x = abs(cnum(c[i, j]))
                if _f_part(deg1[j]) != _f_part(deg2[i]):
                    worst = max(worst, x)
                # U = z^{-mu_2} U_coh z^{mu_1}: z^k only between degrees with deg_j - deg_i = 2k
                if Fraction(deg1[j] - deg2[i]) != 2 * k:
                    wdeg = max(wdeg, x)
    record("f_parts", worst)
    record("degree", wdeg)

    if d1.compact and d2.compact:
        # (U(-z) a, U(z) b)_2 = (a, b)_1 as a Laurent polynomial identity
        Um = U.negate_z()
        ks = sorted(set(U.coeffs) | set(Um.coeffs))
        worst = mpmath.mpf(0)
        for total in range(min(ks) * 2, max(ks) * 2 + 1):
            acc = zeros(d1.rank, d1.rank)
            for a in Um.coeffs:
                b = total - a
                if b in U.coeffs:
                    acc = acc + Um.coeffs[a].T @ d2.pairing @ U.coeffs[b]
            if total == 0:
                acc = acc - d1.pairing
            worst = max(worst, max_abs(acc))
        record("pairing", worst)
    else:
        checks["pairing"] = {"residual": None, "pass": None, "note": "skipped: non-compact data"}

    worst = mpmath.mpf(0)
    for a1, a2 in pullbacks:
        c1, c2 = d1.cup_operator(a1), d2.cup_operator(a2)
        for c in U.coeffs.values():
            worst = max(worst, max_abs(c @ c1 - c2 @ c))
    if pullbacks:
        record("pullback", worst)
    ok = all(v["pass"] is not False for v in checks.values())
    return {"checks": checks, "pass": ok}


def graded_block_transform(phi: np.ndarray, d1: OrbifoldDatum, d2: OrbifoldDatum) -> ExternalTransform:
    """Turn a degree-preserving isomorphism U_coh into U = z^{-mu_2} U_coh z^{mu_1}."""
    deg1, deg2 = d1.cr_degrees(), d2.cr_degrees()
    coeffs: dict[int, np.ndarray] = {}
    for i in range(phi.shape[0]):
        for j in range(phi.shape[1]):
            if phi[i, j] == 0:
                continue
            k = Fraction(deg1[j] - deg2[i]) / 2
            if k.denominator != 1:
                raise ShapeError("U_coh mixes fractional degree parts")
            coeffs.setdefault(int(k), zeros(*phi.shape))[i, j] = phi[i, j]
    if not coeffs:
        coeffs[0] = zeros(*phi.shape)
    return ExternalTransform(coeffs, max(0, -min(coeffs)), max(0, max(coeffs)))
