"""Fourier-Mukai transport of skyscraper classes and predicted coordinate changes
between a quotient [C^n/G] and its crepant resolution."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import mpmath
import numpy as np

from .algebra import DEFAULT_TOLERANCE, SeriesSpace, TruncatedSeries, cnum, numeric, zeros
from .charges import PotentialInput, charge_c2, charge_c3, charge_difference
from .gamma_frame import root_of_unity
from .orbifold_data import DataError, OrbifoldDatum


@dataclass(frozen=True)
class FMAssignment:
    """Exceptional curve label -> virtual representation rho_C."""

    curves: Mapping[str, Mapping[str, int]]
    dims: Mapping[str, int] = field(default_factory=dict)
    provenance: str = "supplied"

    @classmethod
    def from_json(cls, obj: Mapping[str, Any], datum: OrbifoldDatum | None = None) -> "FMAssignment":
        curves, dims = {}, {}
        for n, c in enumerate(obj["curves"]):
            label = c["label"]
            ch = {k: int(v) for k, v in c["character"].items()}
            curves[label] = ch
            if datum is not None and datum.group is not None:
                G = datum.group
                for k in ch:
                    if k not in G.irreducibles:
                        raise DataError(f"/curves/{n}/character: unknown representation {k!r}")
                d = G.dim(G.virtual_character(ch))
                if "dim" in c and int(c["dim"]) != d:
                    raise DataError(f"/curves/{n}/dim: recorded {c['dim']}, character has dimension {d}")
                dims[label] = d
            elif "dim" in c:
                dims[label] = int(c["dim"])
        return cls(curves, dims, obj.get("provenance", "supplied"))

    def to_json(self) -> dict:
        return {"curves": [{"label": k, "character": dict(v), "dim": self.dims.get(k)}
                           for k, v in self.curves.items()]}


def load_assignment(path, datum: OrbifoldDatum | None = None) -> FMAssignment:
    with open(path) as fh:
        return FMAssignment.from_json(json.load(fh), datum)


def koszul_chern(datum: OrbifoldDatum, rho) -> np.ndarray:
    """tch(O_0 (x) rho) in H_c(IX) from the Koszul resolution.

    n = 2: (dim rho) beta + sum Tr(g | rho (x) (C^2 - Q)) 1_(g).
    n = 3: sum_k (-1)^k Tr(g | rho (x) Lambda^k Q^v) on each fixed-locus top class.
    """
    G = datum.group
    if G is None:
        raise DataError("Koszul resolutions need a quotient datum")
    chi = G.virtual_character(rho)
    out = zeros(len(datum.dual_basis))
    for k, s in enumerate(datum.sectors):
        lam = [root_of_unity(f) for f in s.eigenphases]
        if datum.dimension == 2:
            # on the identity sector the top class beta carries dim rho
            coeff = chi[k] * (2 - (lam[0] + lam[1])) if k else chi[0]
        else:
            # alternating sum of exterior powers of Q^v restricted to the moving directions
            moving = [root_of_unity(-f) for f in s.eigenphases if f != 0]
            alt = Fraction(0)
            for r in range(len(moving) + 1):
                for sub in itertools.combinations(moving, r):
                    p = Fraction(1)
                    for x in sub:
                        p = p * x
                    alt = alt + p * (-1) ** r
            coeff = chi[k] * alt
        idx = [j for j in datum.classes_in(s.label, dual=True) if datum.dual_basis[j].degree == 2 * s.dim]
        out[idx[0]] = coeff
    return out


@dataclass(frozen=True, eq=False)
class CoordinateChange:
    """tau_C(t) for each curve and the value q_C at the orbifold point."""

    tau: Mapping[str, TruncatedSeries]
    q: Mapping[str, Any]

    def check(self, tol: float = DEFAULT_TOLERANCE) -> dict:
        out = {}
        for label, s in self.tau.items():
            c0 = cnum(s.coefficient(tuple([0] * len(s.space.variables)), 0))
            r = abs(mpmath.exp(c0) - cnum(self.q[label]))
            out[label] = {"residual": r, "pass": r <= tol}
        return out

    def to_json(self) -> dict:
        return {label: {"tau": self.tau[label].to_json(), "q": self.q[label]} for label in self.tau}


def _charge(datum, rho, pots, space):
    if datum.dimension == 2:
        return charge_c2(datum, rho, space)
    return charge_c3(datum, rho, pots, space)


def predict_coordinate_change(assign: FMAssignment, datum: OrbifoldDatum, pots: PotentialInput | None = None,
                              space: SeriesSpace | None = None) -> CoordinateChange:
    """tau_C = -2 pi i Z(O_0 (x) rho_C) restricted to H^2_CR, q_C = exp(-2 pi i dim rho_C/|G|)."""
    G = datum.group
    if G is None:
        raise DataError("coordinate-change predictions need a quotient datum")
    taus, qs = {}, {}
    for label, rho in assign.curves.items():
        Z = _charge(datum, rho, pots, space)
        taus[label] = Z.series * (-2j * mpmath.pi)
        dim = G.dim(G.virtual_character(rho))
        qs[label] = mpmath.exp(-2j * mpmath.pi * Fraction(dim, G.order))
    return CoordinateChange(taus, qs)


def local_p2_closed_form(space: SeriesSpace, name: str, dF0: Mapping[int, Any]) -> TruncatedSeries:
    """-2 pi i - 2 pi sqrt3 / (3 Gamma(2/3)^3) alpha^2 t + 2 pi sqrt3 / Gamma(1/3)^3 alpha F_0'(t)."""
    alpha = mpmath.expjpi(mpmath.mpf(2) / 3)
    pi, s3 = mpmath.pi, mpmath.sqrt(3)
    out = TruncatedSeries.constant(space, -2j * pi)
    out = out + TruncatedSeries.monomial(space, {name: 1}, 0, -2 * pi * s3 / (3 * mpmath.gamma(mpmath.mpf(2) / 3) ** 3)
                                         * alpha ** 2)
    c = 2 * pi * s3 / mpmath.gamma(mpmath.mpf(1) / 3) ** 3 * alpha
    for e, a in dF0.items():
        out = out + TruncatedSeries.monomial(space, {name: e}, 0, c * numeric(a))
    return out


def crossref_central_charges(y_charge: tuple, tau_c: TruncatedSeries, label: str, assign: FMAssignment,
                             datum: OrbifoldDatum, pots: PotentialInput | None = None,
                             tol: float = DEFAULT_TOLERANCE) -> dict:
    """Compare Z^Y(V) = a + b tau_C, pulled back along tau_C(t), with +-Z^X(O_0 (x) rho_C)."""
    a, b = y_charge
    zy = tau_c * b + a
    zx = _charge(datum, assign.curves[label], pots, tau_c.space).series
    plus = charge_difference(zy, zx)
    minus = charge_difference(zy, zx * -1)
    if plus <= tol:
        return {"sign": "+", "residual": plus, "pass": True}
    if minus <= tol:
        return {"sign": "-", "residual": minus, "pass": True}
    return {"sign": None, "residual": min(plus, minus), "pass": False,
            "difference": (zy - zx).to_json()}


def match_modulo_galois(candidate: TruncatedSeries, reference: TruncatedSeries, datum: OrbifoldDatum,
                        shifts: Sequence[int] = (-1, 0, 1), tol: float = DEFAULT_TOLERANCE) -> dict:
    """Find tau_C -> tau_C + 2 pi i k and t^(g) -> chi(g) t^(g) making the series agree."""
    G = datum.group
    chars = G.linear_characters if G is not None else []
    if callable(chars):
        chars = chars()
    sp = candidate.space
    for name in list(chars) or [None]:
        moved = {}
        for (e, z), c in candidate.terms.items():
            w = cnum(c)
            for k, x in enumerate(e):
                if x and name is not None:
                    var = sp.variables[k]
                    idx = int(var[1:])
                    label = datum.basis[idx].sector
                    w = w * cnum(G.character(name)[datum.sector_index(label)]) ** x
            moved[(e, z)] = w
        rotated = TruncatedSeries(sp, moved)
        for k in shifts:
            r = charge_difference(rotated + 2j * mpmath.pi * k, reference)
            if r <= tol:
                return {"character": name, "shift": k, "residual": r, "pass": True}
    return {"character": None, "shift": None, "residual": None, "pass": False}
