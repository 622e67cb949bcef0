"""Scalars, small dense linear algebra and truncated Laurent series.

Numbers flow through the library in three flavours:

* ``int`` / ``fractions.Fraction`` -- exact rationals,
* :class:`Cyclotomic` -- exact elements of Q(zeta_m),
* ``mpmath.mpc`` / ``mpmath.mpf`` -- numbers at the working precision.

Exact inputs stay exact for as long as the arithmetic allows it; anything that
touches a transcendental constant becomes an ``mpc``.  Matrices and vectors are
numpy arrays of dtype ``object`` so the same code runs over every flavour.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from typing import Any, Callable, Iterable, Mapping, Sequence

import mpmath
import numpy as np

DEFAULT_PRECISION = 64
DEFAULT_TOLERANCE = 1e-10


class ShapeError(ValueError):
    """Operands with incompatible shapes, variables or windows."""


class DomainError(ValueError):
    """Argument outside the domain of a function."""


@contextlib.contextmanager
def precision(digits: int):
    """Temporarily set the working precision in decimal digits."""
    with mpmath.workdps(digits):
        yield


def ensure_default_precision() -> None:
    if mpmath.mp.dps < DEFAULT_PRECISION:
        mpmath.mp.dps = DEFAULT_PRECISION


# --------------------------------------------------------------------------
# cyclotomic numbers

@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Coefficients (lowest degree first) of the m-th cyclotomic polynomial."""
    if m < 1:
        raise DomainError("conductor must be positive")
    num = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            num = _poly_divexact(num, list(cyclotomic_polynomial(d)))
    return tuple(num)


def _poly_divexact(a: list[int], b: list[int]) -> list[int]:
    a = list(a)
    q = [0] * (len(a) - len(b) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = a[i + len(b) - 1] // b[-1]
        q[i] = c
        for j, bj in enumerate(b):
            a[i + j] -= c * bj
    if any(a):
        raise ArithmeticError("inexact polynomial division")
    return q


def _reduce(coeffs: dict[int, Fraction], m: int) -> dict[int, Fraction]:
    phi = cyclotomic_polynomial(m)
    deg = len(phi) - 1
    work = {k % m: Fraction(0) for k in coeffs}
    for k, c in coeffs.items():
        work[k % m] += c
    top = max(work, default=-1)
    for k in range(top, deg - 1, -1):
        c = work.pop(k, 0)
        if c:
            # zeta^k = zeta^(k-deg) * (x^deg - phi(x))
            for j in range(deg):
                if phi[j]:
                    idx = k - deg + j
                    work[idx] = work.get(idx, 0) - c * phi[j]
    return {k: c for k, c in sorted(work.items()) if c}


class Cyclotomic:
    """Exact element sum_k c_k zeta_m^k of the cyclotomic field Q(zeta_m)."""

    __slots__ = ("m", "coeffs")

    def __init__(self, coeffs: Mapping[int, Any] | None = None, m: int = 1):
        c = {int(k): Fraction(v) for k, v in (coeffs or {}).items()}
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "coeffs", tuple(_reduce(c, int(m)).items()))

    def __setattr__(self, *_):
        raise AttributeError("Cyclotomic is immutable")

    @classmethod
    def zeta(cls, m: int, k: int = 1) -> "Cyclotomic":
        return cls({k: 1}, m)

    @classmethod
    def rational(cls, r) -> "Cyclotomic":
        return cls({0: r}, 1)

    def lift(self, m: int) -> "Cyclotomic":
        if m % self.m:
            raise ShapeError(f"conductor {self.m} does not divide {m}")
        s = m // self.m
        return Cyclotomic({k * s: c for k, c in self.coeffs}, m)

    def _common(self, other) -> tuple["Cyclotomic", "Cyclotomic"] | None:
        if isinstance(other, (int, Fraction)):
            other = Cyclotomic.rational(other)
        if not isinstance(other, Cyclotomic):
            return None
        m = self.m * other.m // math.gcd(self.m, other.m)
        return self.lift(m), other.lift(m)

    def __add__(self, other):
        pair = self._common(other)
        if pair is None:
            return self.numeric() + other
        a, b = pair
        d = dict(a.coeffs)
        for k, c in b.coeffs:
            d[k] = d.get(k, 0) + c
        return Cyclotomic(d, a.m)

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic({k: -c for k, c in self.coeffs}, self.m)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._common(other)
        if pair is None:
            return self.numeric() * other
        a, b = pair
        d: dict[int, Fraction] = {}
        for (k1, c1), (k2, c2) in iproduct(a.coeffs, b.coeffs):
            d[k1 + k2] = d.get(k1 + k2, 0) + c1 * c2
        return Cyclotomic(d, a.m)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        if isinstance(other, Cyclotomic) and other.is_rational():
            return self * (1 / other.as_rational())
        return self.numeric() / numeric(other)

    def conjugate(self) -> "Cyclotomic":
        return Cyclotomic({-k: c for k, c in self.coeffs}, self.m)

    def is_rational(self) -> bool:
        return all(k == 0 for k, _ in self.coeffs)

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not rational")
        return dict(self.coeffs).get(0, Fraction(0))

    def numeric(self):
        z = mpmath.mpc(0)
        for k, c in self.coeffs:
            z += mpmath.mpf(c.numerator) / c.denominator * mpmath.expjpi(mpmath.mpf(2 * k) / self.m)
        return z

    def __eq__(self, other):
        pair = self._common(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return a.coeffs == b.coeffs

    def __hash__(self):
        if self.is_rational():
            return hash(self.as_rational())
        return hash((self.m, self.coeffs))

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = [f"{c}" if k == 0 else f"{c}*E({self.m})^{k}" for k, c in self.coeffs]
        return " + ".join(parts)


# --------------------------------------------------------------------------
# scalar helpers

def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, Cyclotomic)) and not isinstance(x, bool)


def numeric(x):
    """Value of ``x`` as an mpmath number at the working precision."""
    if isinstance(x, Cyclotomic):
        return x.numeric()
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return x
    if isinstance(x, complex):
        return mpmath.mpc(x)
    return mpmath.mpf(x)


def cnum(x) -> mpmath.mpc:
    return mpmath.mpc(numeric(x))


def absval(x):
    if isinstance(x, (int, Fraction)):
        return abs(Fraction(x))
    return abs(numeric(x))


def is_zero(x, tol: float | None = None) -> bool:
    if is_exact(x):
        return not x
    if tol is None:
        tol = 10 ** (-(mpmath.mp.dps // 2))
    return abs(numeric(x)) <= tol


def exact_parse(s) -> Any:
    """Parse a JSON scalar: int, ``"p/q"``, ``[re, im]`` strings or cyclotomic dict."""
    if isinstance(s, bool):
        raise ValueError("booleans are not scalars")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        return Fraction(s.strip())
    if isinstance(s, float):
        return mpmath.mpf(s)
    if isinstance(s, (list, tuple)) and len(s) == 2:
        return mpmath.mpc(mpmath.mpf(str(s[0])), mpmath.mpf(str(s[1])))
    if isinstance(s, dict) and "cyclotomic" in s:
        return Cyclotomic({int(k): Fraction(str(c)) for k, c in s["terms"]}, int(s["cyclotomic"]))
    raise ValueError(f"cannot parse scalar {s!r}")


def format_scalar(x, digits: int | None = None):
    """JSON form: ``"p/q"`` for rationals, ``[re, im]`` decimal strings otherwise."""
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, Cyclotomic) and x.is_rational():
        return format_scalar(x.as_rational())
    z = cnum(x)
    d = digits or mpmath.mp.dps
    return [_fmt_real(z.real, d), _fmt_real(z.imag, d)]


def _fmt_real(v, digits: int) -> str:
    if v == 0:
        return "0"
    return mpmath.nstr(v, digits, min_fixed=-5, max_fixed=5, strip_zeros=True)


def rationalize(x, max_den: int = 10**6, tol: float = 1e-20) -> Fraction:
    """Best rational approximation of a real number, checked to ``tol``."""
    v = numeric(x)
    if isinstance(v, mpmath.mpc):
        if abs(v.imag) > tol:
            raise ValueError("not real")
        v = v.real
    f = Fraction(str(mpmath.nstr(v, 40, strip_zeros=False))).limit_denominator(max_den)
    if abs(numeric(f) - v) > tol:
        raise ValueError(f"{v} is not a rational with denominator <= {max_den}")
    return f


# --------------------------------------------------------------------------
# dense matrices over any scalar flavour

def zeros(*shape) -> np.ndarray:
    a = np.empty(shape, dtype=object)
    a.fill(Fraction(0))
    return a


def identity(n: int) -> np.ndarray:
    a = zeros(n, n)
    for i in range(n):
        a[i, i] = Fraction(1)
    return a


def as_matrix(rows) -> np.ndarray:
    rows = [list(r) for r in rows]
    a = zeros(len(rows), len(rows[0]) if rows else 0)
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            a[i, j] = v
    return a


def as_vector(vals) -> np.ndarray:
    vals = list(vals)
    a = zeros(len(vals))
    for i, v in enumerate(vals):
        a[i] = v
    return a


def to_numeric(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = cnum(v)
    return out


def max_abs(a) -> Any:
    if isinstance(a, np.ndarray):
        vals = [absval(v) for v in a.flat]
        return max((numeric(v) for v in vals), default=mpmath.mpf(0))
    return numeric(absval(a))


def all_exact(a: np.ndarray) -> bool:
    return all(is_exact(v) for v in a.flat)


def _pivot_tol(a: np.ndarray):
    return mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))


def row_reduce(a: np.ndarray, tol=None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns.

    Exact matrices are reduced exactly; otherwise pivots are chosen by
    magnitude and entries below ``tol`` count as zero.
    """
    a = a.copy()
    exact = all_exact(a)
    if not exact:
        a = to_numeric(a)
        tol = _pivot_tol(a) if tol is None else tol
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        if exact:
            piv = next((i for i in range(r, rows) if a[i, c] != 0), None)
        else:
            best = max(range(r, rows), key=lambda i: abs(a[i, c]))
            piv = best if abs(a[best, c]) > tol else None
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        inv = 1 / a[r, c]
        a[r] = a[r] * inv
        for i in range(rows):
            if i != r and not (a[i, c] == 0):
                a[i] = a[i] - a[i, c] * a[r]
        pivots.append(c)
        r += 1
    if not exact:
        for idx, v in np.ndenumerate(a):
            if abs(v) <= tol:
                a[idx] = mpmath.mpc(0)
    return a, pivots


def rank(a: np.ndarray, tol=None) -> int:
    if a.size == 0:
        return 0
    return len(row_reduce(a, tol)[1])


def inverse(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if a.shape != (n, n):
        raise ShapeError("inverse of a non-square matrix")
    aug = np.concatenate([a, identity(n)], axis=1)
    red, piv = row_reduce(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return red[:, n:]


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return inverse(a) @ b


def nullspace(a: np.ndarray, tol=None) -> np.ndarray:
    """Columns spanning the kernel of ``a``."""
    rows, cols = a.shape
    if rows == 0:
        return identity(cols)
    red, piv = row_reduce(a, tol)
    free = [c for c in range(cols) if c not in piv]
    out = zeros(cols, len(free))
    for j, f in enumerate(free):
        out[f, j] = Fraction(1)
        for i, p in enumerate(piv):
            out[p, j] = -red[i, f]
    return out


def column_space_basis(a: np.ndarray, tol=None) -> np.ndarray:
    if a.shape[1] == 0:
        return a
    _, piv = row_reduce(a, tol)
    return a[:, piv]


def matrix_power(a: np.ndarray, k: int) -> np.ndarray:
    out = identity(a.shape[0])
    for _ in range(k):
        out = out @ a
    return out


def nilpotent_exp(a: np.ndarray, scale=1) -> np.ndarray:
    """exp(scale * a) for a nilpotent matrix ``a`` (series terminates)."""
    n = a.shape[0]
    term = identity(n)
    out = identity(n)
    for k in range(1, n + 1):
        term = (term @ a) * scale / k
        if all(is_zero(v, 0) for v in term.flat):
            break
        out = out + term
    return out


def unipotent_log(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    x = m - identity(n)
    out = zeros(n, n)
    power = identity(n)
    for k in range(1, n + 1):
        power = power @ x
        out = out + power * (Fraction((-1) ** (k + 1), k))
    return out


def close(a, b, tol: float = DEFAULT_TOLERANCE) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return bool(max_abs(np.asarray(a, dtype=object) - np.asarray(b, dtype=object)) <= tol)
    return abs(numeric(a) - numeric(b)) <= tol


# --------------------------------------------------------------------------
# univariate power series helpers (lists, lowest order first)

def ps_mul(a: Sequence, b: Sequence, n: int) -> list:
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x == 0:
            continue
        for j, y in enumerate(b[: n - i]):
            out[i + j] += x * y
    return out


def ps_exp(a: Sequence, n: int) -> list:
    """exp of a power series; the constant term is exponentiated numerically."""
    a = list(a) + [0] * max(0, n - len(a))
    c0 = a[0]
    out = [Fraction(0)] * n
    out[0] = Fraction(1)
    # f' = a' f  recursion; Fraction(1, k) keeps exact input exact
    for k in range(1, n):
        s = Fraction(0)
        for j in range(1, k + 1):
            s += j * a[j] * out[k - j]
        out[k] = s * Fraction(1, k)
    if c0 != 0:
        e = mpmath.exp(numeric(c0))
        out = [e * v for v in out]
    return out


def ps_log1p(w: Sequence, n: int) -> list:
    """log(1 + w) for a power series ``w`` without constant term."""
    if n and w and w[0] != 0:
        raise DomainError("log1p needs a series without constant term")
    out = [Fraction(0)] * n
    power = [Fraction(1)] + [Fraction(0)] * (n - 1)
    for k in range(1, n):
        power = ps_mul(power, w, n)
        if not any(power):
            break
        sign = Fraction(1 if k % 2 else -1, k)
        out = [o + sign * p for o, p in zip(out, power)]
    return out


def loggamma_taylor(f, k_max: int) -> list:
    """Coefficients of log Gamma(1 - f + x) up to x^k_max."""
    f = Fraction(f) if is_exact(f) else f
    if not (0 <= numeric(f) < 1):
        raise DomainError(f"f={f} outside [0,1)")
    s = 1 - numeric(f)
    out = [mpmath.loggamma(s)]
    for k in range(1, k_max + 1):
        out.append(mpmath.psi(k - 1, s) / mpmath.factorial(k))
    return out


def gamma_taylor(f, k_max: int) -> list:
    """Taylor coefficients c_k of Gamma(1 - f + x) = sum c_k x^k."""
    if k_max < 0:
        raise DomainError("k_max must be non-negative")
    lg = loggamma_taylor(f, k_max)
    return ps_exp(lg, k_max + 1)


# --------------------------------------------------------------------------
# truncated series

def _cmul(a, b):
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray) and a.ndim >= 1 and b.ndim >= 1:
        if a.ndim == 1 and b.ndim == 1:
            raise ShapeError("vector times vector is ambiguous")
        return a @ b
    return a * b


def _zkey(k):
    k = Fraction(k)
    return k.numerator if k.denominator == 1 else k


def _coeff_zero(c) -> bool:
    if isinstance(c, np.ndarray):
        return all(is_zero(v, 0) for v in c.flat)
    return is_zero(c, 0)


@dataclass(frozen=True)
class SeriesSpace:
    """Shape of a truncated series: variables, weights, total order, z-window."""

    variables: tuple[str, ...]
    order: int
    z_lo: int
    z_hi: int
    weights: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.weights:
            object.__setattr__(self, "weights", (1,) * len(self.variables))
        if len(self.weights) != len(self.variables):
            raise ShapeError("one weight per variable")

    def degree(self, exps: tuple[int, ...]) -> int:
        return sum(w * e for w, e in zip(self.weights, exps))

    def keeps(self, exps, zpow) -> bool:
        return self.degree(exps) <= self.order and -self.z_lo <= zpow <= self.z_hi

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def with_window(self, z_lo: int | None = None, z_hi: int | None = None) -> "SeriesSpace":
        return SeriesSpace(self.variables, self.order,
                           self.z_lo if z_lo is None else z_lo,
                           self.z_hi if z_hi is None else z_hi, self.weights)


class TruncatedSeries:
    """Multivariate power series in named variables, Laurent in z.

    ``terms`` maps ``(exponents, zpower)`` to a coefficient, which is a scalar
    or a numpy object array (vector or matrix).  Products of matrix-valued
    coefficients use matrix multiplication in the written order.  Monomials
    whose weighted degree exceeds ``order`` or whose z-power leaves the window
    are dropped.
    """

    __slots__ = ("space", "terms")
    __array_ufunc__ = None  # keep numpy from broadcasting over us

    def __init__(self, space: SeriesSpace, terms: Mapping | None = None):
        kept = {}
        for (exps, zp), c in (terms or {}).items():
            exps = tuple(exps)
            zp = _zkey(zp)
            if len(exps) != len(space.variables):
                raise ShapeError("exponent length mismatch")
            if not space.keeps(exps, zp) or _coeff_zero(c):
                continue
            kept[(exps, zp)] = c
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "terms", dict(sorted(kept.items(), key=lambda kv: (kv[0][0], kv[0][1]))))

    def __setattr__(self, *_):
        raise AttributeError("TruncatedSeries is immutable")

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, space: SeriesSpace, c) -> "TruncatedSeries":
        return cls(space, {((0,) * len(space.variables), 0): c})

    @classmethod
    def monomial(cls, space: SeriesSpace, exps: Mapping[str, int] | None = None,
                 zpow=0, c=Fraction(1)) -> "TruncatedSeries":
        e = [0] * len(space.variables)
        for name, k in (exps or {}).items():
            e[space.index(name)] = k
        return cls(space, {(tuple(e), zpow): c})

    @classmethod
    def variable(cls, space: SeriesSpace, name: str) -> "TruncatedSeries":
        return cls.monomial(space, {name: 1})

    # basic protocol -------------------------------------------------------
    def __repr__(self):
        return f"TruncatedSeries({len(self.terms)} terms, {self.space})"

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def coefficient(self, exps: Mapping[str, int] | tuple | None = None, zpow=0, default=Fraction(0)):
        if not isinstance(exps, tuple):
            e = [0] * len(self.space.variables)
            for name, k in (exps or {}).items():
                e[self.space.index(name)] = k
            exps = tuple(e)
        return self.terms.get((exps, _zkey(zpow)), default)

    def is_zero(self, tol: float | None = None) -> bool:
        if tol is None:
            return not self.terms
        return self.max_abs() <= tol

    def max_abs(self):
        return max((max_abs(c) for c in self.terms.values()), default=mpmath.mpf(0))

    def _check(self, other: "TruncatedSeries"):
        if not isinstance(other, TruncatedSeries):
            raise TypeError("expected TruncatedSeries")
        if other.space != self.space:
            raise ShapeError(f"incompatible series spaces {self.space} vs {other.space}")

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.space, other)
        self._check(other)
        d = dict(self.terms)
        for k, c in other.terms.items():
            d[k] = d[k] + c if k in d else c
        return TruncatedSeries(self.space, d)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.space, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return TruncatedSeries(self.space, {k: _cmul(c, other) for k, c in self.terms.items()})

    def __rmul__(self, other):
        return TruncatedSeries(self.space, {k: _cmul(other, c) for k, c in self.terms.items()})

    __matmul__ = __mul__
    __rmatmul__ = __rmul__

    def __truediv__(self, scalar):
        return TruncatedSeries(self.space, {k: c / scalar for k, c in self.terms.items()})

    def map(self, fn: Callable[[Any], Any]) -> "TruncatedSeries":
        return TruncatedSeries(self.space, {k: fn(c) for k, c in self.terms.items()})

    def map_terms(self, fn: Callable[[tuple, Any, Any], Any]) -> "TruncatedSeries":
        return TruncatedSeries(self.space, {(e, z): fn(e, z, c) for (e, z), c in self.terms.items()})

    # ring maps in z ---------------------------------------------------------
    def z_negate(self) -> "TruncatedSeries":
        """The substitution z -> -z (integral z-powers only)."""
        out = {}
        for (e, z), c in self.terms.items():
            if not isinstance(z, int):
                raise DomainError("z -> -z is ambiguous on fractional powers; use z_rotate")
            out[(e, z)] = -c if z % 2 else c
        return TruncatedSeries(self.space, out)

    def z_rotate(self, turns=Fraction(1, 2)) -> "TruncatedSeries":
        """The substitution z -> exp(2 pi i turns) z with the principal branch."""
        out = {}
        for (e, z), c in self.terms.items():
            ph = Fraction(z) * Fraction(turns)
            if ph.denominator == 1:
                f = -1 if ph.numerator % 2 else 1
                out[(e, z)] = -c if f == -1 else c
            elif ph.denominator == 2:
                out[(e, z)] = c * mpmath.mpc(0, 1 if (ph.numerator % 4) == 1 else -1)
            else:
                out[(e, z)] = c * mpmath.expjpi(2 * numeric(ph))
        return TruncatedSeries(self.space, out)

    def z_shift(self, k) -> "TruncatedSeries":
        """Multiply by z^k, discarding terms that leave the window."""
        return TruncatedSeries(self.space, {(e, Fraction(z) + Fraction(k)): c for (e, z), c in self.terms.items()})

    def z_part(self, zpow) -> "TruncatedSeries":
        """Terms with the given z-power, moved to z^0."""
        zpow = _zkey(zpow)
        return TruncatedSeries(self.space, {(e, 0): c for (e, z), c in self.terms.items() if z == zpow})

    def z_powers(self) -> list:
        return sorted({z for (_, z) in self.terms})

    # calculus -----------------------------------------------------------------
    def derivative(self, name: str) -> "TruncatedSeries":
        i = self.space.index(name)
        out = {}
        for (e, z), c in self.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[(ne, z)] = c * e[i]
        return TruncatedSeries(self.space, out)

    def euler(self, name: str) -> "TruncatedSeries":
        """x d/dx for the variable ``name``."""
        i = self.space.index(name)
        return self.map_terms(lambda e, z, c: c * e[i])

    def z_euler(self) -> "TruncatedSeries":
        """z d/dz."""
        return self.map_terms(lambda e, z, c: c * z)

    def degree_part(self, degree: int) -> "TruncatedSeries":
        return TruncatedSeries(self.space, {k: c for k, c in self.terms.items()
                                            if self.space.degree(k[0]) == degree})

    def exp(self) -> "TruncatedSeries":
        """exp of a series whose every term is nilpotent under truncation."""
        shape = None
        for c in self.terms.values():
            if isinstance(c, np.ndarray):
                shape = c.shape
        one = identity(shape[0]) if shape else Fraction(1)
        out = TruncatedSeries.constant(self.space, one)
        term = out
        for k in range(1, 10_000):
            term = term * self / k
            if not term.terms:
                return out
            out = out + term
        raise ArithmeticError("exp did not terminate; argument is not nilpotent")

    def evaluate(self, values: Mapping[str, Any], z=None):
        """Sum the series at numeric variable values (and z, if given)."""
        total = None
        for (e, zp), c in self.terms.items():
            w = Fraction(1)
            for name, k in zip(self.space.variables, e):
                if k:
                    w = w * numeric(values[name]) ** k
            if z is not None:
                w = w * mpmath.power(numeric(z), numeric(Fraction(zp)))
            elif zp != 0:
                raise DomainError("z-dependent series needs a value for z")
            total = c * w if total is None else total + c * w
        return Fraction(0) if total is None else total

    def restrict(self, zero: Iterable[str]) -> "TruncatedSeries":
        """Set the listed variables to zero."""
        idx = [self.space.index(n) for n in zero]
        return TruncatedSeries(self.space, {k: c for k, c in self.terms.items() if all(k[0][i] == 0 for i in idx)})

    def entry(self, *index) -> "TruncatedSeries":
        return self.map(lambda c: c[index])

    def allclose(self, other: "TruncatedSeries", tol: float = DEFAULT_TOLERANCE) -> bool:
        return (self - other).max_abs() <= tol

    def to_json(self) -> list:
        out = []
        for (e, z), c in self.terms.items():
            mono = {v: k for v, k in zip(self.space.variables, e) if k}
            if isinstance(c, np.ndarray):
                val = np.vectorize(format_scalar, otypes=[object])(c).tolist()
            else:
                val = format_scalar(c)
            out.append({"monomial": mono, "z": format_scalar(Fraction(z)), "coeff": val})
        return out


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Truncated product; both operands must share variables, order and window."""
    a._check(b)
    sp = a.space
    out: dict = {}
    bterms = list(b.terms.items())
    for (ea, za), ca in a.terms.items():
        da = sp.degree(ea)
        if da > sp.order:
            continue
        for (eb, zb), cb in bterms:
            if da + sp.degree(eb) > sp.order:
                continue
            z = za + zb
            if not (-sp.z_lo <= z <= sp.z_hi):
                continue
            key = (tuple(x + y for x, y in zip(ea, eb)), _zkey(z))
            p = _cmul(ca, cb)
            out[key] = out[key] + p if key in out else p
    return TruncatedSeries(sp, out)


def laurent_split(v: TruncatedSeries) -> tuple[TruncatedSeries, TruncatedSeries]:
    """(strictly negative z-powers, the rest)."""
    minus = {k: c for k, c in v.terms.items() if k[1] < 0}
    plus = {k: c for k, c in v.terms.items() if k[1] >= 0}
    return TruncatedSeries(v.space, minus), TruncatedSeries(v.space, plus)


def transpose_series(s: TruncatedSeries) -> TruncatedSeries:
    return s.map(lambda c: c.T.copy())
