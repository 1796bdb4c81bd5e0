"""Spectral graph filters.

A :class:`FilterSpec` describes a filter in one of four forms: per-index
coefficients, a polynomial in the shift, a ratio of polynomials, or a
polynomial in the Cayley transform ``C(x) = (x - i)/(x + i)`` of the shift.
Filters can be applied through the eigendecomposition (:func:`apply_exact`)
or, for the three functional forms, purely with matrix products and linear
solves (:func:`apply_spatial`).

The module also handles the Cayley expansion of an arbitrary scalar
response: :func:`cayley_fourier` computes the circle Fourier coefficients of
``q = g o C^-1`` by midpoint quadrature, and :func:`pad_response` turns a
response that only matters on a band (e.g. a polynomial) into a smooth
compactly supported one whose expansion converges quickly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DecayFlagMissing,
    DimensionMismatch,
    InputError,
    NoScalarResponse,
    NoSpatialForm,
    PoleAtEigenvalue,
    PoleAtLambda,
    QuadratureUnderResolved,
    SingularDenominator,
    SingularMatrix,
    WrongVariant,
)
from .linalg import EigenDecomposition, cayley_of_operator, eig_symmetric, solve_complex

VARIANTS = ("per_index", "polynomial", "rational", "cayley")
POLE_RTOL = 1e-14
DEFAULT_QUADRATURE = 4096
DEFAULT_ARC_FRACTION = 0.8


def _coeff_tuple(values, name: str) -> tuple[complex, ...]:
    arr = np.atleast_1d(np.asarray(values, dtype=complex))
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"{name} must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite")
    return tuple(complex(v) for v in arr)


@dataclass(frozen=True)
class FilterSpec:
    """Immutable filter description.

    ``coeffs`` holds, depending on ``variant``: the per-index response
    (length N), polynomial coefficients in ascending powers of the shift,
    the numerator of a rational response, or coefficients of ascending
    powers of the Cayley transform. ``den`` is only used by ``rational``;
    ``real_part`` only by ``cayley``.
    """

    variant: str
    coeffs: tuple[complex, ...]
    den: tuple[complex, ...] | None = None
    real_part: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InputError(f"unknown filter variant {self.variant!r}; expected one of {VARIANTS}")
        object.__setattr__(self, "coeffs", _coeff_tuple(self.coeffs, "coeffs"))
        if self.variant == "rational":
            if self.den is None:
                raise InputError("rational filter needs a denominator")
            den = _coeff_tuple(self.den, "den")
            if not any(d != 0 for d in den):
                raise InputError("rational denominator is identically zero")
            object.__setattr__(self, "den", den)
        elif self.den is not None:
            raise InputError(f"{self.variant} filter takes no denominator")
        if self.real_part and self.variant != "cayley":
            raise InputError("real_part only applies to cayley filters")
        object.__setattr__(self, "real_part", bool(self.real_part))

    @classmethod
    def per_index(cls, g) -> FilterSpec:
        return cls("per_index", g)

    @classmethod
    def polynomial(cls, c) -> FilterSpec:
        return cls("polynomial", c)

    @classmethod
    def rational(cls, num, den) -> FilterSpec:
        return cls("rational", num, den)

    @classmethod
    def cayley(cls, c, real_part: bool = False) -> FilterSpec:
        return cls("cayley", c, real_part=real_part)

    @property
    def order(self) -> int:
        if self.variant == "per_index":
            return 0
        degs = [len(self.coeffs) - 1]
        if self.den is not None:
            degs.append(len(self.den) - 1)
        return max(degs)

    @property
    def is_real(self) -> bool:
        """True when the response is real-valued on the real line."""
        if self.variant == "cayley":
            return self.real_part or (all(c == 0 for c in self.coeffs[1:]) and self.coeffs[0].imag == 0)
        vals = self.coeffs + (self.den or ())
        return all(v.imag == 0 for v in vals)

    def to_json(self) -> dict:
        out = {"variant": self.variant, "coeffs": [[c.real, c.imag] for c in self.coeffs]}
        if self.den is not None:
            out["den"] = [[d.real, d.imag] for d in self.den]
        if self.variant == "cayley":
            out["real_part"] = self.real_part
        return out

    @classmethod
    def from_json(cls, obj: dict) -> FilterSpec:
        def parse(pairs, name):
            try:
                return [complex(float(re), float(im)) for re, im in pairs]
            except (TypeError, ValueError) as exc:
                raise InputError(f"{name} must be a list of [re, im] pairs") from exc

        if not isinstance(obj, dict) or "variant" not in obj or "coeffs" not in obj:
            raise InputError("filter JSON needs 'variant' and 'coeffs'")
        den = parse(obj["den"], "den") if obj.get("den") is not None else None
        return cls(
            obj["variant"],
            parse(obj["coeffs"], "coeffs"),
            den,
            bool(obj.get("real_part", False)),
        )


# -- scalar evaluation ------------------------------------------------------


def cayley_scalar(lam):
    lam = np.asarray(lam, dtype=float)
    return (lam - 1j) / (lam + 1j)


def _horner(coeffs, x):
    y = np.full(np.shape(x), coeffs[-1], dtype=complex)
    for c in reversed(coeffs[:-1]):
        y = y * x + c
    return y


def _rational_values(spec: FilterSpec, lam, error):
    num = _horner(spec.coeffs, lam)
    den = _horner(spec.den, lam)
    scale = _horner(np.abs(np.asarray(spec.den)), np.abs(lam)).real
    bad = np.abs(den) <= POLE_RTOL * np.maximum(scale, 1.0)
    if np.any(bad):
        where = np.asarray(lam)[bad] if np.ndim(lam) else lam
        raise error(f"rational denominator vanishes at lambda = {complex(np.ravel(where)[0]).real:.6g}")
    return num / den


def evaluate_scalar(spec: FilterSpec, lam):
    """Scalar response g(lam); accepts a float or an array of floats."""
    lam_arr = np.asarray(lam, dtype=float)
    if spec.variant == "per_index":
        raise NoScalarResponse("per-index filters have no scalar response")
    if spec.variant == "polynomial":
        out = _horner(spec.coeffs, lam_arr)
    elif spec.variant == "rational":
        out = _rational_values(spec, lam_arr, PoleAtLambda)
    else:
        out = _horner(spec.coeffs, cayley_scalar(lam_arr))
        if spec.real_part:
            out = out.real.astype(complex)
    return complex(out) if np.ndim(out) == 0 else out


def spectral_coefficients(spec: FilterSpec, eigenvalues: np.ndarray) -> np.ndarray:
    """Multiplier applied to each eigenvector (g_n or g(lambda_n))."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if spec.variant == "per_index":
        if len(spec.coeffs) != eigenvalues.size:
            raise DimensionMismatch(
                f"per-index filter has {len(spec.coeffs)} coefficients for {eigenvalues.size} eigenvalues"
            )
        return np.asarray(spec.coeffs, dtype=complex)
    if spec.variant == "rational":
        return _rational_values(spec, eigenvalues, PoleAtEigenvalue)
    return np.asarray(evaluate_scalar(spec, eigenvalues), dtype=complex)


# -- application paths ------------------------------------------------------


def _shift_matrix(s) -> np.ndarray:
    return np.asarray(getattr(s, "matrix", s), dtype=float)


def _check_signal(f, n: int) -> np.ndarray:
    f = np.asarray(f)
    if f.ndim not in (1, 2) or f.shape[0] != n:
        raise DimensionMismatch(f"signal with leading dimension {f.shape[:1]} for a {n}-vertex shift")
    return f


def _realify(spec: FilterSpec, f: np.ndarray, out: np.ndarray) -> np.ndarray:
    if spec.is_real and not np.iscomplexobj(f):
        return out.real
    return out


def apply_exact(spec: FilterSpec, s, f, eig: EigenDecomposition | None = None) -> np.ndarray:
    """sum_n coef_n <f, phi_n> phi_n via the eigendecomposition of the shift.

    ``f`` may be a single signal of length N or an N x k block of signals.
    """
    d = _shift_matrix(s)
    f = _check_signal(f, d.shape[0])
    eig = eig or eig_symmetric(d)
    coef = spectral_coefficients(spec, eig.eigenvalues)
    v = eig.eigenvectors
    spectrum = v.T @ f
    spectrum = spectrum * (coef if f.ndim == 1 else coef[:, None])
    return _realify(spec, f, v @ spectrum)


def _horner_apply(coeffs, op, f):
    y = coeffs[-1] * f
    for c in reversed(coeffs[:-1]):
        y = op @ y + c * f
    return y


def apply_spatial(spec: FilterSpec, s, f) -> np.ndarray:
    """Apply the filter with products and solves only (no eigendecomposition)."""
    d = _shift_matrix(s)
    n = d.shape[0]
    f = _check_signal(f, n)
    fc = f.astype(complex)
    if spec.variant == "per_index":
        raise NoSpatialForm("per-index filters need the eigendecomposition")
    if spec.variant == "polynomial":
        out = _horner_apply(spec.coeffs, d, fc)
    elif spec.variant == "rational":
        u = _horner_apply(spec.coeffs, d, fc)
        den = spec.den[-1] * np.eye(n, dtype=complex)
        for c in reversed(spec.den[:-1]):
            den = d @ den + c * np.eye(n)
        try:
            out = solve_complex(den, u)
        except SingularMatrix as exc:
            raise SingularDenominator(str(exc)) from exc
    else:
        cay = cayley_of_operator(d)
        out = _horner_apply(spec.coeffs, cay, fc)
        if spec.real_part:
            if np.iscomplexobj(f):
                # Re g acts as (g(D) + conj(g)(D)) / 2 and conj(g)(D) f = conj(g(D) conj(f))
                out = 0.5 * (out + _horner_apply(spec.coeffs, cay, fc.conj()).conj())
            else:
                out = out.real.astype(complex)
    return _realify(spec, f, out)


def filter_matrix(spec: FilterSpec, s, eig: EigenDecomposition | None = None) -> np.ndarray:
    """g(D) = V diag(coef) V^T."""
    eig = eig or eig_symmetric(_shift_matrix(s))
    coef = spectral_coefficients(spec, eig.eigenvalues)
    v = eig.eigenvectors
    m = (v * coef) @ v.T
    return m.real if spec.is_real else m


def spatial_matrix(spec: FilterSpec, s) -> np.ndarray:
    """g(D) materialized through :func:`apply_spatial` on the identity."""
    n = _shift_matrix(s).shape[0]
    return apply_spatial(spec, s, np.eye(n))


# -- Cayley expansions ------------------------------------------------------


def cayley_seminorm(spec: FilterSpec) -> float:
    """sum_{l >= 1} l |c_l| (the constant term does not contribute)."""
    if spec.variant != "cayley":
        raise WrongVariant(f"seminorm is defined for cayley filters, got {spec.variant}")
    c = np.abs(np.asarray(spec.coeffs))
    return float(np.sum(np.arange(c.size) * c))


def cayley_angle(lam):
    """Argument of C(lam) in (0, 2 pi): pi + 2 arctan(lam)."""
    return np.pi + 2.0 * np.arctan(np.asarray(lam, dtype=float))


def lambda_of_angle(theta):
    """Inverse of :func:`cayley_angle`: the real lam with C(lam) = exp(i theta)."""
    return np.tan(0.5 * (np.asarray(theta, dtype=float) - np.pi))


@dataclass(frozen=True)
class ScalarResponse:
    """A real-to-complex response g together with its behaviour at infinity.

    ``decays`` declares g(lam) -> 0 as |lam| -> inf. ``limit`` declares a
    common nonzero limit instead; either makes ``q = g o C^-1`` continuous
    at z = 1, which is what the Cayley projection needs.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    decays: bool = False
    limit: complex | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.decays and self.limit not in (None, 0):
            raise InputError("a decaying response has limit 0")
        if self.has_limit:
            self._check_limit()

    @property
    def has_limit(self) -> bool:
        return self.decays or self.limit is not None

    @property
    def at_infinity(self) -> complex:
        return 0j if self.decays else complex(self.limit)

    def __call__(self, lam) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(lam, dtype=float)), dtype=complex)

    def _check_limit(self):
        theta = 2 * np.pi * (np.arange(1024) + 0.5) / 1024
        peak = float(np.max(np.abs(self(lambda_of_angle(theta)))))
        # decay is checked at +-1e6; a nonzero limit is approached like 1/lam, so further out
        far = 1e6 if self.decays else 1e9
        gap = np.abs(self(np.array([-far, far])) - self.at_infinity)
        if np.max(gap) > 1e-6 * max(peak, abs(self.at_infinity), 1e-300):
            kind = "decay" if self.decays else f"limit {self.at_infinity}"
            raise InputError(f"response does not reach its declared {kind} at infinity")


def smooth_step(u):
    """C-infinity step: 1 for u <= 0, 0 for u >= 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)

    def bump(v):
        out = np.zeros_like(v)
        pos = v > 0
        out[pos] = np.exp(-1.0 / v[pos])
        return out

    a, b = bump(1.0 - u), bump(u)
    return a / (a + b)


def pad_response(
    fn: Callable[[np.ndarray], np.ndarray],
    band: tuple[float, float],
    transition: float | None = None,
    arc_fraction: float = DEFAULT_ARC_FRACTION,
) -> ScalarResponse:
    """Smooth compactly supported response equal to ``fn`` on ``band``.

    Outside ``[a, b]`` the response is ``fn`` times a C-infinity window that
    falls to zero over ``[b, b + transition]`` (and ``[a - transition, a]``).
    The window is parametrized by the Cayley angle of lam so that it is
    equally smooth as a function on the circle. Without ``transition`` the
    window spans ``arc_fraction`` of the arc between each band edge and the
    point at infinity.
    """
    a, b = float(band[0]), float(band[1])
    if not a < b:
        raise InputError(f"band must satisfy a < b, got {band}")
    ta, tb = cayley_angle(a), cayley_angle(b)
    if transition is None:
        if not 0 < arc_fraction < 1:
            raise InputError("arc_fraction must lie in (0, 1)")
        end_l = ta * (1.0 - arc_fraction)
        end_r = tb + arc_fraction * (2 * np.pi - tb)
        tau_l, tau_r = float(a - lambda_of_angle(end_l)), float(lambda_of_angle(end_r) - b)
    else:
        if not transition > 0:
            raise InputError(f"transition must be positive, got {transition}")
        tau_l = tau_r = float(transition)
        end_l, end_r = cayley_angle(a - tau_l), cayley_angle(b + tau_r)

    def window(lam):
        th = cayley_angle(lam)
        w = np.ones_like(th)
        right, left = lam > b, lam < a
        w[right] = smooth_step((th[right] - tb) / (end_r - tb))
        w[left] = smooth_step((ta - th[left]) / (ta - end_l))
        return w

    def padded(lam):
        lam = np.asarray(lam, dtype=float)
        w = window(np.atleast_1d(lam)).reshape(lam.shape)
        out = np.zeros(lam.shape, dtype=complex)
        live = w > 0
        out[live] = np.asarray(fn(lam[live]), dtype=complex) * w[live]
        return out

    meta = {"band": [a, b], "transition_left": tau_l, "transition_right": tau_r}
    return ScalarResponse(padded, decays=True, meta=meta)


def pad_polynomial(coeffs, band, transition: float | None = None, **kw) -> ScalarResponse:
    """Polynomial (ascending coefficients) padded outside ``band``."""
    coeffs = _coeff_tuple(coeffs, "coeffs")
    resp = pad_response(lambda lam: _horner(coeffs, lam), band, transition, **kw)
    resp.meta["polynomial"] = [[c.real, c.imag] for c in coeffs]
    return resp


def response_of(spec: FilterSpec) -> ScalarResponse:
    """The scalar response of a spec, with its limit at infinity when one exists."""
    if spec.variant == "per_index":
        raise NoScalarResponse("per-index filters have no scalar response")
    fn = lambda lam: evaluate_scalar(spec, lam)  # noqa: E731
    limit = None
    if spec.variant == "cayley":
        limit = sum(spec.coeffs)  # C(lam) -> 1 at both ends
        if spec.real_part:
            limit = complex(limit.real)
    elif spec.variant == "polynomial":
        if all(c == 0 for c in spec.coeffs[1:]):
            limit = spec.coeffs[0]
    else:
        num = np.trim_zeros(np.asarray(spec.coeffs), "b")
        den = np.trim_zeros(np.asarray(spec.den), "b")
        roots = np.roots(den[::-1]) if den.size > 1 else np.array([])
        real_pole = np.any(np.abs(roots.imag) <= 1e-12 * (1 + np.abs(roots)))
        if not real_pole and num.size <= den.size:
            limit = num[-1] / den[-1] if num.size == den.size else 0j
    if limit is not None and limit == 0:
        return ScalarResponse(fn, decays=True)
    return ScalarResponse(fn, limit=limit)


@dataclass(frozen=True)
class CayleyFourier:
    """Two-sided Fourier coefficients of q on the circle, orders -L..L."""

    orders: np.ndarray
    coeffs: np.ndarray

    @property
    def L(self) -> int:
        return int(self.orders[-1])

    def coefficient(self, l: int) -> complex:
        return complex(self.coeffs[l + self.L])

    @property
    def seminorm(self) -> float:
        """sum over l != 0 of |l| |c_l|."""
        return float(np.sum(np.abs(self.orders) * np.abs(self.coeffs)))

    def tail_estimate(self) -> float:
        """Extrapolated seminorm mass beyond order L.

        Fits a power law to l (|c_l| + |c_-l|) over the last quarter of
        orders and sums it from L+1 to infinity. Returns 0 when that range
        is already at rounding level and inf when the fit does not decay
        faster than 1/l.
        """
        L = self.L
        if L < 8:
            return math.inf
        l = np.arange(1, L + 1)
        mass = l * (np.abs(self.coeffs[L + 1 :]) + np.abs(self.coeffs[L - 1 :: -1]))
        floor = 1e-13 * max(float(np.max(np.abs(self.coeffs))), 1e-300)
        lo = (3 * L) // 4
        ls, ms = l[lo - 1 :], mass[lo - 1 :]
        keep = ms > floor * ls
        if keep.sum() < 3:
            return 0.0
        beta, alpha = np.polyfit(np.log(ls[keep]), np.log(ms[keep]), 1)
        if beta >= -1.0:
            return math.inf
        at_L = math.exp(alpha + beta * math.log(L))
        return float(at_L * L / (-beta - 1.0) * ((L + 0.5) / L) ** (beta + 1.0))


def _check_projection_args(g, L: int, M: int):
    if not isinstance(g, ScalarResponse) or not g.has_limit:
        raise DecayFlagMissing("the response must declare decay (or a limit) at infinity")
    if int(L) != L or L < 0:
        raise InputError(f"L must be a nonnegative integer, got {L}")
    if int(M) != M or M < max(8 * L, 1):
        raise QuadratureUnderResolved(f"need M >= 8 L quadrature points, got M={M}, L={L}")


def cayley_fourier(g: ScalarResponse, L: int, M: int = DEFAULT_QUADRATURE) -> CayleyFourier:
    """c_l = (1/M) sum_m q(e^{i t_m}) e^{-i l t_m}, t_m = 2 pi (m + 1/2) / M.

    q(e^{i t}) = g(i (1 + e^{i t}) / (1 - e^{i t})) = g(-cot(t / 2)); the
    midpoint nodes never hit t = 0, where lam is infinite.
    """
    _check_projection_args(g, L, M)
    L, M = int(L), int(M)
    theta = 2 * np.pi * (np.arange(M) + 0.5) / M
    q = g(lambda_of_angle(theta))
    if not np.all(np.isfinite(q)):
        raise InputError("response is not finite at every quadrature node")
    spectrum = np.fft.fft(q)
    orders = np.arange(-L, L + 1)
    coeffs = spectrum[orders % M] * np.exp(-1j * np.pi * orders / M) / M
    return CayleyFourier(orders, coeffs)


def cayley_project(
    g: ScalarResponse, L: int, M: int = DEFAULT_QUADRATURE, real: bool = False
) -> FilterSpec:
    """Cayley filter with the projected coefficients c_0..c_L.

    With ``real=True`` (for real-valued g) the negative orders are folded in
    through conjugate symmetry: the result is ``Re(c_0 + 2 sum c_l C^l)``.
    """
    fourier = cayley_fourier(g, L, M)
    c = fourier.coeffs[fourier.L :]
    if not real:
        return FilterSpec.cayley(c, real_part=False)
    folded = np.concatenate([[c[0].real], 2.0 * c[1:]])
    return FilterSpec.cayley(folded, real_part=True)


# -- reconstructed example filters -------------------------------------------


def lowpass_polynomial(lam_max: float, order: int = 3, lam_min: float = 0.0) -> FilterSpec:
    """Least-squares fit of exp(-2 lam / lam_max) on [lam_min, lam_max]."""
    x = np.linspace(lam_min, lam_max, 256)
    c = np.polynomial.polynomial.polyfit(x, np.exp(-2.0 * x / lam_max), order)
    return FilterSpec.polynomial(c)


def lowpass_cayley(lam_max: float, order: int = 3, lam_min: float = 0.0) -> FilterSpec:
    """Real-part Cayley filter fitted to exp(-2 lam / lam_max) on the band."""
    x = np.linspace(lam_min, lam_max, 256)
    z = cayley_scalar(x)
    cols = [np.ones_like(x)]
    for l in range(1, order + 1):
        zl = z**l
        cols += [zl.real, -zl.imag]
    sol, *_ = np.linalg.lstsq(np.column_stack(cols), np.exp(-2.0 * x / lam_max), rcond=None)
    c = [complex(sol[0])] + [complex(sol[2 * l - 1], sol[2 * l]) for l in range(1, order + 1)]
    return FilterSpec.cayley(c, real_part=True)


def allpass_arma(rho: float, order: int = 3) -> FilterSpec:
    """((1 - i lam / rho) / (1 + i lam / rho))^order, unit modulus on the real line."""
    if not rho > 0:
        raise InputError("rho must be positive")
    k = np.arange(order + 1)
    binom = np.array([math.comb(order, int(j)) for j in k], dtype=float)
    den = binom * (1j / rho) ** k
    return FilterSpec.rational(den.conj(), den)
