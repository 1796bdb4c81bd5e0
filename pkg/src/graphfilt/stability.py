"""Stability of functional-calculus filters under shift perturbations.

The central quantity is the Cayley bound

    ||g(D) - g(D')|| <= |g|_C ((||D|| + 1) ||E|| / (1 - ||E||) + ||E||),

valid for self-adjoint D' = D + E with ||E|| < 1. This module evaluates the
bound, measures the left side, checks each ingredient of its derivation on
concrete matrices, and runs perturbation sweeps.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneracyConstructionFailed, DimensionMismatch, InputError, PerturbationTooLarge
from .filters import (
    FilterSpec,
    apply_exact,
    apply_spatial,
    cayley_fourier,
    cayley_seminorm,
    filter_matrix,
    lowpass_cayley,
    pad_response,
    response_of,
    spectral_coefficients,
)
from .graph import (
    KINDS,
    MODES,
    Graph,
    Permutation,
    ShiftOperator,
    build_shift,
    gen_geometric_graph,
    permute_shift,
    permute_signal,
    perturb,
)
from .linalg import cayley_of_operator, eig_symmetric, resolvent_at_minus_i, spectral_norm
from .rng import derive_seed, make_rng

log = logging.getLogger(__name__)

CERT_RTOL = 1e-9
SEMINORM_ORDER = 64
SEMINORM_QUADRATURE = 8192
SEMINORM_TAIL_RTOL = 1e-3
SEMINORM_MAX_ORDER = 2048
# index reserved for the random-signal stream so it never collides with a trial
SIGNAL_STREAM = 0xFFFFFFFF


def _mat(s) -> np.ndarray:
    return np.asarray(getattr(s, "matrix", s), dtype=float)


def theorem1_bound(seminorm: float, norm_shift: float, norm_E: float) -> float:
    if not 0 <= norm_E < 1:
        raise PerturbationTooLarge(f"bound needs 0 <= ||E|| < 1, got {norm_E}")
    if seminorm < 0 or norm_shift < 0:
        raise InputError("seminorm and shift norm must be nonnegative")
    return seminorm * ((norm_shift + 1.0) * norm_E / (1.0 - norm_E) + norm_E)


def op_distance(spec: FilterSpec, s, s2) -> float:
    """||g(D) - g(D')|| in the spectral norm."""
    a, b = _mat(s), _mat(s2)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return spectral_norm(filter_matrix(spec, a) - filter_matrix(spec, b))


@dataclass(frozen=True)
class MarginReport:
    lhs: float
    rhs: float
    holds: bool

    @classmethod
    def of(cls, lhs: float, rhs: float, rtol: float = CERT_RTOL) -> MarginReport:
        return cls(float(lhs), float(rhs), bool(lhs <= rhs * (1.0 + rtol)))


@dataclass(frozen=True)
class EqualityReport:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def holds(self) -> bool:
        return self.residual <= CERT_RTOL * (1.0 + self.lhs)


def check_lemma1(B, D, l: int) -> MarginReport:
    """||B^l - D^l|| <= l C^(l-1) ||B - D|| with C = max(||B||, ||D||)."""
    B, D = _mat(B), _mat(D)
    if B.shape != D.shape:
        raise DimensionMismatch(f"shapes {B.shape} and {D.shape} differ")
    if l < 0:
        raise InputError("l must be nonnegative")
    if l == 0:
        return MarginReport.of(0.0, 0.0)
    C = max(spectral_norm(B), spectral_norm(D))
    lhs = spectral_norm(np.linalg.matrix_power(B, l) - np.linalg.matrix_power(D, l))
    rhs = l * C ** (l - 1) * spectral_norm(B - D)
    return MarginReport.of(lhs, rhs)


def check_lemma2(spec_f: FilterSpec, spec_g: FilterSpec, s) -> EqualityReport:
    """Operator norm of f(D) - g(D) versus the sup of |f - g| over the spectrum.

    The operator side is built with the spatial path, the sup side from the
    eigenvalues alone, so the two are computed independently.
    """
    d = _mat(s)
    eye = np.eye(d.shape[0])
    diff = apply_spatial(spec_f, d, eye) - apply_spatial(spec_g, d, eye)
    lam = eig_symmetric(d).eigenvalues
    gap = spectral_coefficients(spec_f, lam) - spectral_coefficients(spec_g, lam)
    return EqualityReport(spectral_norm(diff), float(np.max(np.abs(gap))))


def _perturbation_norm(s, s2) -> float:
    a, b = _mat(s), _mat(s2)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    e = spectral_norm(b - a)
    if e >= 1:
        raise PerturbationTooLarge(f"||E|| = {e} must be < 1")
    return e


def check_resolvent_bound(s, s2) -> MarginReport:
    """||(D + i)^-1 - (D' + i)^-1|| <= ||E|| / (1 - ||E||)."""
    e = _perturbation_norm(s, s2)
    lhs = spectral_norm(resolvent_at_minus_i(_mat(s)) - resolvent_at_minus_i(_mat(s2)))
    return MarginReport.of(lhs, e / (1.0 - e))


def check_cayley_contraction(s, s2) -> MarginReport:
    """||C(D) - C(D')|| <= (||D|| + 1) ||E|| / (1 - ||E||) + ||E||."""
    e = _perturbation_norm(s, s2)
    lhs = spectral_norm(cayley_of_operator(_mat(s)) - cayley_of_operator(_mat(s2)))
    return MarginReport.of(lhs, theorem1_bound(1.0, spectral_norm(_mat(s)), e))


def unitarity_residual(s) -> float:
    """max |C(D)^H C(D) - I|."""
    c = cayley_of_operator(_mat(s))
    return float(np.max(np.abs(c.conj().T @ c - np.eye(c.shape[0]))))


def check_equivariance(spec: FilterSpec, s, p: Permutation, f, method: str = "exact") -> float:
    """Relative gap between filtering a relabelled graph and relabelling the output."""
    if spec.variant == "per_index":
        raise InputError("equivariance is only checked for functional filters")
    if not isinstance(s, ShiftOperator):
        s = ShiftOperator(_mat(s), "adjacency")
    if p.n != s.n:
        raise DimensionMismatch(f"permutation of size {p.n} for a {s.n}-vertex shift")
    apply = apply_exact if method == "exact" else apply_spatial
    base = apply(spec, s, f)
    moved = apply(spec, permute_shift(s, p), permute_signal(f, p))
    num = np.linalg.norm(moved - permute_signal(base, p))
    den = np.linalg.norm(base)
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return float(num / den)


# -- seminorm for the bound ----------------------------------------------------


@dataclass(frozen=True)
class SeminormEstimate:
    value: float
    tail: float
    method: str
    details: dict = field(default_factory=dict)

    @property
    def upper(self) -> float:
        """Partial sum plus the extrapolated tail; what the bound uses."""
        return self.value + self.tail


def certified_seminorm(
    spec: FilterSpec,
    band: tuple[float, float] | None = None,
    L: int = SEMINORM_ORDER,
    M: int = SEMINORM_QUADRATURE,
    tail_rtol: float = SEMINORM_TAIL_RTOL,
    max_order: int = SEMINORM_MAX_ORDER,
) -> SeminormEstimate:
    """Cayley seminorm used in the bound for ``spec``.

    Cayley filters use their own coefficients. Responses with a common
    finite limit at +-inf (e.g. proper rational functions without real poles)
    are projected directly. Anything else (polynomials) is first padded
    outside ``band``, which must contain the spectra of every shift the
    filter is compared on.

    Projections start at order ``L`` and double it (with ``M``) until the
    tail estimate is below ``tail_rtol`` of the partial sum or ``max_order``
    is reached. ``details["L"]`` records the order actually used.
    """
    if spec.variant == "cayley":
        return SeminormEstimate(cayley_seminorm(spec), 0.0, "exact")
    resp = response_of(spec)
    details = {}
    if resp.has_limit:
        method = "projection"
    else:
        if band is None:
            raise InputError(f"{spec.variant} response has no limit at infinity; a band is needed to pad it")
        resp = pad_response(resp, band)
        method = "padded-projection"
        details.update(resp.meta)
    while True:
        fourier = cayley_fourier(resp, L, M)
        value, tail = fourier.seminorm, fourier.tail_estimate()
        if tail <= tail_rtol * value or 2 * L > max_order:
            break
        L, M = 2 * L, max(2 * M, 16 * L)
    if not math.isfinite(tail):
        log.warning("Cayley expansion of the %s filter has not converged at L=%d", spec.variant, L)
    details.update({"L": L, "M": M})
    return SeminormEstimate(value, tail, method, details)


# -- per-index instability ------------------------------------------------------


@dataclass(frozen=True)
class InstabilityReport:
    eigen_gap: float
    pair: tuple[int, int]
    norm_E: float
    seminorm: float
    bound: float
    functional_err: float
    per_index_err: float
    control_functional_err: float
    control_per_index_err: float
    control_min_gap: float

    @property
    def functional_within_bound(self) -> bool:
        return self.functional_err <= self.bound * (1 + CERT_RTOL)

    @property
    def per_index_over_bound(self) -> float:
        return self.per_index_err / self.bound

    @property
    def per_index_over_functional(self) -> float:
        return self.per_index_err / self.functional_err

    @property
    def control_rel_diff(self) -> float:
        return abs(self.control_per_index_err - self.control_functional_err) / self.control_functional_err


def _nudged_cycle(n: int, nudge: float) -> Graph:
    w = np.zeros((n, n))
    for i in range(n):
        j = (i + 1) % n
        w[i, j] = w[j, i] = 1.0
    w[0, 1] = w[1, 0] = 1.0 + nudge
    return Graph(w)


def per_index_instability_demo(
    n: int = 8, seed: int = 0, norm_E: float = 1e-4, coef_gap: float = 1.0, nudge: float = 1e-6
) -> InstabilityReport:
    """Per-index versus functional-calculus filters on a near-degenerate spectrum.

    A cycle has doubly degenerate Laplacian eigenvalues; nudging one edge
    weight splits each pair by O(nudge). The functional filter is a low-pass
    Cayley filter g. The per-index filter uses g(lambda_n) as well, except on
    the closest pair, whose two coefficients are pushed ``coef_gap`` apart.
    A perturbation larger than the gap rotates the pair's eigenvectors by an
    O(1) angle, which the per-index filter cannot follow.

    The control case repeats the comparison on a geometric graph with a
    well-separated spectrum, with a perturbation that is off-diagonal in the
    eigenbasis and identical per-index and functional responses.
    """
    if n < 4:
        raise InputError("n must be at least 4")
    s = build_shift(_nudged_cycle(n, nudge), "unnormalized")
    eig = eig_symmetric(s)
    gaps = np.diff(eig.eigenvalues)
    positive = np.flatnonzero(gaps > 0)
    if positive.size == 0:
        raise DegeneracyConstructionFailed("no split eigenvalue pair")
    k = int(positive[np.argmin(gaps[positive])])
    gap = float(gaps[k])
    if not 0 < gap <= 1e-6 or gap < 1e3 * np.finfo(float).eps * eig.eigenvalues[-1]:
        raise DegeneracyConstructionFailed(f"closest pair gap {gap:g} outside (0, 1e-6]")

    functional = lowpass_cayley(float(eig.eigenvalues[-1]))
    coef = spectral_coefficients(functional, eig.eigenvalues).real.copy()
    coef[k] -= 0.5 * coef_gap
    coef[k + 1] += 0.5 * coef_gap
    per_index = FilterSpec.per_index(coef)

    s2, pert = perturb(s, "dense-gaussian", norm_E, seed)
    seminorm = cayley_seminorm(functional)
    bound = theorem1_bound(seminorm, spectral_norm(s.matrix), pert.op_norm)
    fc_err = op_distance(functional, s, s2)
    pi_err = op_distance(per_index, s, s2)

    # control: separated spectrum, perturbation with zero diagonal in the eigenbasis
    for attempt in range(64):
        cs = build_shift(gen_geometric_graph(n, derive_seed(seed, attempt), 0.5), "unnormalized")
        ceig = eig_symmetric(cs)
        min_gap = float(np.min(np.diff(ceig.eigenvalues)))
        if min_gap >= 1e-2:
            break
    else:
        raise DegeneracyConstructionFailed("no well-separated control graph found")
    rng = make_rng(derive_seed(seed, SIGNAL_STREAM))
    k_off = rng.standard_normal((n, n))
    k_off = k_off + k_off.T
    np.fill_diagonal(k_off, 0.0)
    v = ceig.eigenvectors
    ce = v @ k_off @ v.T
    ce = 0.5 * (ce + ce.T)
    ce *= norm_E / spectral_norm(ce)
    cs2 = ShiftOperator(cs.matrix + ce, cs.kind)
    cfun = lowpass_cayley(float(ceig.eigenvalues[-1]))
    cper = FilterSpec.per_index(spectral_coefficients(cfun, ceig.eigenvalues).real)
    return InstabilityReport(
        eigen_gap=gap,
        pair=(k, k + 1),
        norm_E=pert.op_norm,
        seminorm=seminorm,
        bound=bound,
        functional_err=fc_err,
        per_index_err=pi_err,
        control_functional_err=op_distance(cfun, cs, cs2),
        control_per_index_err=op_distance(cper, cs, cs2),
        control_min_gap=min_gap,
    )


# -- sweeps ---------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    magnitudes: tuple[float, ...]
    trials_per_magnitude: int = 100
    mode: str = "dense-gaussian"
    base_seed: int = 0
    kind: str = "unnormalized"
    signal_source: str = "random"
    n_random_signals: int = 64
    workers: int = 1
    strict: bool = False

    def __post_init__(self):
        mags = tuple(float(m) for m in self.magnitudes)
        if not mags:
            raise InputError("at least one magnitude is required")
        if any(not 0 < m < 1 for m in mags):
            raise InputError("magnitudes must lie in (0, 1)")
        if any(b <= a for a, b in zip(mags, mags[1:])):
            raise InputError("magnitudes must be strictly ascending")
        object.__setattr__(self, "magnitudes", mags)
        if int(self.trials_per_magnitude) != self.trials_per_magnitude or self.trials_per_magnitude < 1:
            raise InputError("trials_per_magnitude must be a positive integer")
        if self.mode not in MODES:
            raise InputError(f"unknown mode {self.mode!r}")
        if self.kind not in KINDS:
            raise InputError(f"unknown kind {self.kind!r}")
        if self.signal_source not in ("random", "file"):
            raise InputError("signal_source must be 'random' or 'file'")
        if self.n_random_signals < 1 or self.workers < 1:
            raise InputError("n_random_signals and workers must be positive")


CSV_FIELDS = (
    "magnitude_target",
    "trial",
    "norm_E",
    "rel_norm_E",
    "norm_shift",
    "op_err",
    "bound",
    "seminorm",
    "mean_rel_signal_err",
    "max_rel_signal_err",
    "trial_seed",
)


@dataclass(frozen=True)
class StabilityRecord:
    magnitude_target: float
    trial: int
    norm_E: float
    rel_norm_E: float
    norm_shift: float
    op_err: float
    bound: float
    seminorm: float
    mean_rel_signal_err: float
    max_rel_signal_err: float
    trial_seed: int

    @property
    def certified(self) -> bool:
        return self.op_err <= self.bound * (1.0 + CERT_RTOL)


def random_signals(n: int, count: int, base_seed: int) -> np.ndarray:
    """``count`` standard normal signals (rows) from the sweep's signal stream."""
    return make_rng(derive_seed(base_seed, SIGNAL_STREAM)).standard_normal((count, n))


def sweep_band(s: ShiftOperator) -> tuple[float, float]:
    """Band containing the spectrum of every D + E with ||E|| < 1."""
    lam = eig_symmetric(s).eigenvalues
    return float(lam[0]) - 1.0, float(lam[-1]) + 1.0


def stability_sweep(
    g: Graph,
    spec: FilterSpec,
    cfg: SweepConfig,
    signals: np.ndarray | None = None,
    seminorm: SeminormEstimate | None = None,
) -> list[StabilityRecord]:
    """One record per (magnitude, trial), sorted by (magnitude, trial).

    Each trial is seeded by ``derive_seed(base_seed, magnitude_index,
    trial_index)`` only, so the output does not depend on ``cfg.workers``.
    """
    if spec.variant == "per_index":
        raise InputError("sweeps need a filter with a scalar response")
    s = build_shift(g, cfg.kind)
    eig = eig_symmetric(s)
    norm_shift = spectral_norm(s.matrix)
    base = filter_matrix(spec, s, eig)
    if seminorm is None:
        seminorm = certified_seminorm(spec, sweep_band(s))
    if signals is None or len(signals) == 0:
        if cfg.signal_source == "file":
            log.warning("no signals supplied; falling back to %d random signals", cfg.n_random_signals)
        signals = random_signals(g.n, cfg.n_random_signals, cfg.base_seed)
    signals = np.asarray(signals)
    if signals.ndim != 2 or signals.shape[1] != g.n:
        raise DimensionMismatch(f"signals must have shape (k, {g.n}), got {signals.shape}")
    block = signals.T
    out0 = base @ block
    norms0 = np.linalg.norm(out0, axis=0)
    live = norms0 > 0

    def run(job):
        mi, t = job
        mag = cfg.magnitudes[mi]
        seed = derive_seed(cfg.base_seed, mi, t)
        s2, pert = perturb(s, cfg.mode, mag, seed, strict=cfg.strict)
        diff = base - filter_matrix(spec, s2)
        rel = np.linalg.norm(diff @ block, axis=0)[live] / norms0[live]
        return StabilityRecord(
            magnitude_target=mag,
            trial=t,
            norm_E=pert.op_norm,
            rel_norm_E=pert.op_norm / norm_shift if norm_shift > 0 else math.inf,
            norm_shift=norm_shift,
            op_err=spectral_norm(diff),
            bound=theorem1_bound(seminorm.upper, norm_shift, pert.op_norm),
            seminorm=seminorm.upper,
            mean_rel_signal_err=float(rel.mean()) if rel.size else 0.0,
            max_rel_signal_err=float(rel.max()) if rel.size else 0.0,
            trial_seed=seed,
        )

    jobs = [(mi, t) for mi in range(len(cfg.magnitudes)) for t in range(cfg.trials_per_magnitude)]
    if cfg.workers == 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(run, jobs))


def loglog_slope(records: list[StabilityRecord]) -> float:
    """Slope of log(mean op_err) against log(mean ||E||) across magnitudes."""
    mags = sorted({r.magnitude_target for r in records})
    if len(mags) < 2:
        raise InputError("need at least two magnitudes for a slope")
    x = [np.mean([r.norm_E for r in records if r.magnitude_target == m]) for m in mags]
    y = [np.mean([r.op_err for r in records if r.magnitude_target == m]) for m in mags]
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
