"""Randomized certification suites.

Each suite draws its instances from a seeded generator, runs one check per
instance and records every failure with the seed that reproduces it.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .filters import FilterSpec, apply_exact, apply_spatial
from .graph import Permutation, ShiftOperator, build_shift, gen_geometric_graph
from .linalg import spectral_norm
from .rng import derive_seed, make_rng
from . import stability as st

PATH_RTOL = 1e-8
EQUIVARIANCE_TOL = 1e-9
UNITARITY_TOL = 1e-10


# -- instance generators ----------------------------------------------------------


def random_symmetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    x = rng.standard_normal((n, n)) * scale
    return 0.5 * (x + x.T)


def random_perturbation(rng: np.random.Generator, n: int, norm: float) -> np.ndarray:
    e = random_symmetric(rng, n)
    return e * (norm / spectral_norm(e))


def random_shift(rng: np.random.Generator, n: int, kind: str | None = None) -> ShiftOperator:
    """Shift of a random geometric graph (kernel width in [0.2, 0.6])."""
    kind = kind or ("unnormalized", "normalized", "normalized-translated", "adjacency")[rng.integers(4)]
    g = gen_geometric_graph(n, int(rng.integers(2**63)), float(rng.uniform(0.2, 0.6)))
    return build_shift(g, kind)


def random_spec(rng: np.random.Generator, variant: str, order: int, lam_scale: float = 1.0) -> FilterSpec:
    """Random filter of the given order, scaled to keep responses O(1) on [0, lam_scale]."""
    def cplx(k):
        return rng.standard_normal(k) + 1j * rng.standard_normal(k) * rng.integers(2)

    if variant == "polynomial":
        return FilterSpec.polynomial(cplx(order + 1) / np.maximum(lam_scale, 1.0) ** np.arange(order + 1))
    if variant == "cayley":
        return FilterSpec.cayley(cplx(order + 1), real_part=bool(rng.integers(2)))
    if variant == "rational":
        # roots kept at least 0.5 away from the real axis so den(D) is well conditioned
        s = max(lam_scale, 1.0)
        roots = rng.uniform(-1, 1, order) * s + 1j * rng.choice([-1, 1], order) * rng.uniform(0.5, 2.0, order) * s
        den = np.polynomial.polynomial.polyfromroots(roots) / s**order
        num = cplx(order + 1) / s ** np.arange(order + 1)
        return FilterSpec.rational(num, den)
    raise ValueError(variant)


# -- suites -----------------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    instances: int = 0
    failures: list[dict] = field(default_factory=list)
    worst: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, index: int, seed: int, ok: bool, margin: float, **detail):
        self.instances += 1
        self.worst = max(self.worst, float(margin))
        if not ok:
            self.failures.append({"instance": index, "seed": seed, **detail})


def _seeds(base: int, suite: str, count: int):
    tag = int.from_bytes(suite.encode()[:8].ljust(8, b"\0"), "little")
    for i in range(count):
        yield i, derive_seed(base, tag, i)


def suite_lemma1(seed: int, count: int) -> SuiteResult:
    res = SuiteResult("lemma1")
    for i, s in _seeds(seed, "lemma1", count):
        rng = make_rng(s)
        n = int(rng.integers(1, 17))
        D = random_symmetric(rng, n, rng.uniform(0.1, 2.0))
        B = D + random_perturbation(rng, n, rng.uniform(1e-3, 1.0) * max(spectral_norm(D), 1e-3))
        l = int(rng.integers(0, 9))
        rep = st.check_lemma1(B, D, l)
        res.record(i, s, rep.holds, rep.lhs / rep.rhs if rep.rhs else 0.0, lhs=rep.lhs, rhs=rep.rhs, l=l)
    return res


def suite_lemma2(seed: int, count: int) -> SuiteResult:
    res = SuiteResult("lemma2")
    variants = ("polynomial", "cayley", "rational")
    for i, s in _seeds(seed, "lemma2", count):
        rng = make_rng(s)
        n = int(rng.integers(2, 17))
        sh = random_shift(rng, n)
        scale = spectral_norm(sh.matrix)
        f = random_spec(rng, variants[rng.integers(3)], int(rng.integers(0, 5)), scale)
        g = random_spec(rng, variants[rng.integers(3)], int(rng.integers(0, 5)), scale)
        rep = st.check_lemma2(f, g, sh)
        margin = rep.residual / (1 + rep.lhs)
        res.record(i, s, rep.holds, margin / st.CERT_RTOL, lhs=rep.lhs, rhs=rep.rhs)
    return res


def _pair(rng, max_norm: float):
    n = int(rng.integers(1, 17))
    if rng.integers(2):
        D = random_shift(rng, max(n, 2)).matrix
    else:
        D = random_symmetric(rng, n, rng.uniform(0.1, 5.0))
    e = random_perturbation(rng, D.shape[0], rng.uniform(1e-6, max_norm))
    return D, D + e


def suite_resolvent(seed: int, count: int, negative: bool = False) -> SuiteResult:
    res = SuiteResult("resolvent")
    for i, s in _seeds(seed, "resolvent", count):
        D, D2 = _pair(make_rng(s), 0.5)
        rep = st.check_resolvent_bound(D, D2)
        ok = rep.holds
        if negative:
            # harness self-check: the flipped inequality must be reported as failing
            ok = rep.rhs <= rep.lhs
        res.record(i, s, ok, rep.lhs / rep.rhs, lhs=rep.lhs, rhs=rep.rhs)
    return res


def suite_cayley_contraction(seed: int, count: int) -> SuiteResult:
    res = SuiteResult("cayley_contraction")
    for i, s in _seeds(seed, "cayley", count):
        D, D2 = _pair(make_rng(s), 0.9)
        rep = st.check_cayley_contraction(D, D2)
        ok = rep.holds and rep.lhs <= 2.0 * (1 + st.CERT_RTOL)
        res.record(i, s, ok, rep.lhs / rep.rhs, lhs=rep.lhs, rhs=rep.rhs)
    return res


def suite_unitarity(seed: int, count: int) -> SuiteResult:
    res = SuiteResult("unitarity")
    for i, s in _seeds(seed, "unitary", count):
        rng = make_rng(s)
        D, D2 = _pair(rng, 0.9)
        r = max(st.unitarity_residual(D), st.unitarity_residual(D2))
        res.record(i, s, r <= UNITARITY_TOL, r / UNITARITY_TOL, residual=r)
    return res


def suite_equivariance(seed: int, count: int) -> SuiteResult:
    res = SuiteResult("equivariance")
    variants = ("polynomial", "cayley", "rational")
    for i, s in _seeds(seed, "equivar", count):
        rng = make_rng(s)
        n = int(rng.integers(2, 33))
        sh = random_shift(rng, n)
        spec = random_spec(rng, variants[rng.integers(3)], int(rng.integers(0, 7)), spectral_norm(sh.matrix))
        p = Permutation.random(n, int(rng.integers(2**63)))
        f = rng.standard_normal(n)
        r = st.check_equivariance(spec, sh, p, f)
        res.record(i, s, r <= EQUIVARIANCE_TOL, r / EQUIVARIANCE_TOL, residual=r, variant=spec.variant)
    return res


def path_gap(spec: FilterSpec, sh, f) -> float:
    """max over signals of ||exact - spatial|| / ||exact||."""
    a = apply_exact(spec, sh, f)
    b = apply_spatial(spec, sh, f)
    num = np.linalg.norm(np.atleast_2d((a - b).T), axis=1)
    den = np.linalg.norm(np.atleast_2d(a.T), axis=1)
    return float(np.max(np.where(den > 0, num / np.where(den > 0, den, 1), num)))


def suite_path_equivalence(seed: int, count: int) -> SuiteResult:
    res = SuiteResult("path_equivalence")
    variants = ("polynomial", "cayley", "rational")
    for i, s in _seeds(seed, "paths", count):
        rng = make_rng(s)
        n = int(rng.integers(2, 65))
        sh = random_shift(rng, n)
        spec = random_spec(rng, variants[rng.integers(3)], int(rng.integers(0, 7)), spectral_norm(sh.matrix))
        f = rng.standard_normal(n)
        r = path_gap(spec, sh, f)
        res.record(i, s, r <= PATH_RTOL, r / PATH_RTOL, residual=r, variant=spec.variant, n=n)
    return res


def suite_theorem1(seed: int, count: int) -> SuiteResult:
    res = SuiteResult("theorem1")
    for i, s in _seeds(seed, "theorem1", count):
        rng = make_rng(s)
        D, D2 = _pair(rng, 0.9)
        spec = random_spec(rng, "cayley", int(rng.integers(1, 7)))
        lhs = st.op_distance(spec, D, D2)
        bound = st.theorem1_bound(st.cayley_seminorm(spec), spectral_norm(D), spectral_norm(D2 - D))
        res.record(i, s, lhs <= bound * (1 + st.CERT_RTOL), lhs / bound, lhs=lhs, rhs=bound)
    return res


def suite_per_index_demo(seed: int, count: int) -> SuiteResult:
    res = SuiteResult("per_index_demo")
    for i, s in _seeds(seed, "perindex", max(1, min(count, 5))):
        rep = st.per_index_instability_demo(seed=s)
        ok = rep.functional_within_bound and rep.per_index_over_bound >= 10 and rep.control_rel_diff <= 0.1
        res.record(
            i,
            s,
            ok,
            rep.functional_err / rep.bound,
            per_index_over_bound=rep.per_index_over_bound,
            control_rel_diff=rep.control_rel_diff,
        )
    return res


SUITES = {
    "lemma1": suite_lemma1,
    "lemma2": suite_lemma2,
    "resolvent": suite_resolvent,
    "cayley_contraction": suite_cayley_contraction,
    "unitarity": suite_unitarity,
    "equivariance": suite_equivariance,
    "path_equivalence": suite_path_equivalence,
    "theorem1": suite_theorem1,
    "per_index_demo": suite_per_index_demo,
}


def run_all(seed: int, instances: int, negative: bool = False) -> list[SuiteResult]:
    out = []
    for name, fn in SUITES.items():
        if name == "resolvent":
            out.append(fn(seed, instances, negative=negative))
        else:
            out.append(fn(seed, instances))
    return out


def report_json(results: list[SuiteResult], seed: int, instances: int) -> dict:
    return {
        "seed": seed,
        "instances": instances,
        "passed": all(r.passed for r in results),
        "suites": [{**asdict(r), "passed": r.passed} for r in results],
    }
