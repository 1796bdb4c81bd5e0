"""Acceptance criteria, one test each.

Every test prints a single ``[criterion N] PASS|FAIL ...`` line to the
terminal (also visible without ``-s``) and then asserts.
"""

import numpy as np
import pytest

from graphfilt import verify
from graphfilt.cli import main
from graphfilt.filters import (
    FilterSpec,
    ScalarResponse,
    allpass_arma,
    cayley_fourier,
    cayley_project,
    cayley_scalar,
    lowpass_cayley,
    lowpass_polynomial,
    pad_polynomial,
)
from graphfilt.graph import MODES, build_shift, gen_geometric_graph
from graphfilt.linalg import eig_symmetric, spectral_norm
from graphfilt.stability import SweepConfig, certified_seminorm, loglog_slope, per_index_instability_demo, stability_sweep

MAGNITUDES = (1e-4, 1e-3, 1e-2)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return emit


def suite_detail(res):
    return f"{res.name}: {res.instances} instances, {len(res.failures)} failures, worst margin {res.worst:.3g}"


def test_c1_cayley_certification(report):
    g = gen_geometric_graph(32, 7)
    lam_max = float(eig_symmetric(build_shift(g, "unnormalized")).eigenvalues[-1])
    specs = {
        "lowpass": lowpass_cayley(lam_max),
        "complex": FilterSpec.cayley([0.3, 0.5 - 0.2j, 0.1j, -0.25]),
    }
    total = violations = 0
    for name, spec in specs.items():
        seminorm = certified_seminorm(spec)
        assert seminorm.method == "exact" and seminorm.tail == 0
        for mode in MODES:
            cfg = SweepConfig(magnitudes=MAGNITUDES, trials_per_magnitude=100, mode=mode, base_seed=11)
            recs = stability_sweep(g, spec, cfg, seminorm=seminorm)
            total += len(recs)
            violations += sum(r.op_err > r.bound * (1 + 1e-9) for r in recs)
    ok = report(1, violations == 0 and total == 2 * 3 * 300, f"{total} trials, {violations} bound violations")
    assert ok


def test_c2_linear_stability_slopes(report):
    g = gen_geometric_graph(32, 7)
    lam = {k: eig_symmetric(build_shift(g, k)).eigenvalues for k in ("normalized", "unnormalized")}
    families = {
        "polynomial": ("normalized", lowpass_polynomial(float(lam["normalized"][-1]))),
        "cayley": ("unnormalized", lowpass_cayley(float(lam["unnormalized"][-1]))),
        "rational": ("unnormalized", allpass_arma(spectral_norm(build_shift(g, "unnormalized").matrix))),
    }
    slopes = {}
    for name, (kind, spec) in families.items():
        cfg = SweepConfig(magnitudes=MAGNITUDES, trials_per_magnitude=100, kind=kind, base_seed=2)
        slopes[name] = loglog_slope(stability_sweep(g, spec, cfg))
    ok = all(abs(s - 1.0) <= 0.1 for s in slopes.values())
    report(2, ok, "slopes " + ", ".join(f"{k}={v:.4f}" for k, v in slopes.items()) + " (target 1.0 +- 0.1)")
    assert ok


def test_c3_dual_path_equivalence(report):
    res = verify.suite_path_equivalence(2024, 200)
    report(3, res.passed and res.instances == 200, suite_detail(res) + " (margin = gap / 1e-8)")
    assert res.passed


def test_c4_lemma2_equality(report):
    res = verify.suite_lemma2(2024, 200)
    report(4, res.passed and res.instances == 200, suite_detail(res) + " (margin = residual / 1e-9 (1 + value))")
    assert res.passed


def test_c5_proof_ingredients(report):
    results = [
        verify.suite_lemma1(2024, 500),
        verify.suite_resolvent(2024, 500),
        verify.suite_cayley_contraction(2024, 500),
        verify.suite_unitarity(2024, 500),
    ]
    ok = all(r.passed and r.instances == 500 for r in results)
    report(5, ok, "; ".join(suite_detail(r) for r in results))
    assert ok


def test_c6_equivariance(report):
    res = verify.suite_equivariance(2024, 200)
    report(6, res.passed and res.instances == 200, suite_detail(res) + " (margin = residual / 1e-9)")
    assert res.passed


def test_c7_per_index_instability(report):
    rep = per_index_instability_demo(n=8, seed=0, norm_E=1e-4)
    ok = rep.functional_within_bound and rep.per_index_over_bound >= 10
    report(
        7,
        ok,
        f"eigengap {rep.eigen_gap:.3g}, |E| {rep.norm_E:.3g}, bound {rep.bound:.3g}, "
        f"functional err {rep.functional_err:.3g}, per-index err {rep.per_index_err:.3g} "
        f"({rep.per_index_over_bound:.0f}x bound)",
    )
    assert ok


def test_c8_sweep_determinism(report, tmp_path):
    graph = tmp_path / "g.json"
    assert main(["graph-gen", "--n", "32", "--seed", "7", "--out", str(graph)]) == 0
    workers = 300  # one thread per trial of a magnitude
    outputs = []
    for tag, w in (("a", 1), ("b", 1), ("c", workers)):
        out = tmp_path / f"{tag}.csv"
        args = ["stability-sweep", "--graph", str(graph), "--filter", "lowpass-cayley", "--mode", "edge-jitter"]
        assert main(args + ["--trials", "100", "--seed", "5", "--workers", str(w), "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    report(8, ok, f"3 runs (workers 1, 1, {workers}) byte-identical: {ok}")
    assert ok


def test_c9_projection_recovery(report):
    worst = 0.0
    for k in range(5):
        g = ScalarResponse(lambda lam, k=k: cayley_scalar(lam) ** k, limit=1.0)
        c = np.asarray(cayley_project(g, 8, 1024).coeffs)
        expected = np.zeros(9)
        expected[k] = 1.0
        worst = max(worst, float(np.max(np.abs(c - expected))))
    x = np.linspace(-1, 1, 64)
    chebnet = np.polynomial.polynomial.polyfit(x, np.exp(-(x + 1)), 3)
    fourier = cayley_fourier(pad_polynomial(chebnet, (-1.0, 1.0)), 64, 8192)
    ratio = fourier.tail_estimate() / fourier.seminorm
    ok = worst <= 1e-6 and np.isfinite(fourier.seminorm) and ratio <= 0.01
    report(
        9,
        ok,
        f"z^k recovery max error {worst:.2g}; ChebNet pad seminorm {fourier.seminorm:.4f}, "
        f"tail {fourier.tail_estimate():.3g} ({100 * ratio:.3f}% at L=64, M=8192)",
    )
    assert ok
