import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphfilt.errors import AsymmetricInput, InputError, NormTargetInfeasible, PerturbationTooLarge
from graphfilt.graph import (
    KINDS,
    MODES,
    SPARSITY_THRESHOLD,
    Graph,
    Permutation,
    ShiftOperator,
    build_shift,
    gen_geometric_graph,
    permute_shift,
    permute_signal,
    perturb,
)
from graphfilt.linalg import eig_symmetric, spectral_norm


def two_vertex(w=1.0):
    return Graph(np.array([[0.0, w], [w, 0.0]]))


def test_two_vertex_laplacian():
    s = build_shift(two_vertex(1.0), "unnormalized")
    np.testing.assert_array_equal(s.matrix, [[1, -1], [-1, 1]])
    np.testing.assert_allclose(eig_symmetric(s).eigenvalues, [0, 2], atol=1e-14)


@pytest.mark.parametrize("w", [0.25, 3.0])
def test_two_vertex_eigenvalues_scale_with_weight(w):
    lam = eig_symmetric(build_shift(two_vertex(w), "unnormalized")).eigenvalues
    np.testing.assert_allclose(lam, [0, 2 * w], atol=1e-14)


def test_empty_graph_unnormalized_is_zero():
    s = build_shift(Graph(np.zeros((4, 4))), "unnormalized")
    assert not s.matrix.any()


def test_normalized_rejects_isolated_vertex():
    with pytest.raises(InputError):
        build_shift(Graph(np.zeros((3, 3))), "normalized")


def test_graph_validation():
    with pytest.raises(AsymmetricInput):
        Graph(np.array([[0.0, 1.0], [0.5, 0.0]]))
    with pytest.raises(InputError):
        Graph(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    with pytest.raises(InputError):
        Graph(np.eye(2))


def test_graph_is_immutable(graph32):
    with pytest.raises(ValueError):
        graph32.weights[0, 1] = 5.0


@pytest.mark.parametrize("kind", KINDS)
def test_shift_exactly_symmetric(graph32, kind):
    m = build_shift(graph32, kind).matrix
    assert np.array_equal(m, m.T)


def test_shift_operator_rejects_asymmetry():
    with pytest.raises(InputError):
        ShiftOperator(np.array([[0.0, 1.0], [1.0 + 1e-15, 0.0]]), "adjacency")


@pytest.mark.parametrize("seed", range(20))
def test_normalized_spectrum_ranges(seed):
    g = gen_geometric_graph(12, seed, 0.4)
    lam = eig_symmetric(build_shift(g, "normalized")).eigenvalues
    assert lam[0] >= -1e-10 and lam[-1] <= 2 + 1e-10
    lam_t = eig_symmetric(build_shift(g, "normalized-translated")).eigenvalues
    assert lam_t[0] >= -1 - 1e-10 and lam_t[-1] <= 1 + 1e-10


def test_geometric_graph_size_and_determinism():
    a = gen_geometric_graph(32, 3)
    b = gen_geometric_graph(32, 3)
    assert a.n == 32
    assert np.array_equal(a.weights, b.weights) and np.array_equal(a.coords, b.coords)
    assert not np.array_equal(a.weights, gen_geometric_graph(32, 4).weights)


def test_geometric_kernel_recomputed_from_coords():
    width = 0.7
    g = gen_geometric_graph(2, 11, width)
    d2 = float(np.sum((g.coords[0] - g.coords[1]) ** 2))
    expected = np.exp(-d2 / (2 * width**2))
    expected = expected if expected >= SPARSITY_THRESHOLD else 0.0
    assert g.weights[0, 1] == pytest.approx(expected, rel=1e-15)


def test_geometric_graph_preconditions():
    with pytest.raises(InputError):
        gen_geometric_graph(1, 0)
    with pytest.raises(InputError):
        gen_geometric_graph(5, 0, 0.0)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("target", [1e-4, 1e-2, 0.3])
def test_dense_gaussian_hits_target(lap32, seed, target):
    s2, pert = perturb(lap32, "dense-gaussian", target, seed)
    e = s2.matrix - lap32.matrix
    assert np.array_equal(pert.E, pert.E.T)
    assert abs(spectral_norm(pert.E) - target) <= 1e-10 * target
    assert abs(pert.op_norm - spectral_norm(pert.E)) <= 1e-10 * target
    np.testing.assert_allclose(e, pert.E, atol=1e-15)


@pytest.mark.parametrize("kind", ["unnormalized", "adjacency"])
def test_edge_jitter_linear_kinds_hit_target(lap32, graph32, kind):
    s = build_shift(graph32, kind)
    _, pert = perturb(s, "edge-jitter", 1e-3, 5)
    assert pert.op_norm == pytest.approx(1e-3, rel=1e-10)


@pytest.mark.parametrize("kind", ["normalized", "normalized-translated"])
def test_edge_jitter_normalized_within_tolerance(graph32, kind):
    s = build_shift(graph32, kind)
    s2, pert = perturb(s, "edge-jitter", 1e-3, 5)
    assert pert.op_norm == pytest.approx(1e-3, rel=0.1)
    assert np.array_equal(s2.matrix, s2.matrix.T)


@pytest.mark.parametrize("seed", range(10))
def test_edge_jitter_keeps_a_laplacian(lap32, seed):
    s2, _ = perturb(lap32, "edge-jitter", 1e-2, seed)
    m = s2.matrix
    assert np.array_equal(m, m.T)
    off = m - np.diag(np.diag(m))
    assert np.all(off <= 0)
    np.testing.assert_allclose(np.diag(m), -off.sum(axis=1), atol=1e-13)


def test_edge_drop_removes_whole_edges(lap32, graph32):
    s2, pert = perturb(lap32, "edge-drop", 1e-2, 1)
    assert s2.graph is not None
    w2 = s2.graph.weights
    kept = (w2 == graph32.weights) | (w2 == 0)
    assert kept.all()
    assert pert.op_norm < 1


def test_edge_drop_everything_gives_zero_laplacian():
    g = two_vertex(0.3)
    s = build_shift(g, "unnormalized")
    s2, pert = perturb(s, "edge-drop", 0.6, 0)
    assert not s2.matrix.any()
    assert pert.op_norm == pytest.approx(0.6)


def test_edge_drop_strict_reports_infeasible_target(lap32):
    # single edges of this graph already exceed the 10% window around 1e-6
    with pytest.raises(NormTargetInfeasible):
        perturb(lap32, "edge-drop", 1e-6, 0, strict=True)


@pytest.mark.parametrize("mode", MODES)
def test_perturb_rejects_bad_targets(lap32, mode):
    with pytest.raises(InputError):
        perturb(lap32, mode, 0.0, 0)
    with pytest.raises(PerturbationTooLarge):
        perturb(lap32, mode, 1.0, 0)


def test_vanishing_perturbation_limit(lap32):
    from graphfilt.filters import FilterSpec
    from graphfilt.stability import op_distance

    spec = FilterSpec.cayley([0.2, 0.7, -0.1j])
    errs = [op_distance(spec, lap32, perturb(lap32, "dense-gaussian", t, 0)[0]) for t in (1e-2, 1e-5, 1e-8)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-7


def test_permutation_identity_and_inverse(lap32):
    assert np.array_equal(permute_shift(lap32, Permutation.identity(32)).matrix, lap32.matrix)
    p = Permutation.random(32, 9)
    back = permute_shift(permute_shift(lap32, p), p.inverse())
    assert np.array_equal(back.matrix, lap32.matrix)
    assert back.graph == lap32.graph


def test_swap_two_by_two():
    a, b, c = 1.5, -0.25, 4.0
    s = ShiftOperator(np.array([[a, b], [b, c]]), "adjacency")
    out = permute_shift(s, Permutation((1, 0)))
    np.testing.assert_array_equal(out.matrix, [[c, b], [b, a]])


def test_permutation_matrix_convention():
    p = Permutation.random(6, 2)
    f = np.arange(6.0)
    np.testing.assert_array_equal(p.matrix() @ f, permute_signal(f, p))


def test_permutation_validation():
    with pytest.raises(InputError):
        Permutation((0, 0, 1))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32), pseed=st.integers(0, 2**32))
def test_permute_roundtrip_property(n, seed, pseed):
    s = build_shift(gen_geometric_graph(n, seed, 0.5), "adjacency")
    p = Permutation.random(n, pseed)
    assert np.array_equal(permute_shift(permute_shift(s, p), p.inverse()).matrix, s.matrix)
