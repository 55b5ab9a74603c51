import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwkit.correspondence import (AddressMap, AffinePointMap, AlgebraElement,
                                  ConjugacyCertificate, CorrElement, CoverSet, SampleGrid,
                                  WMatrix, best_matching, build_V, decide_iso_totally_disconnected,
                                  extract_conjugacy, inner_product, isometry_residual,
                                  left_action, permutation_field, refute_certificate,
                                  right_action, stable_under_refinement, tensor,
                                  verify_isomorphism, w_matrix)
from mwkit.correspondence.decide import anchor_grid
from mwkit.errors import (CertificateInvalid, GraphMismatch, GridMismatch, InconsistentOverlap,
                          NotTotallyDisconnected, OrderMismatch, SingularAtSample)
from mwkit.mw_graph import AffineMap, validate_mw
from mwkit.structure import classify_disconnected

FLIP = AffineMap.make([[-1.0]], [1.0])


@pytest.fixture(scope="module")
def cgrid(cantor, invariant):
    return SampleGrid.from_cells(cantor, invariant("cantor"))


@pytest.fixture(scope="module")
def tgrid(systems, invariant):
    mw = systems["two_vertex"][0]
    return SampleGrid.from_cells(mw, invariant("two_vertex"))


def flip_cert(sigma=(1, 0)):
    return ConjugacyCertificate(AffinePointMap(FLIP, {"v": "v"}), [CoverSet()], [sigma])


def identity_cert(mw):
    f = AffinePointMap(AffineMap.identity(mw.dim), {v: v for v in mw.graph.vertices})
    return ConjugacyCertificate(f, [CoverSet()], [tuple(range(mw.n_edges))])


# module operations -----------------------------------------------------------


def test_right_action_unit_and_indicator(cgrid, rng):
    xi = CorrElement.random(cgrid, rng)
    one = AlgebraElement.constant(cgrid)
    assert np.array_equal(right_action(xi, one).values, xi.values)
    d = CorrElement.basis(cgrid, (0,))
    assert np.array_equal(right_action(d, one).values, d.values)


def test_right_action_entrywise(tgrid, rng):
    xi, a = CorrElement.random(tgrid, rng), AlgebraElement.random(tgrid, rng)
    out = right_action(xi, a)
    g = tgrid.mw.graph
    for (e,) in tgrid.layout(1)[0]:
        assert np.allclose(out.block((e,)), xi.block((e,)) * a.on(g.r(e)))


def test_left_action_of_identity_function(cgrid):
    a = AlgebraElement.from_function(cgrid, lambda p, v: p[:, 0])
    out = left_action(a, CorrElement.basis(cgrid, (0,)))
    x = cgrid.points["v"][:, 0]
    assert np.abs(out.block((0,)) - x / 3).max() <= cgrid.resolution
    assert np.all(out.block((1,)) == 0)


def test_left_action_associative(tgrid, rng):
    a, b = AlgebraElement.random(tgrid, rng), AlgebraElement.random(tgrid, rng)
    xi = CorrElement.random(tgrid, rng)
    lhs = left_action(a, left_action(b, xi))
    rhs = left_action(a * b, xi)
    assert (lhs - rhs).sup() <= 1e-12


def test_inner_product_of_basis(tgrid):
    g = tgrid.mw.graph
    for e in range(g.n_edges):
        for f in range(g.n_edges):
            ip = inner_product(CorrElement.basis(tgrid, (f,)), CorrElement.basis(tgrid, (e,)))
            want = np.zeros(tgrid.size)
            if e == f:
                want[tgrid.offsets[g.r(e)]] = 1.0
            assert np.array_equal(ip.values, want)


def test_inner_product_with_imaginary_component(cgrid):
    xi = CorrElement.from_function(cgrid, 1, lambda a, p: 1.0 if a == (0,) else 1j)
    assert np.allclose(inner_product(xi, xi).values, 2.0)


def test_inner_product_orders_must_agree(cgrid):
    with pytest.raises(OrderMismatch):
        inner_product(CorrElement.zeros(cgrid, 1), CorrElement.zeros(cgrid, 2))


def test_elements_on_different_grids(cgrid, cantor, invariant):
    other = SampleGrid.from_cells(cantor, invariant("cantor"))
    with pytest.raises(GridMismatch):
        right_action(CorrElement.zeros(cgrid), AlgebraElement.constant(other))


def test_basis_tensor(tgrid):
    g = tgrid.mw.graph
    for e in range(g.n_edges):
        for f in g.out_edges[g.r(e)]:
            t = tensor(CorrElement.basis(tgrid, (e,)), CorrElement.basis(tgrid, (f,)))
            assert np.array_equal(t.values, CorrElement.basis(tgrid, (e, f)).values)


def test_tensor_left_action_uses_composite(tgrid, rng):
    a = AlgebraElement.random(tgrid, rng)
    xi, eta = CorrElement.random(tgrid, rng), CorrElement.random(tgrid, rng)
    t = tensor(xi, eta)
    out = left_action(a, t)
    mw = tgrid.mw
    g = mw.graph
    for alpha in tgrid.layout(2)[0]:
        pts = tgrid.points[g.r(alpha[-1])]
        image = mw.maps[alpha[0]](mw.maps[alpha[1]](pts))
        want = a.at(g.s(alpha[0]), image) * t.block(alpha)
        assert np.allclose(out.block(alpha), want)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25, deadline=None)
def test_module_identities(tgrid, seed):
    rng = np.random.default_rng(seed)
    xi, eta = CorrElement.random(tgrid, rng), CorrElement.random(tgrid, rng)
    a = AlgebraElement.random(tgrid, rng)
    # exact right-module identities
    assert (inner_product(xi, right_action(eta, a)) - inner_product(xi, eta) * a).sup() <= 1e-12
    assert (inner_product(right_action(xi, a), eta) - a.conj() * inner_product(xi, eta)).sup() <= 1e-12
    # positivity
    ip = inner_product(xi, xi).values
    assert np.all(ip.real >= 0) and np.allclose(ip.imag, 0)
    # adjointability of the left action
    lhs = inner_product(left_action(a, xi), eta)
    rhs = inner_product(xi, left_action(a.conj(), eta))
    assert (lhs - rhs).sup() <= 1e-9
    # balancing of the tensor product
    bal = tensor(right_action(xi, a), eta) - tensor(xi, left_action(a, eta))
    assert bal.sup() <= 1e-9


# certificates -----------------------------------------------------------------


def test_flip_conjugacy_is_exact_algebra(cantor):
    # 1 - x/3 = phi_2(1 - x) for every x
    x = np.linspace(0, 1, 11)[:, None]
    assert np.allclose(FLIP(cantor.maps[0](x)), cantor.maps[1](FLIP(x)), atol=1e-15)


def test_flip_certificate_refutes_nothing(cantor, cgrid):
    rep = refute_certificate(flip_cert(), cantor, cantor, cgrid, 1e-12)
    assert rep.passed
    assert rep.max_residual <= 1e-12


def test_identity_certificate_gives_identity_V(tgrid):
    mw = tgrid.mw
    iso = build_V(identity_cert(mw), mw, mw, (tgrid, tgrid))
    xi = CorrElement.random(tgrid, np.random.default_rng(0))
    assert np.array_equal(iso.V(xi).values, xi.values)
    rep = verify_isomorphism(iso, trials=10)
    assert rep.inner_product_residual == rep.bimodule_residual == rep.basis_residual == 0.0


def test_flip_V_swaps_basis(cantor, cgrid):
    iso = build_V(flip_cert(), cantor, cantor, (cgrid, cgrid))
    img = iso.V(CorrElement.basis(cgrid, (0,)))
    assert np.array_equal(img.values, CorrElement.basis(cgrid, (1,)).values)


def test_flip_certificate_verifies(cantor, cgrid):
    rep = verify_isomorphism(build_V(flip_cert(), cantor, cantor, (cgrid, cgrid)), 100, 1e-9)
    assert rep.passed


def test_wrong_sigma_is_caught_by_bimodule_check(cantor, cgrid):
    rep = verify_isomorphism(build_V(flip_cert((0, 1)), cantor, cantor, (cgrid, cgrid)), 20)
    # inner products survive any permutation of the fibres
    assert rep.inner_product_residual <= 1e-12
    assert rep.bimodule_residual >= 0.5
    assert not rep.passed
    ref = refute_certificate(flip_cert((0, 1)), cantor, cantor, cgrid, 1e-9)
    assert ref.max_residual >= 0.5


def test_cover_gap_is_flagged(cantor, invariant, cgrid):
    K = invariant("cantor")
    left = K["v"].like(K["v"].flat[:32])
    cert = ConjugacyCertificate(AffinePointMap(FLIP, {"v": "v"}), [CoverSet({"v": left})],
                                [(1, 0)])
    rep = refute_certificate(cert, cantor, cantor, cgrid, 1e-9)
    assert rep.cover_gap and rep.uncovered == 32 and not rep.passed
    with pytest.raises(CertificateInvalid):
        build_V(cert, cantor, cantor, (cgrid, cgrid))


def test_non_bijective_map_is_rejected(cantor, cgrid):
    squash = AffinePointMap(AffineMap.make([[0.5]], [0.0]), {"v": "v"})
    cert = ConjugacyCertificate(squash, [CoverSet()], [(0, 1)])
    with pytest.raises(CertificateInvalid):
        build_V(cert, cantor, cantor, (cgrid, cgrid))


def test_w_matrix_round_trip(cantor, cgrid):
    iso = build_V(flip_cert(), cantor, cantor, (cgrid, cgrid))
    w = w_matrix(iso)
    assert isometry_residual(w, iso) <= 1e-9
    cert = extract_conjugacy(w, iso.cert.f, cantor, cantor)
    assert cert.m == 1 and cert.sigmas == [(1, 0)]
    assert permutation_field(cert).is_constant


def test_extraction_on_two_vertices(tgrid):
    mw = tgrid.mw
    iso = build_V(identity_cert(mw), mw, mw, (tgrid, tgrid))
    w = w_matrix(iso)
    assert isometry_residual(w, iso) == 0.0
    cert = extract_conjugacy(w, iso.cert.f, mw, mw)
    assert cert.sigmas == [(0, 1, 2, 3)]


def test_identity_w_gives_identity_sigma(cantor, cgrid):
    w = WMatrix(cgrid, np.tile(np.eye(2, dtype=complex), (cgrid.size, 1, 1)))
    cert = extract_conjugacy(w, flip_cert().f, cantor, cantor)
    assert cert.sigmas == [(0, 1)]


def test_zero_column_is_singular(cantor, cgrid):
    vals = np.tile(np.eye(2, dtype=complex), (cgrid.size, 1, 1))
    vals[5, :, 1] = 0
    with pytest.raises(SingularAtSample):
        extract_conjugacy(WMatrix(cgrid, vals), flip_cert().f, cantor, cantor)


def test_matching_prefers_heavy_entries():
    w = np.array([[0.1, 2.0, 0.0], [1.0, 0.0, 0.5], [0.0, 0.3, 3.0]])
    assert best_matching(w) == (1, 0, 2)
    assert best_matching(np.zeros((2, 2))) is None


@given(st.permutations(list(range(9))))
@settings(max_examples=30)
def test_large_matching_recovers_permutation(perm):
    w = np.full((9, 9), 0.01)
    w[np.arange(9), perm] = 1.0
    assert best_matching(w) == tuple(perm)


def test_overlapping_sets_with_different_sigma(cantor, invariant):
    K = invariant("cantor")
    a, b = K["v"].like(K["v"].flat[:40]), K["v"].like(K["v"].flat[30:])
    f = flip_cert().f
    cert = ConjugacyCertificate(f, [CoverSet({"v": a}), CoverSet({"v": b})], [(1, 0), (0, 1)])
    with pytest.raises(InconsistentOverlap):
        permutation_field(cert)
    same = ConjugacyCertificate(f, [CoverSet({"v": a}), CoverSet({"v": b})], [(1, 0), (1, 0)])
    field = permutation_field(same)
    assert field.is_constant and len(field.components) == 1


def test_permutation_field_needs_disjoint_source(tent, invariant):
    rep = classify_disconnected(tent, invariant("tent"))
    with pytest.raises(NotTotallyDisconnected):
        permutation_field(identity_cert(tent), rep)


def test_address_map_between_cantor_sets(cantor, systems, invariant):
    mw2 = systems["cantor14"][0]
    f = AddressMap.build(cantor, invariant("cantor"), mw2, invariant("cantor14"))
    # 1/3 = pi(1, 2, 2, ...) goes to pi(1, 2, 2, ...) = 1/4 for ratio 1/4
    assert f(np.array([[1 / 3]]), "v")[0, 0] == pytest.approx(0.25, abs=1e-9)
    back = f.inverse()
    pts = np.array([[0.0], [2 / 9], [1.0]])
    assert np.allclose(back(f(pts, "v"), "v"), pts, atol=1e-8)


# decisions -------------------------------------------------------------------------


def test_decide_cantor_sets_isomorphic(cantor, systems):
    mw2, h2 = systems["cantor14"]
    d = decide_iso_totally_disconnected(cantor, mw2, 3.0 ** -6, h2)
    assert d.verdict == "Isomorphic"
    assert d.verification.passed and d.refutation.passed


def test_decide_self_is_identity(cantor):
    d = decide_iso_totally_disconnected(cantor, cantor, 3.0 ** -6, 3.0 ** -6, trials=5)
    assert d.verdict == "Isomorphic"
    assert d.verification.inner_product_residual == 0.0
    assert d.refutation.max_residual == 0.0


def test_decide_cantor_against_tent(cantor, tent):
    d = decide_iso_totally_disconnected(cantor, tent, 3.0 ** -6, 2.0 ** -10)
    assert d.verdict == "NotIsomorphic"
    assert d.witness["system"] == 2
    assert abs(d.witness["point"][0] - 0.5) <= 2.0 ** -10
    assert stable_under_refinement(d, cantor, tent)


def test_decide_gaskets_is_unknown_with_evidence(systems):
    (phi, h1), (psi, h2) = systems["sierpinski_phi"], systems["sierpinski_psi"]
    d = decide_iso_totally_disconnected(phi, psi, h1, h2)
    assert d.verdict == "Unknown"
    assert len(d.evidence) == 6
    assert min(d.evidence.values()) >= 0.05
    assert "not all homeomorphisms" in d.note


def test_decide_requires_same_graph(cantor, sierpinski):
    with pytest.raises(GraphMismatch):
        decide_iso_totally_disconnected(cantor, sierpinski, 0.1, 0.1)


def test_anchor_grid_resolution_is_honest(cantor, invariant):
    grid = anchor_grid(cantor, invariant("cantor"), 5)
    assert grid.counts["v"] == 32
    assert grid.resolution >= invariant("cantor").cell_diameter


def test_two_vertex_relabelled_copy_is_isomorphic(systems):
    mw, h = systems["two_vertex"]
    # same graph, different contraction ratios, still totally disconnected
    other = validate_mw([("a", [0], [1]), ("b", [0], [1 / 2])],
                        [("1", "a", "a", [[1 / 4]], [0]), ("2", "a", "b", [[1 / 2]], [3 / 4]),
                         ("3", "b", "a", [[1 / 5]], [0]), ("4", "b", "b", [[1 / 4]], [1 / 4])])
    d = decide_iso_totally_disconnected(mw, other, h, h)
    assert d.verdict == "Isomorphic"
