import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kernel_koopman.dynamics import (
    affine_map,
    identity_map,
    linear_map,
    mobius_map,
    permutation_map,
    scaling_map,
    translation_map,
)
from kernel_koopman.errors import (
    CapabilityError,
    DegenerateDictionaryError,
    EvaluationError,
    ParameterError,
    ShapeError,
    UnknownSourceError,
)
from kernel_koopman.dynamics import snapshot_map
from kernel_koopman.kernels import check_invariance, make_kernel
from kernel_koopman.operators import (
    AtomicMeasure,
    Dictionary,
    delta,
    embed_eval,
    embed_eval_many,
    koopman_eval,
    norm_bound_estimate,
    pair,
    pf_apply,
    pf_project,
    rep_matrix_discrete,
    rep_matrix_linear,
    rkhs_norm,
    section,
    span_function,
    spectrum,
)

SQ2PI = np.sqrt(2 * np.pi)
# Residual norms are square roots of cancelling Gram sums, so in double
# precision they bottom out near sqrt(machine epsilon) even for exact spans.
RESIDUAL_FLOOR = 4 * np.sqrt(np.finfo(float).eps)


# -- embeddings and pairings -------------------------------------------------


def test_embed_single_atom_is_kernel_value():
    k = make_kernel("sinc", bandwidth=0.7)
    assert embed_eval(delta(0.3), k, -0.2) == k(0.3, -0.2)


def test_embed_empty_measure_is_zero():
    empty = AtomicMeasure(np.empty((0, 1)), [])
    assert embed_eval(empty, make_kernel("gaussian"), 0.5) == 0.0


def test_embed_two_atoms_by_hand():
    m = AtomicMeasure([0.0, 1.0], [1.0, -1.0])
    expected = (1 - np.exp(-0.5)) / SQ2PI
    assert embed_eval(m, make_kernel("gaussian"), 0.0) == pytest.approx(expected, rel=1e-15)


def test_pair_total_mass():
    m = AtomicMeasure([0.1, 0.9], [0.25, 0.75])
    assert pair(lambda x: 1.0, m) == 1.0


def test_pair_quadratic():
    assert pair(lambda x: x[0] ** 2, AtomicMeasure([1.0, 2.0], [1.0, 1.0])) == 5.0


def test_pair_reproduces_embedding():
    k = make_kernel("gaussian", dim=2)
    x, y = np.array([0.2, -0.1]), np.array([1.0, 0.5])
    m = delta(x)
    assert pair(section(k, y), m) == embed_eval(m, k, y)


def test_pair_failure_names_atom():
    k = make_kernel("sobolev11")
    m = AtomicMeasure([0.5, 1.5], [1.0, 1.0])
    with pytest.raises(EvaluationError) as exc:
        pair(section(k, 0.3), m)
    assert exc.value.index == 1


def test_measure_shape_mismatch():
    with pytest.raises(ShapeError):
        AtomicMeasure([0.0, 1.0], [1.0])


# -- Perron-Frobenius and Koopman action -------------------------------------


def test_pf_apply_moves_delta():
    f = scaling_map(3.0)
    out = pf_apply(f, delta(0.5, 2.0))
    np.testing.assert_array_equal(out.atoms, [[1.5]])
    np.testing.assert_array_equal(out.weights, [2.0])


def test_pf_apply_identity_unchanged():
    m = AtomicMeasure(np.random.default_rng(0).standard_normal((5, 3)), np.arange(5.0))
    assert pf_apply(identity_map(), m).same_as(m)


def test_pf_apply_snapshot_miss():
    f = snapshot_map([[0.0], [1.0]], [[1.0], [0.0]])
    assert pf_apply(f, AtomicMeasure([0.0, 1.0])).atoms.tolist() == [[1.0], [0.0]]
    with pytest.raises(UnknownSourceError):
        pf_apply(f, AtomicMeasure([0.5]))


def test_koopman_eval_examples():
    k = make_kernel("gaussian")
    f = scaling_map(2.0)
    assert koopman_eval(f, section(k, 0.4), [0.3]) == k(0.6, 0.4)
    g = lambda x: x[0] ** 2  # noqa: E731
    assert koopman_eval(identity_map(), g, [3.0]) == 9.0
    assert koopman_eval(f, g, [3.0]) == 36.0


def _exact_linear_map(rng, d):
    """A signed permutation scaled by a power of two: inverse and images are exact."""
    P = np.eye(d)[rng.permutation(d)] * rng.choice([-1.0, 1.0], size=d)
    return linear_map(2.0 ** int(rng.integers(-3, 4)) * P)


def _exact_translation(rng, d):
    return translation_map(rng.integers(-16, 17, size=d) / 8.0)


def _dyadic_measure(rng, d, n):
    return AtomicMeasure(rng.integers(-64, 65, size=(n, d)) / 16.0, rng.standard_normal(n))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 3), n=st.integers(0, 8))
def test_composition_and_inverse_laws_exact(seed, d, n):
    rng = np.random.default_rng(seed)
    maker = [_exact_linear_map, _exact_translation]
    f = maker[rng.integers(2)](rng, d)
    g = maker[rng.integers(2)](rng, d)
    mu = _dyadic_measure(rng, d, n)
    assert pf_apply(f, pf_apply(g, mu)).same_as(pf_apply(f.compose(g), mu))
    assert pf_apply(f.inverse(), pf_apply(f, mu)).same_as(mu)


def test_composition_law_exact_for_general_maps():
    rng = np.random.default_rng(7)
    for _ in range(20):
        f = affine_map(rng.standard_normal((2, 2)), rng.standard_normal(2))
        g = affine_map(rng.standard_normal((2, 2)), rng.standard_normal(2))
        mu = AtomicMeasure(rng.standard_normal((6, 2)), rng.standard_normal(6))
        assert pf_apply(f, pf_apply(g, mu)).same_as(pf_apply(f.compose(g), mu))


def test_inverse_law_general_affine_to_roundoff():
    rng = np.random.default_rng(8)
    for _ in range(20):
        A = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        f = affine_map(A, rng.standard_normal(3))
        mu = AtomicMeasure(rng.standard_normal((6, 3)), rng.standard_normal(6))
        back = pf_apply(f.inverse(), pf_apply(f, mu))
        np.testing.assert_allclose(back.atoms, mu.atoms, rtol=0, atol=1e-12)
        np.testing.assert_array_equal(back.weights, mu.weights)


def test_inverse_law_discrete_permutation():
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = rng.permutation(5) + 1
        f = permutation_map(s)
        mu = AtomicMeasure(rng.integers(1, 6, size=7), rng.standard_normal(7))
        assert pf_apply(f.inverse(), pf_apply(f, mu)).same_as(mu)


def test_adjoint_duality_random_triples():
    rng = np.random.default_rng(11)
    k = make_kernel("gaussian", sigma=0.8, dim=2)
    for _ in range(100):
        f = affine_map(0.5 * rng.standard_normal((2, 2)), rng.standard_normal(2))
        g = span_function(k, rng.standard_normal((4, 2)), rng.standard_normal(4))
        mu = AtomicMeasure(rng.standard_normal((5, 2)), rng.standard_normal(5))
        lhs = pair(lambda x: koopman_eval(f, g, x), mu)
        rhs = pair(g, pf_apply(f, mu))
        assert abs(lhs - rhs) <= 1e-12


def test_injectivity_witness():
    k = make_kernel("gaussian")
    f, g = scaling_map(2.0), scaling_map(3.0)
    x = np.array([0.5])
    probes = np.linspace(-2, 2, 9)
    a = embed_eval_many(pf_apply(f, delta(x)), k, probes)
    b = embed_eval_many(pf_apply(g, delta(x)), k, probes)
    assert np.max(np.abs(a - b)) > 1e-3


# -- norms -------------------------------------------------------------------


def test_rkhs_norm_single_atom():
    k = make_kernel("sinc", bandwidth=1.5)
    assert rkhs_norm(delta(0.2), k) == pytest.approx(np.sqrt(3.0), rel=1e-15)


def test_rkhs_norm_zero_weights():
    assert rkhs_norm(AtomicMeasure([0.1, 0.2], [0.0, 0.0]), make_kernel("gaussian")) == 0.0


def test_rkhs_norm_two_atoms_by_hand():
    m = AtomicMeasure([0.0, 1.0], [1.0, -1.0])
    expected = np.sqrt(2 * (1 - np.exp(-0.5)) / SQ2PI)
    assert rkhs_norm(m, make_kernel("gaussian")) == pytest.approx(expected, rel=1e-14)


def test_rkhs_norm_complex_weights_hermitian():
    k = make_kernel("szego")
    z = np.array([0.1 + 0.2j, -0.3 + 0.0j])
    w = np.array([1.0 + 1j, 0.5 - 2j])
    G = np.array([[1 / (1 - zi * np.conj(zj)) for zj in z] for zi in z])
    expected = np.sqrt(np.real(sum(w[i] * np.conj(w[j]) * G[i, j] for i in range(2) for j in range(2))))
    assert rkhs_norm(AtomicMeasure(z, w), k) == pytest.approx(expected, rel=1e-14)


def test_rkhs_norm_requires_pd():
    with pytest.raises(CapabilityError):
        rkhs_norm(delta(0.5), make_kernel("powbase"))


def test_isometry_under_invariant_kernel():
    rng = np.random.default_rng(2)
    k = make_kernel("gaussian", dim=2)
    f = translation_map([1.0, -2.0])
    for _ in range(50):
        mu = AtomicMeasure(rng.standard_normal((6, 2)), rng.standard_normal(6))
        assert check_invariance(k, f, mu.atoms, tol=1e-12).passed
        n0 = rkhs_norm(mu, k)
        assert abs(rkhs_norm(pf_apply(f, mu), k) - n0) <= 1e-10 * n0


# -- norm bound --------------------------------------------------------------


def test_norm_bound_identity_is_one():
    k = make_kernel("gaussian")
    rep = norm_bound_estimate(k, identity_map(), np.linspace(-2, 2, 7))
    assert rep.bound == pytest.approx(1.0, abs=1e-8)


def test_norm_bound_translation_invariant_kernel():
    k = make_kernel("gaussian", dim=2)
    rep = norm_bound_estimate(k, translation_map([1.0, -2.0]), k.sample(40, seed=1))
    assert abs(rep.bound - 1.0) <= 1e-8


def test_norm_bound_szego_mobius():
    k = make_kernel("szego")
    f = mobius_map(1.0, 0.5)
    P = k.sample(200, seed=0)
    bounds = [norm_bound_estimate(k, f, P[:n]).bound for n in (25, 50, 100, 200)]
    assert all(b <= 3 + 1e-8 for b in bounds)
    assert all(b2 >= b1 - 1e-10 for b1, b2 in zip(bounds, bounds[1:]))


def test_norm_bound_monotone_under_nesting_gaussian():
    k = make_kernel("gaussian")
    f = scaling_map(0.5)
    P = k.sample(40, seed=2)
    bounds = [norm_bound_estimate(k, f, P[:n]).bound for n in (5, 10, 20, 40)]
    assert all(b2 >= b1 - 1e-10 for b1, b2 in zip(bounds, bounds[1:]))


def test_norm_bound_eigvec_attains_bound():
    k = make_kernel("gaussian")
    f = scaling_map(0.6)
    X = np.linspace(-1.5, 1.5, 6)
    rep = norm_bound_estimate(k, f, X, reg=0.0)
    mu = AtomicMeasure(X, rep.eigvec)
    ratio = rkhs_norm(pf_apply(f, mu), k) ** 2 / rkhs_norm(mu, k) ** 2
    assert ratio == pytest.approx(rep.bound, rel=1e-8)


@pytest.mark.parametrize("kid, f", [("szego", mobius_map(1j, 0.2 - 0.3j)), ("gaussian", scaling_map(0.7))])
def test_norm_bound_forms_match_double_sum(kid, f):
    k = make_kernel(kid)
    X = k.sample(12, seed=4)
    rep = norm_bound_estimate(k, f, X)
    rng = np.random.default_rng(5)
    FX = f.apply_many(X)
    for _ in range(10):
        a = rng.standard_normal(12) + (1j * rng.standard_normal(12) if kid == "szego" else 0)
        num = sum(a[i] * np.conj(a[j]) * k(FX[i], FX[j]) for i in range(12) for j in range(12))
        den = sum(a[i] * np.conj(a[j]) * k(X[i], X[j]) for i in range(12) for j in range(12))
        fnum, fden = rep.forms(a)
        assert fnum == pytest.approx(np.real(num), rel=1e-12)
        assert fden == pytest.approx(np.real(den), rel=1e-12)


def test_norm_bound_report_serialization():
    rep = norm_bound_estimate(make_kernel("gaussian"), identity_map(), [0.0, 1.0])
    d = rep.to_dict()
    assert list(d) == ["bound", "pencil_rank", "eigenvalues"]
    assert d["pencil_rank"] == 2
    assert set(d["eigenvalues"][0]) == {"re", "im"}


def test_degenerate_dictionary():
    with pytest.raises(DegenerateDictionaryError):
        norm_bound_estimate(make_kernel("linearform", dim=1), identity_map(), [0.0])


def test_dictionary_rejects_duplicates():
    with pytest.raises(ParameterError):
        Dictionary(make_kernel("gaussian"), [0.1, 0.2, 0.1])


def test_dictionary_truncation_and_default_reg():
    k = make_kernel("polynomial", degree=2)
    D = Dictionary(k, np.linspace(-1, 1, 8))
    assert D.rank == 3
    assert D.reg == pytest.approx(1e-10 * np.trace(D.gram) / 8)


# -- projection and spectrum -------------------------------------------------


def test_project_identity_is_identity():
    k = make_kernel("gaussian", sigma=0.5)
    X = np.linspace(-2, 2, 6)
    op = pf_project(k, X, X)
    D = op.dictionary
    lam_min = D.eigenvalues.min()
    np.testing.assert_allclose(op.coeffs, np.eye(6), atol=10 * D.reg / lam_min)
    assert all(abs(p.value - 1) <= 10 * D.reg / lam_min for p in spectrum(op))


def test_project_linear_kernel_scaling():
    k = make_kernel("linearform", dim=1)
    X = np.array([0.5, 1.0, -2.0, 3.0])
    for a in (0.7, -1.3):
        op = pf_project(k, X, f=scaling_map(a))
        sp = spectrum(op)
        assert len(sp) == 1
        assert abs(sp[0].value - a) <= 1e-10
        assert np.max(op.residual_norms()) <= RESIDUAL_FLOOR


def test_project_polynomial_spectrum():
    k = make_kernel("polynomial", degree=3)
    X = np.array([-1.0, -0.6, -0.2, 0.3, 0.7, 1.0])
    op = pf_project(k, X, f=scaling_map(0.5))
    vals = [p.value for p in spectrum(op)]
    np.testing.assert_allclose(vals, [1.0, 0.5, 0.25, 0.125], atol=1e-6)
    # the images lie in the span, so the residuals vanish
    assert np.max(op.residual_norms()) <= RESIDUAL_FLOOR
    assert np.max(op.orthogonality_defect()) <= 1e-8


def test_polynomial_spectrum_oracle_on_monomials():
    # Koopman acts on the monomial basis 1, x, x^2, x^3 by diag(a^j); compare the
    # projected Perron-Frobenius spectrum with that diagonal action
    a = 0.5
    companion = np.diag([a**j for j in range(4)])
    expected = sorted(np.linalg.eigvals(companion).real, reverse=True)
    op = pf_project(make_kernel("polynomial", degree=3), np.linspace(-1, 1, 6), f=scaling_map(a))
    np.testing.assert_allclose([p.value.real for p in spectrum(op)], expected, atol=1e-6)


def test_spectrum_cube_roots_of_unity():
    # the Gram matrix is the identity, so no regularization is needed
    k = make_kernel("discrete", M=np.eye(3))
    op = pf_project(k, [1, 2, 3], f=permutation_map([2, 3, 1]), reg=0.0)
    vals = np.array([p.value for p in spectrum(op)])
    oracle = np.linalg.eigvals(np.roll(np.eye(3), 1, axis=0))
    for r in oracle:
        assert np.min(np.abs(vals - r)) <= 1e-10
    # modulus ties are broken by ascending phase
    assert np.all(np.diff(np.angle(vals)) > 0)


def test_spectrum_cube_roots_default_reg_perturbation():
    k = make_kernel("discrete", M=np.eye(3))
    op = pf_project(k, [1, 2, 3], f=permutation_map([2, 3, 1]))
    bound = op.dictionary.reg / op.dictionary.eigenvalues.min() + 1e-15
    vals = np.array([p.value for p in spectrum(op)])
    for r in np.exp(2j * np.pi * np.arange(3) / 3):
        assert np.min(np.abs(vals - r)) <= bound


def test_eigen_sections_are_eigenfunctions():
    k = make_kernel("polynomial", degree=3)
    X = np.linspace(-1, 1, 6)
    op = pf_project(k, X, f=scaling_map(0.5))
    Y = np.linspace(-2, 2, 7)
    for p in spectrum(op):
        # K_f applied to the eigen-section equals lambda times it
        pushed = embed_eval_many(pf_apply(scaling_map(0.5), AtomicMeasure(X, p.coeffs)), k, Y)
        np.testing.assert_allclose(pushed, p.value * p.evaluate(Y), atol=1e-6 * np.max(np.abs(pushed)))
        assert p(Y[0]) == pytest.approx(p.evaluate(Y[:1])[0])


def test_projection_orthogonality_well_conditioned():
    k = make_kernel("gaussian", sigma=0.3)
    X = np.linspace(-2, 2, 8)
    op = pf_project(k, X, f=lambda x: np.sin(x))
    assert np.max(op.orthogonality_defect()) <= 1e-8


def test_projection_complex_kernel_orthogonality():
    k = make_kernel("szego")
    X = k.sample(6, seed=3)
    op = pf_project(k, X, f=mobius_map(1j, 0.1))
    assert np.max(op.orthogonality_defect()) <= 1e-8


# -- representation matrices -------------------------------------------------


def _discrete_oracle(M, sigma):
    """Coordinates of K_sigma applied to every section, by kernel evaluation."""
    k = make_kernel("discrete", M=M)
    n = M.shape[0]
    idx = np.arange(1, n + 1)
    S = np.column_stack([[k(i, j) for j in idx] for i in idx])
    S_sig = np.column_stack([[k(sigma[i - 1], j) for j in idx] for i in idx])
    return np.linalg.solve(S.T, S_sig.T).T


def _linear_oracle(M, A):
    """Coordinates ``a`` of ``g_a = k(z, .)`` are the values ``k(z, e_j)``."""
    k = make_kernel("linearform", M=M)
    n = M.shape[0]
    E = np.eye(n)
    S = np.column_stack([[k(E[i], E[j]) for j in range(n)] for i in range(n)])
    S_A = np.column_stack([[k(A @ E[i], E[j]) for j in range(n)] for i in range(n)])
    return np.linalg.solve(S.T, S_A.T).T


def test_rep_discrete_identity_permutation():
    M = np.random.default_rng(0).standard_normal((3, 3)) + 3 * np.eye(3)
    np.testing.assert_allclose(rep_matrix_discrete(M, [1, 2, 3]).matrix, np.eye(3), atol=1e-14)


def test_rep_discrete_swap():
    np.testing.assert_array_equal(rep_matrix_discrete(np.eye(2), [2, 1]).matrix, [[0, 1], [1, 0]])


def test_rep_discrete_against_oracle():
    rng = np.random.default_rng(1)
    for _ in range(20):
        M = rng.standard_normal((4, 4)) + 4 * np.eye(4)
        sigma = rng.permutation(4) + 1
        rep = rep_matrix_discrete(M, sigma)
        np.testing.assert_allclose(rep.matrix, _discrete_oracle(M, sigma), atol=1e-10)


def test_rep_discrete_closed_form_agrees_only_for_symmetric_m():
    rng = np.random.default_rng(2)
    B = rng.standard_normal((3, 3))
    M_sym = B @ B.T + 3 * np.eye(3)
    assert rep_matrix_discrete(M_sym, [2, 3, 1]).agrees
    assert not rep_matrix_discrete(M_sym + np.triu(B, 1), [2, 3, 1]).agrees


def test_rep_discrete_bad_permutation():
    with pytest.raises(ShapeError):
        rep_matrix_discrete(np.eye(3), [1, 2, 2])
    with pytest.raises(ShapeError):
        rep_matrix_discrete(np.eye(3), [1, 2])


def test_rep_linear_identity_m():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    rep = rep_matrix_linear(np.eye(2), A)
    np.testing.assert_allclose(rep.pf_rep, A, atol=1e-15)
    np.testing.assert_array_equal(rep.koopman_rep, A.T)


def test_rep_linear_identity_a():
    M = np.array([[2.0, 1.0], [0.5, 3.0]])
    rep = rep_matrix_linear(M, np.eye(2))
    np.testing.assert_allclose(rep.pf_rep, np.eye(2), atol=1e-15)
    np.testing.assert_array_equal(rep.koopman_rep, np.eye(2))


def test_rep_linear_against_oracle_and_duality():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        M = rng.standard_normal((n, n)) + n * np.eye(n)
        A = rng.standard_normal((n, n))
        rep = rep_matrix_linear(M, A)
        np.testing.assert_allclose(rep.pf_rep, _linear_oracle(M, A), atol=1e-10)
        np.testing.assert_array_equal(rep.koopman_rep, A.T)
        assert rep.duality_defect <= 1e-10
        # the pairing a^T M b makes the Koopman matrix the adjoint of the PF matrix
        a, b = rng.standard_normal(n), rng.standard_normal(n)
        lhs = (rep.koopman_rep @ a) @ M @ b
        rhs = a @ M @ (rep.pf_rep @ b)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_rep_linear_conditioning_error():
    with pytest.raises(ParameterError):
        rep_matrix_linear(np.diag([1.0, 1e-13]), np.eye(2))
