import numpy as np
import pytest

from spherefield.operators import (
    CltCovariance,
    OperatorOnH,
    TruncatedSpace,
    clt_covariance,
    hs_inner,
    identity_operator,
    operator_from_entries,
    outer_product,
    schatten_norm,
    sym_basis,
    sym_basis_pairs,
    sym_basis_tensor,
    trace,
)


def random_operator(gen, dim, self_adjoint=False):
    entries = gen.normal(size=(dim, dim))
    if self_adjoint:
        entries = (entries + entries.T) / 2.0
    return operator_from_entries(entries, self_adjoint=self_adjoint)


def random_psd(gen, dim):
    a = gen.normal(size=(dim, dim))
    return operator_from_entries(a @ a.T, self_adjoint=True)


def random_orthogonal(gen, dim):
    q, r = np.linalg.qr(gen.normal(size=(dim, dim)))
    return q * np.sign(np.diag(r))[None, :]


# ---------------------------------------------------------------------------
# Schatten norms and trace


def test_schatten_identity():
    op = identity_operator(TruncatedSpace(dim=4))
    assert schatten_norm(op, 2.0) == pytest.approx(2.0, abs=1e-14)


def test_schatten_diagonal():
    op = operator_from_entries(np.diag([3.0, 4.0, 0.0, 0.0]), self_adjoint=True)
    assert schatten_norm(op, 1.0) == pytest.approx(7.0, abs=1e-13)
    assert schatten_norm(op, 2.0) == pytest.approx(5.0, abs=1e-13)
    assert schatten_norm(op, np.inf) == pytest.approx(4.0, abs=1e-13)


def test_schatten_frobenius_identity():
    gen = np.random.default_rng(5)
    for _ in range(20):
        op = random_operator(gen, 5)
        assert schatten_norm(op, 2.0) ** 2 == pytest.approx(
            float(np.sum(op.entries**2)), rel=1e-12
        )


def test_schatten_rejects_bad_order():
    op = identity_operator(TruncatedSpace(dim=2))
    with pytest.raises(ValueError):
        schatten_norm(op, 0.5)
    with pytest.raises(ValueError):
        schatten_norm(op, np.nan)


def test_operator_rejects_nonfinite_entries():
    with pytest.raises(ValueError):
        operator_from_entries(np.array([[1.0, np.inf], [0.0, 1.0]]))


def test_operator_rejects_asymmetric_self_adjoint_flag():
    with pytest.raises(ValueError):
        operator_from_entries(np.array([[0.0, 1.0], [0.0, 0.0]]), self_adjoint=True)


def test_norm_ordering():
    # ||.||_inf <= ||.||_2 <= ||.||_1 on a large random family.
    gen = np.random.default_rng(17)
    for i in range(1000):
        dim = 2 + i % 5
        op = random_operator(gen, dim, self_adjoint=i % 2 == 0)
        op_inf = schatten_norm(op, np.inf)
        op_2 = schatten_norm(op, 2.0)
        op_1 = schatten_norm(op, 1.0)
        assert op_inf <= op_2 * (1 + 1e-12) + 1e-15
        assert op_2 <= op_1 * (1 + 1e-12) + 1e-15


def test_trace_examples():
    assert trace(identity_operator(TruncatedSpace(dim=3))) == 3.0
    gen = np.random.default_rng(3)
    u = gen.normal(size=6)
    assert trace(outer_product(u, u)) == pytest.approx(float(u @ u), rel=1e-14)


def test_trace_equals_nuclear_norm_for_psd():
    gen = np.random.default_rng(23)
    for _ in range(50):
        op = random_psd(gen, 4)
        assert trace(op) == pytest.approx(schatten_norm(op, 1.0), abs=1e-10)


# ---------------------------------------------------------------------------
# Tensor products and HS inner product


def test_outer_product_canonical():
    op = outer_product(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert np.array_equal(op.entries, np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_outer_product_defining_identity():
    gen = np.random.default_rng(9)
    u, v, w = gen.normal(size=(3, 7))
    op = outer_product(u, v)
    assert np.max(np.abs(op.apply(w) - u * float(w @ v))) <= 1e-14


def test_outer_product_rank_one_norm():
    gen = np.random.default_rng(10)
    u = gen.normal(size=5)
    assert schatten_norm(outer_product(u, u), 2.0) == pytest.approx(float(u @ u), rel=1e-13)


def test_outer_product_dimension_mismatch():
    with pytest.raises(ValueError):
        outer_product(np.zeros(3), np.zeros(4))


def test_hs_inner_identity():
    eye = identity_operator(TruncatedSpace(dim=5))
    assert hs_inner(eye, eye) == 5.0


def test_hs_inner_sym_basis_orthogonality():
    frame = np.eye(3)
    e11 = sym_basis(1, 1, frame)
    e21 = sym_basis(2, 1, frame)
    assert hs_inner(e11.operator, e21.operator) == 0.0


def test_hs_inner_matches_trace_identity():
    gen = np.random.default_rng(14)
    a = random_operator(gen, 6)
    b = random_operator(gen, 6)
    assert hs_inner(a, b) == pytest.approx(float(np.trace(a.entries @ b.entries.T)), rel=1e-12)


def test_hs_inner_dimension_mismatch():
    with pytest.raises(ValueError):
        hs_inner(identity_operator(TruncatedSpace(2)), identity_operator(TruncatedSpace(3)))


# ---------------------------------------------------------------------------
# Symmetric basis


def test_sym_basis_diagonal_element():
    elem = sym_basis(1, 1, np.eye(2))
    assert np.array_equal(elem.operator.entries, np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_sym_basis_off_diagonal_element():
    elem = sym_basis(2, 1, np.eye(2))
    s = 1.0 / np.sqrt(2.0)
    assert np.allclose(elem.operator.entries, np.array([[0.0, s], [s, 0.0]]), atol=1e-15)


def test_sym_basis_unit_norm_random_frame():
    gen = np.random.default_rng(8)
    frame = random_orthogonal(gen, 6)
    for j in range(1, 7):
        for jp in range(1, j + 1):
            elem = sym_basis(j, jp, frame)
            assert schatten_norm(elem.operator, 2.0) == pytest.approx(1.0, abs=1e-12)


def test_sym_basis_errors():
    with pytest.raises(ValueError):
        sym_basis(1, 2, np.eye(3))
    with pytest.raises(ValueError):
        sym_basis(2, 1, np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_sym_basis_orthonormal_and_complete():
    gen = np.random.default_rng(30)
    frame = random_orthogonal(gen, 6)
    tensor = sym_basis_tensor(frame)
    flat = tensor.reshape(tensor.shape[0], -1)
    gram = flat @ flat.T
    assert np.max(np.abs(gram - np.eye(flat.shape[0]))) <= 1e-12
    # Completeness: reconstruct a random symmetric operator from its
    # coordinates in the basis.
    sym = gen.normal(size=(6, 6))
    sym = (sym + sym.T) / 2.0
    coords = flat @ sym.ravel()
    rebuilt = (coords @ flat).reshape(6, 6)
    assert np.max(np.abs(rebuilt - sym)) <= 1e-12


# ---------------------------------------------------------------------------
# Estimator covariance in its eigenbasis


def test_clt_covariance_rank_one():
    lam = np.array([0.7, 0.0])
    cov = clt_covariance(lam, np.eye(2))
    by_pair = dict(cov.eigenpairs)
    assert by_pair[(1, 1)] == pytest.approx(2.0 * 0.7**2, rel=1e-14)
    assert cov.trace == pytest.approx(np.sum(lam**2) + np.sum(lam) ** 2, rel=1e-13)


def test_clt_covariance_worked_case():
    lam = np.array([1.0, 0.5])
    cov = clt_covariance(lam, np.eye(2))
    assert cov.trace == pytest.approx(3.5, abs=1e-12)
    assert cov.hs_norm_sq == pytest.approx(5.25, abs=1e-12)


def test_clt_covariance_identities_random():
    gen = np.random.default_rng(44)
    for _ in range(1000):
        dim = 2 + int(gen.integers(0, 5))
        lam = gen.uniform(0.0, 3.0, size=dim)
        cov = clt_covariance(lam, np.eye(dim))
        hs_sq = float(np.sum(lam**2))
        c = float(np.sum(lam))
        s4 = float(np.sum(lam**4))
        assert abs(cov.trace - (hs_sq + c**2)) <= 1e-10 * max(1.0, hs_sq + c**2)
        assert abs(cov.hs_norm_sq - 2.0 * (s4 + hs_sq**2)) <= 1e-10 * max(1.0, s4 + hs_sq**2)


def test_clt_covariance_positive_definite():
    gen = np.random.default_rng(45)
    lam = gen.uniform(0.1, 2.0, size=4)
    cov = clt_covariance(lam, np.eye(4))
    assert all(v > 0 for _, v in cov.eigenpairs)
    assert len(cov.eigenpairs) == len(sym_basis_pairs(4)) == 10


def test_clt_covariance_rejects_negative():
    with pytest.raises(ValueError):
        clt_covariance(np.array([1.0, -0.1]), np.eye(2))
