import math

import numpy as np
import pytest

from spherefield import rng
from spherefield.estimators import analyze_field
from spherefield.harmonics import build_grid
from spherefield.model import make_model_from_table, make_powerlaw_model
from spherefield.sampler import (
    CoefficientSet,
    coefficient_block,
    draw_coefficients,
    replicate_stream,
    synthesize_field,
)

Y00 = 1.0 / math.sqrt(4.0 * math.pi)


def test_draw_is_deterministic():
    model = make_powerlaw_model(6, 3, 1.0, 3.0, 2.0)
    a = draw_coefficients(model, 987, replicate=4)
    b = draw_coefficients(model, 987, replicate=4)
    assert np.array_equal(a.vectors, b.vectors)


def test_zero_model_gives_zero_coefficients():
    model = make_model_from_table(np.zeros((5, 2)))
    coeffs = draw_coefficients(model, 1, replicate=0)
    assert np.array_equal(coeffs.vectors, np.zeros_like(coeffs.vectors))


def test_replicate_from_stream_matches_single_draw():
    model = make_powerlaw_model(4, 2, 1.0, 3.0, 2.0)
    stream = list(replicate_stream(model, 55, 5))
    alone = draw_coefficients(model, 55, replicate=3)
    assert np.array_equal(stream[3].vectors, alone.vectors)


def test_distinct_seeds_differ():
    model = make_powerlaw_model(4, 2, 1.0, 3.0, 2.0)
    a = draw_coefficients(model, 1, replicate=0)
    b = draw_coefficients(model, 2, replicate=0)
    assert not np.array_equal(a.vectors, b.vectors)


def test_replicate_stream_rejects_bad_count():
    model = make_powerlaw_model(2, 1, 1.0, 3.0, 2.0)
    with pytest.raises(ValueError):
        replicate_stream(model, 1, 0)


def test_block_matches_scalar_stream_contract():
    # With unit eigenvalue and canonical frame, each coefficient entry is
    # exactly the keyed standard normal for its (replicate, ell, m, j).
    model = make_model_from_table(np.ones((4, 2)))
    block = coefficient_block(model, 77, 3, np.array([0, 5]))
    for r_pos, replicate in enumerate((0, 5)):
        for m_pos, m in enumerate(range(-3, 4)):
            for j in (1, 2):
                key = rng.StreamKey(master_seed=77, replicate=replicate, ell=3, m=m, j=j)
                assert block[r_pos, m_pos, j - 1] == rng.standard_normal(key)


def test_block_partitioning_is_order_independent():
    model = make_powerlaw_model(5, 3, 1.0, 3.0, 2.0)
    joint = coefficient_block(model, 3, 2, np.arange(100))
    pieces = np.concatenate(
        [coefficient_block(model, 3, 2, np.arange(a, b)) for a, b in ((0, 17), (17, 60), (60, 100))]
    )
    assert np.array_equal(joint, pieces)
    shuffled = coefficient_block(model, 3, 2, np.array([41, 7]))
    assert np.array_equal(shuffled[0], joint[41])
    assert np.array_equal(shuffled[1], joint[7])


def test_projection_moments_are_gaussian():
    # <a, e_j> ~ N(0, lambda_j): check 2nd and 4th moments at 10^4 draws.
    lam = 0.8
    model = make_model_from_table(np.array([[lam, 0.3]] * 3))
    block = coefficient_block(model, 31, 1, np.arange(10_000))
    proj = block[:, :, 0].ravel()  # canonical frame: first coordinate
    n = proj.shape[0]
    m2 = float(np.mean(proj**2))
    se2 = float(np.std(proj**2, ddof=1) / math.sqrt(n))
    assert abs(m2 - lam) <= 4.0 * se2
    m4 = float(np.mean(proj**4))
    se4 = float(np.std(proj**4, ddof=1) / math.sqrt(n))
    assert abs(m4 - 3.0 * lam**2) <= 4.0 * se4


def test_empirical_coefficient_covariance():
    # E[a (x) a] must equal the model operator; rank-2 worked case.
    model = make_model_from_table(np.array([[0.1, 0.1], [1.0, 0.5]]))
    n_rep = 20_000
    block = coefficient_block(model, 2025, 1, np.arange(n_rep))
    flat = block.reshape(-1, 2)  # (R * 3, 2) coefficient vectors
    outer = np.einsum("ni,nj->nij", flat, flat)
    emp = outer.mean(axis=0)
    se = outer.std(axis=0, ddof=1) / math.sqrt(flat.shape[0])
    target = np.diag([1.0, 0.5])
    assert np.all(np.abs(emp - target) <= 4.0 * se)


def test_fourth_moment_of_coefficient_norm():
    model = make_model_from_table(np.array([[1.0, 0.5, 0.25]] * 2))
    lam = model.eigenvalues[1]
    expected = 2.0 * float(np.sum(lam**2)) + float(np.sum(lam)) ** 2
    block = coefficient_block(model, 6060, 1, np.arange(20_000))
    norms4 = np.sum(block**2, axis=2).ravel() ** 2
    emp = float(np.mean(norms4))
    se = float(np.std(norms4, ddof=1) / math.sqrt(norms4.shape[0]))
    assert abs(emp - expected) <= 4.0 * se


def test_synthesize_constant_coefficient():
    model = make_model_from_table(np.array([[2.0, 1.0]]))
    grid = build_grid(0)
    u = np.array([1.5, -2.0])
    vectors = u[None, :].copy()
    coeffs = CoefficientSet(band_limit=0, dim=2, vectors=vectors)
    field = synthesize_field(coeffs, grid)
    assert np.allclose(field.values, u[None, :] * Y00, atol=1e-14)


def test_synthesis_analysis_round_trip():
    model = make_powerlaw_model(8, 3, 1.0, 3.0, 2.0, frame_mode="random_orthogonal", frame_seed=1)
    grid = build_grid(8)
    coeffs = draw_coefficients(model, 808, replicate=2)
    recovered = analyze_field(synthesize_field(coeffs, grid), 8)
    assert np.max(np.abs(recovered.vectors - coeffs.vectors)) <= 1e-10


def test_synthesize_band_limit_mismatch():
    model = make_powerlaw_model(6, 2, 1.0, 3.0, 2.0)
    coeffs = draw_coefficients(model, 4, replicate=0)
    with pytest.raises(ValueError):
        synthesize_field(coeffs, build_grid(5))


def test_spatial_variance_matches_spectral_sum():
    # (1/4pi) integral of ||T||^2 over the sphere vs the trace identity.
    model = make_powerlaw_model(3, 2, 1.0, 3.0, 2.0)
    grid = build_grid(3)
    weights = (2 * np.arange(4) + 1) / (4.0 * math.pi)
    expected = float(np.dot(model.eigenvalues.sum(axis=1), weights))
    n_rep = 2000
    samples = np.empty(n_rep)
    for r, coeffs in enumerate(replicate_stream(model, 1234, n_rep)):
        field = synthesize_field(coeffs, grid)
        samples[r] = float(np.sum(grid.weights * np.sum(field.values**2, axis=1))) / (4.0 * math.pi)
    emp = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(n_rep))
    assert abs(emp - expected) <= 4.0 * se


def test_isotropy_equal_separation_pairs():
    # Cross-covariance traces depend only on the angle between nodes:
    # compare two pairs on the same colatitude ring with equal offsets.
    model = make_powerlaw_model(4, 2, 1.0, 3.0, 2.0)
    grid = build_grid(4)
    n_phi = grid.longitudes.shape[0]
    ring = 2  # colatitude row index
    base = ring * n_phi
    pair_a = (base + 0, base + 2)
    pair_b = (base + 3, base + 5)
    dot_a = float(np.dot(grid.nodes[pair_a[0]], grid.nodes[pair_a[1]]))
    dot_b = float(np.dot(grid.nodes[pair_b[0]], grid.nodes[pair_b[1]]))
    assert dot_a == pytest.approx(dot_b, abs=1e-12)
    n_rep = 4000
    vals_a = np.empty(n_rep)
    vals_b = np.empty(n_rep)
    for r, coeffs in enumerate(replicate_stream(model, 555, n_rep)):
        field = synthesize_field(coeffs, grid).values
        vals_a[r] = float(np.dot(field[pair_a[0]], field[pair_a[1]]))
        vals_b[r] = float(np.dot(field[pair_b[0]], field[pair_b[1]]))
    diff = vals_a - vals_b
    se = float(np.std(diff, ddof=1) / math.sqrt(n_rep))
    assert abs(float(np.mean(diff))) <= 5.0 * se
