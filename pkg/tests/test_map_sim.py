import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cycloproj.linalg import gram_factor, operator_norm
from cycloproj.map_sim import (
    power_error_norm,
    product_operator,
    product_operator_norm,
    rate_check,
    run_map,
)
from cycloproj.subspaces import Subspace, SubspaceSystem, friedrichs_number, intersection_projector, lines_system, random_system

seeds = st.integers(0, 2**32 - 1)


def test_intersection_start_is_fixed():
    E = np.eye(3)
    sys = SubspaceSystem.from_spans([E[:, :2], E[:, 1:]])
    tr = run_map(sys, [0, 2.5, 0], 4)
    assert tr.errors == [0.0] * 5
    assert all(np.allclose(x, tr.iterates[0]) for x in tr.iterates)
    assert tr.contraction == [None] * 4


def test_two_lines_decay():
    phi = np.pi / 3
    sys = lines_system([0, phi])
    tr = run_map(sys, [1, 0], 5)
    for k in range(1, 6):
        # e1 lies in H1, so the error is exactly cos^(2k-1)
        assert tr.errors[k] == pytest.approx(np.cos(phi) ** (2 * k - 1), abs=1e-14)
    assert power_error_norm(sys, 2) == pytest.approx(0.125, abs=1e-14)
    assert product_operator_norm(sys) == pytest.approx(0.5, abs=1e-14)


def test_orthogonal_lines_converge_in_one_sweep():
    tr = run_map(lines_system([0, np.pi / 2]), [0.3, -2], 3)
    assert tr.errors[1] <= 1e-16 and tr.errors[3] <= 1e-16


def test_dimension_mismatch_and_sweeps():
    with pytest.raises(ValueError):
        run_map(lines_system([0, 1]), [1, 0, 0], 2)
    with pytest.raises(ValueError):
        run_map(lines_system([0, 1]), [1, 0], 0)


def test_trace_records_steps_and_csv():
    tr = run_map(lines_system([0, 1, 2]), [1, 1], 2, record_steps=True)
    assert len(tr.steps) == 1 + 2 * 3
    lines = tr.to_csv().splitlines()
    assert lines[0] == "sweep,error,ratio"
    assert len(lines) == 4 and lines[1].endswith(",")


def test_identical_subspaces_product_is_p0():
    H = Subspace.span(np.eye(4)[:, :2])
    assert product_operator_norm(SubspaceSystem(4, (H, H, H))) <= 1e-14


def test_witness_product_is_superdiagonal_product():
    s = np.sqrt(0.5)
    A = np.array([[1, s, 0], [s, 1, s], [0, s, 1]])
    V = gram_factor(A)
    sys = SubspaceSystem(3, tuple(Subspace(V[:, [k]]) for k in range(3)))
    assert operator_norm(product_operator(sys)) == pytest.approx(0.5, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_semigroup_and_monotone_errors(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(2, 5)), int(rng.integers(2, 6))
    sys = random_system(rng, n, d, common_dim=int(rng.integers(0, 2)) if d > 2 else 0)
    T, P0 = product_operator(sys), intersection_projector(sys)
    for k in (1, 2, 3):
        lhs = power_error_norm(sys, k)
        rhs = operator_norm(np.linalg.matrix_power(T - P0, k))
        assert lhs == pytest.approx(rhs, abs=1e-9)
    tr = run_map(sys, rng.normal(size=d) + 1j * rng.normal(size=d), 6)
    assert all(b <= a + 1e-12 for a, b in zip(tr.errors, tr.errors[1:]))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_kayalar_weinert(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 9))
    sys = random_system(rng, 2, d)
    cf = friedrichs_number(sys)
    for k in (1, 2, 3):
        assert power_error_norm(sys, k) == pytest.approx(cf ** (2 * k - 1), abs=1e-7)


def test_rate_check_two_lines_tight():
    rep = rate_check(lines_system([0, np.pi / 3]), 0.5, 5)
    assert rep.ok
    assert rep.norms[0] == pytest.approx(rep.bounds[0], abs=1e-12)


def test_rate_check_random_three():
    sys = random_system(np.random.default_rng(11), 3, 4)
    c = friedrichs_number(sys)
    rep = rate_check(sys, c, 4)
    assert rep.ok
    with pytest.raises(ValueError):
        rate_check(sys, c - 0.05, 1)


def test_rate_check_trivial_system():
    H = Subspace.span(np.eye(3)[:, :1])
    rep = rate_check(SubspaceSystem(3, (H, H, H)), 0.0, 3)
    assert rep.ok and max(rep.norms) <= 1e-14
