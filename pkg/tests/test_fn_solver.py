import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cycloproj.bounds import f3_closed
from cycloproj.fn_solver import (
    FeasibleSpec,
    InfeasibleError,
    ProjectionError,
    alternating_matrix,
    canonicalize,
    certify_optimal,
    check_feasible,
    maximize_product,
    product,
    project_feasible,
    reverse,
    solve_grid,
    subspace_witness,
)
from cycloproj.linalg import psd_distance

S = np.sqrt(0.5)
F3_HALF = np.array([[1, S, 0], [S, 1, S], [0, S, 1]])
F3_02 = np.array([[1, 0.4, -0.4], [0.4, 1, 0.4], [-0.4, 0.4, 1]])


def assert_canonical(A, spec, tol=1e-8):
    assert np.allclose(np.diag(A), 1, atol=1e-9)
    assert np.allclose(A, reverse(A), atol=1e-9)
    assert np.all(np.diag(A, 1) >= 0)
    w = np.linalg.eigvalsh(A)
    assert w[0] >= -tol and w[-1] <= spec.t + tol


def test_spec_validation():
    assert FeasibleSpec(4, 0.5).t == 2.5
    with pytest.raises(ValueError):
        FeasibleSpec(1, 0.5)
    with pytest.raises(ValueError):
        FeasibleSpec(3, 1.5)


def test_check_feasible_names_constraint():
    with pytest.raises(InfeasibleError, match="lambda_max"):
        check_feasible(np.ones((3, 3)), FeasibleSpec(3, 0.5))
    with pytest.raises(InfeasibleError, match="diagonal"):
        check_feasible(np.diag([1, 2.0]), FeasibleSpec(2, 0.5))


def test_canonicalize_examples():
    spec = FeasibleSpec(3, 0.5)
    assert np.allclose(canonicalize(F3_HALF, spec), F3_HALF, atol=1e-15)
    out = canonicalize([[1, -0.3], [-0.3, 1]], FeasibleSpec(2, 0.5))
    assert out[0, 1] == pytest.approx(0.3)
    n, c = 4, 0.05
    M = np.eye(n) - (n - 1) * c * (np.ones((n, n)) - np.eye(n))
    out = canonicalize(M, FeasibleSpec(n, c))
    assert np.allclose(out, alternating_matrix(n, (n - 1) * c), atol=1e-15)
    with pytest.raises(InfeasibleError):
        canonicalize(np.ones((3, 3)), spec)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.floats(0.05, 1))
def test_canonicalize_keeps_product(seed, n, c):
    rng = np.random.default_rng(seed)
    spec = FeasibleSpec(n, c)
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    X = np.eye(n) + 0.3 * c * (X + X.conj().T)
    # push into H_n(t) by clipping and rescaling to unit diagonal
    w, V = np.linalg.eigh(X)
    X = (V * np.clip(w, 0, None)) @ V.conj().T
    d = np.sqrt(np.real(np.diag(X)))
    X = X / np.outer(d, d)
    if np.linalg.eigvalsh(X)[-1] > spec.t:
        return
    out = canonicalize(X, spec)
    assert_canonical(out, spec)
    assert product(out) >= product(X) - 1e-12


def test_projection_examples():
    spec = FeasibleSpec(3, 0.5)
    assert np.allclose(project_feasible(F3_HALF, spec), F3_HALF, atol=1e-9)
    rng = np.random.default_rng(0)
    X = rng.normal(size=(4, 4))
    assert np.allclose(project_feasible(X, FeasibleSpec(4, 0.0)), np.eye(4), atol=1e-9)
    P = project_feasible(np.ones((3, 3)), spec)
    assert psd_distance(P) <= 1e-8 and np.linalg.eigvalsh(P)[-1] <= 2 + 1e-8
    assert np.allclose(np.diag(P), 1) and np.allclose(P, reverse(P))


def test_projection_round_cap():
    with pytest.raises(ProjectionError):
        project_feasible(5 * np.ones((4, 4)), FeasibleSpec(4, 0.3), max_rounds=2)


def test_solver_examples():
    r = maximize_product(FeasibleSpec(3, 0.2), starts=8, seed=42)
    assert r.f_estimate == pytest.approx(0.16, abs=1e-6)
    assert np.allclose(r.optimum, F3_02, atol=1e-4)
    r = maximize_product(FeasibleSpec(3, 0.5))
    assert r.f_estimate == pytest.approx(0.5, abs=1e-6)
    assert np.allclose(r.optimum, F3_HALF, atol=1e-4)
    r = maximize_product(FeasibleSpec(4, 0.05))
    assert r.f_estimate == pytest.approx(3.375e-3, abs=1e-6)


def test_result_invariants_and_json():
    r = maximize_product(FeasibleSpec(4, 0.4))
    assert_canonical(r.optimum, r.spec)
    assert r.f_estimate == pytest.approx(product(r.optimum), abs=1e-12)
    assert abs(r.witness_product_norm - r.f_estimate) <= 1e-7
    assert r.witness_dixmier <= 0.4 + 1e-7
    assert r.certified and r.starts_used == 8
    d = json.loads(r.dumps())
    assert list(d) == [
        "n", "c", "t", "f_estimate", "optimum", "certificate_value", "certificate_gap",
        "witness_product_norm", "witness_dixmier", "starts_used", "iterations", "seed",
    ]
    assert np.allclose(d["optimum"], r.optimum)


def test_c_zero_short_circuit():
    r = maximize_product(FeasibleSpec(5, 0.0))
    assert r.f_estimate == 0.0 and np.array_equal(r.optimum, np.eye(5)) and r.iterations == 0


def test_starts_must_be_positive():
    with pytest.raises(ValueError):
        maximize_product(FeasibleSpec(3, 0.5), starts=0)


@pytest.mark.parametrize("n", [2, 3])
def test_closed_form_grid(n):
    grid = np.linspace(0, 1, 21)
    for r, c in zip(solve_grid(n, grid, certify=False), grid):
        ref = c if n == 2 else f3_closed(c)
        assert abs(r.f_estimate - ref) <= 1e-5


def test_grid_is_deterministic_and_ordered():
    a = solve_grid(3, [0.1, 0.6], certify=False)
    b = solve_grid(3, [0.1, 0.6], certify=False, workers=2)
    assert [r.dumps() for r in a] == [r.dumps() for r in b]
    assert [r.seed for r in a] == [42, 43]


def test_optimal_superdiagonal_is_seed_independent():
    spec = FeasibleSpec(5, 0.6)
    a = maximize_product(spec, seed=1, certify=False)
    b = maximize_product(spec, seed=2, certify=False)
    assert np.allclose(np.diag(a.optimum, 1), np.diag(b.optimum, 1), atol=1e-5)


def test_certificate_examples():
    A = np.array([[1, 0.5], [0.5, 1]])
    assert certify_optimal(A, FeasibleSpec(2, 0.5)) == pytest.approx(1, abs=1e-9)
    assert certify_optimal(F3_HALF, FeasibleSpec(3, 0.5)) <= 2 + 1e-6
    bad = np.array([[1, 0.3, 0], [0.3, 1, 0.3], [0, 0.3, 1]])
    assert certify_optimal(bad, FeasibleSpec(3, 0.5)) > 2
    with pytest.raises(ValueError):
        certify_optimal(np.eye(3), FeasibleSpec(3, 0.5))


def test_certificate_matches_b12_grid_n2():
    # feasibility forces b12 <= c, so the functional peaks at b12 = c
    c = 0.5
    grid = np.linspace(0, 1, 2001)
    ok = [b for b in grid if np.linalg.eigvalsh([[1, b], [b, 1]])[-1] <= 1 + c + 1e-12]
    assert max(ok) / 0.5 == pytest.approx(1)


def test_witness_examples():
    _, pn, cd = subspace_witness(np.eye(4), FeasibleSpec(4, 0.3))
    assert pn <= 1e-14 and cd <= 1e-14
    _, pn, cd = subspace_witness(F3_HALF, FeasibleSpec(3, 0.5))
    assert pn == pytest.approx(0.5, abs=1e-7) and cd <= 0.5 + 1e-7
    _, pn, _ = subspace_witness(alternating_matrix(4, 0.15), FeasibleSpec(4, 0.05))
    assert pn == pytest.approx(3.375e-3, abs=1e-7)


@pytest.mark.parametrize("n,c,ref", [(4, 0.25, 0.2082796682), (4, 0.6, 0.640287364), (5, 0.3, 0.304122571)])
def test_against_conic_solver(n, c, ref):
    """Reference values from an interior-point solve of the log-objective program."""
    r = maximize_product(FeasibleSpec(n, c), certify=False)
    assert r.f_estimate == pytest.approx(ref, abs=1e-7)


def test_conic_oracle_live():
    cp = pytest.importorskip("cvxpy")
    n, c = 4, 0.45
    X = cp.Variable((n, n), symmetric=True)
    t = 1 + (n - 1) * c
    cons = [cp.diag(X) == 1, X >> 0, t * np.eye(n) - X >> 0]
    prob = cp.Problem(cp.Maximize(sum(cp.log(X[i, i + 1]) for i in range(n - 1))), cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        pytest.skip("conic solver unavailable")
    r = maximize_product(FeasibleSpec(n, c), certify=False)
    assert r.f_estimate == pytest.approx(np.exp(prob.value), abs=1e-6)
