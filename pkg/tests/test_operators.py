import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import qvigrid as q
from qvigrid.operators import ObstacleSide


def _sym(entries, dim):
    M = np.zeros((dim, dim))
    k = 0
    for i in range(dim):
        for j in range(i, dim):
            M[i, j] = M[j, i] = entries[k]
            k += 1
    return M


def sym_matrices(dim):
    n = dim * (dim + 1) // 2
    vals = st.floats(-5, 5, allow_nan=False)
    return st.lists(vals, min_size=n, max_size=n).map(lambda e: _sym(e, dim))


def psd_matrices(dim):
    return sym_matrices(dim).map(lambda M: M @ M.T + 0.0)


def specs(dim):
    lam_Lam = st.tuples(st.floats(0.2, 1.5), st.floats(0.0, 3.0)).map(
        lambda t: (t[0], t[0] + t[1]))

    def build(kind, lam, Lam, seed):
        if kind == q.LAPLACE:
            # the trace operator has intrinsic constants (1, 1)
            return q.OperatorSpec(kind)
        if kind in (q.BELLMAN_MIN, q.BELLMAN_MAX):
            rng = np.random.default_rng(seed)
            mats = []
            for _ in range(3):
                Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
                eig = rng.uniform(lam, Lam, dim)
                mats.append(Q @ np.diag(eig) @ Q.T)
            return q.OperatorSpec(kind, lam, Lam, tuple(mats))
        return q.OperatorSpec(kind, lam, Lam)

    return st.tuples(
        st.sampled_from([q.LAPLACE, q.PUCCI_PLUS, q.PUCCI_MINUS,
                         q.BELLMAN_MIN, q.BELLMAN_MAX]),
        lam_Lam, st.integers(0, 10 ** 6),
    ).map(lambda t: build(t[0], t[1][0], t[1][1], t[2]))


def test_laplace_is_trace():
    spec = q.OperatorSpec(q.LAPLACE)
    M = np.array([[2.0, 1.0], [1.0, -3.0]])
    assert q.evaluate(spec, M) == pytest.approx(-1.0)


def test_pucci_closed_forms():
    plus = q.OperatorSpec(q.PUCCI_PLUS, lam=0.5, Lam=2.0)
    minus = q.OperatorSpec(q.PUCCI_MINUS, lam=0.5, Lam=2.0)
    M = np.diag([3.0, -1.0])
    # eigenvalues 3 and -1: plus weighs positives by Lam and negatives by
    # lam; minus does the opposite.
    assert q.evaluate(plus, M) == pytest.approx(2.0 * 3.0 + 0.5 * (-1.0))
    assert q.evaluate(minus, M) == pytest.approx(0.5 * 3.0 + 2.0 * (-1.0))


def test_bellman_min_max_over_family():
    A1 = np.diag([1.0, 2.0])
    A2 = np.diag([2.0, 1.0])
    mn = q.OperatorSpec(q.BELLMAN_MIN, 1.0, 2.0, (A1, A2))
    mx = q.OperatorSpec(q.BELLMAN_MAX, 1.0, 2.0, (A1, A2))
    M = np.diag([1.0, -1.0])
    # tr(A1 M) = 1 - 2 = -1,  tr(A2 M) = 2 - 1 = 1
    assert q.evaluate(mn, M) == pytest.approx(-1.0)
    assert q.evaluate(mx, M) == pytest.approx(1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        q.OperatorSpec(q.PUCCI_PLUS, lam=2.0, Lam=1.0)
    with pytest.raises(ValueError):
        q.OperatorSpec(q.PUCCI_PLUS, lam=0.0, Lam=1.0)
    with pytest.raises(ValueError):
        q.OperatorSpec("squircle")
    with pytest.raises(ValueError):
        q.OperatorSpec(q.BELLMAN_MIN)  # needs matrices
    with pytest.raises(ValueError):
        # spectrum outside [lam, Lam]
        q.OperatorSpec(q.BELLMAN_MIN, 1.0, 2.0, (np.diag([1.0, 5.0]),))
    with pytest.raises(ValueError):
        # asymmetric coefficient matrix
        q.OperatorSpec(q.BELLMAN_MIN, 1.0, 2.0,
                       (np.array([[1.0, 0.5], [0.0, 1.0]]),))


@given(specs(2), sym_matrices(2), psd_matrices(2))
@settings(max_examples=60, deadline=None)
def test_uniform_ellipticity(spec, M, P):
    lo = q.evaluate(spec, M) + spec.lam * np.linalg.norm(P, 2)
    hi = q.evaluate(spec, M) + spec.Lam * 2 * np.linalg.norm(P, 2)
    val = q.evaluate(spec, M + P)
    slack = 1e-9 * (1 + abs(val) + abs(lo) + abs(hi))
    assert lo - slack <= val <= hi + slack


@given(specs(2), sym_matrices(2))
@settings(max_examples=60, deadline=None)
def test_duality_involution(spec, M):
    d = q.dual(spec)
    assert q.evaluate(d, M) == pytest.approx(-q.evaluate(spec, -M), abs=1e-10)
    dd = q.dual(d)
    assert dd.kind == spec.kind


@given(specs(2), sym_matrices(2))
@settings(max_examples=60, deadline=None)
def test_pucci_extremality(spec, M):
    plus = q.OperatorSpec(q.PUCCI_PLUS, spec.lam, spec.Lam)
    minus = q.OperatorSpec(q.PUCCI_MINUS, spec.lam, spec.Lam)
    val = q.evaluate(spec, M)
    tol = 1e-9 * (1 + abs(val))
    assert q.evaluate(minus, M) - tol <= val <= q.evaluate(plus, M) + tol


def test_dual_kind_mapping():
    assert q.dual(q.OperatorSpec(q.LAPLACE)).kind == q.LAPLACE
    assert q.dual(q.OperatorSpec(q.PUCCI_PLUS)).kind == q.PUCCI_MINUS
    assert q.dual(q.OperatorSpec(q.PUCCI_MINUS)).kind == q.PUCCI_PLUS
    A = (np.eye(2),)
    assert q.dual(q.OperatorSpec(q.BELLMAN_MIN, 1, 1, A)).kind == q.BELLMAN_MAX


def test_discrete_hessian_quadratic_is_exact():
    g = q.build_grid([-1.0, -1.0], [1.0, 1.0], [11, 11])
    u = q.GridFunction.from_callable(
        g, lambda x, y: 2 * x ** 2 - x * y + 3 * y ** 2)
    H = q.discrete_hessian(u, (5, 5))
    assert np.allclose(H, [[4.0, -1.0], [-1.0, 6.0]], atol=1e-9)
    with pytest.raises(ValueError):
        q.discrete_hessian(u, (0, 5))


def test_apply_operator_laplace_quadratic():
    g = q.build_grid([-1.0], [1.0], [21])
    u = q.GridFunction.from_callable(g, lambda x: x ** 2)
    F = q.apply_operator(q.OperatorSpec(q.LAPLACE), u)
    assert np.allclose(F.values[1:-1], 2.0, atol=1e-9)
    assert np.isnan(F.values[0]) and np.isnan(F.values[-1])


def test_complementarity_residual_zero_at_solution(oracle1d_solution):
    g = oracle1d_solution.grid
    obstacle = q.GridFunction.from_callable(g, lambda x: 0.5 - x ** 2)
    r = q.complementarity_residual(
        q.OperatorSpec(q.LAPLACE), oracle1d_solution, obstacle,
        q.GridFunction.zeros(g), ObstacleSide.LOWER)
    assert np.nanmax(np.abs(r.values)) < 1e-6


def test_complementarity_residual_detects_violation():
    g = q.build_grid([-1.0], [1.0], [21])
    obstacle = q.GridFunction.constant(g, 0.5)
    u = q.GridFunction.zeros(g)  # below the obstacle everywhere
    r = q.complementarity_residual(
        q.OperatorSpec(q.LAPLACE), u, obstacle, q.GridFunction.zeros(g),
        ObstacleSide.LOWER)
    assert np.nanmin(r.values) == pytest.approx(-0.5)
