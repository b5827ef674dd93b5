import numpy as np
import pytest

from sepkit.concave import (
    ConcaveOptions,
    check_concavity,
    feasible_point_from_cut,
    grid_oracle_n3,
    hessian_f,
    hessian_quadratic_form,
    linear_subproblem,
    objective_gradient,
    solve_concave,
)
from sepkit.corpus import complete_graph, cycle_graph, gnp_graph, path_graph
from sepkit.embeddings import ZForm, objective_z, zform_spread_requirement
from sepkit.graphs import (
    Cut,
    Graph,
    InfeasibleBalanceError,
    brute_force_cut_values,
    exact_balanced_separator,
)

C = 0.25
P_INNER = (0.5, 1.0, 1.5)


def test_options_validation():
    with pytest.raises(ValueError):
        ConcaveOptions(starts=0)
    with pytest.raises(ValueError):
        ConcaveOptions(inner_tol=0.0)


def test_hessian_at_unit_point_q2():
    s = hessian_f(1.0, 1.0, 2.0)
    assert np.allclose(s.matrix, [[-0.5, 0.5], [0.5, -0.5]], atol=1e-12)
    eigs = np.linalg.eigvalsh(s.matrix)
    assert eigs[0] == pytest.approx(-1.0, abs=1e-12)
    assert eigs[1] == pytest.approx(0.0, abs=1e-12)


def test_hessian_symmetric_on_diagonal_points():
    for q in (4.0 / 3.0, 2.0, 4.0):
        for t in (0.3, 1.0, 1.7):
            s = hessian_f(t, t, q)
            assert s.matrix[0, 0] == pytest.approx(s.matrix[1, 1], rel=1e-12)


def test_hessian_domain_errors():
    with pytest.raises(ValueError):
        hessian_f(1.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        hessian_f(0.0, 1.0, 3.0)
    with pytest.raises(ValueError):
        hessian_f(1.0, 1.0, 0.5)


def test_quadratic_form_matches_hessian_directly():
    rng = np.random.default_rng(0)
    for _ in range(200):
        x, y = rng.uniform(0.05, 2.0, size=2)
        q = rng.uniform(1.1, 5.0)
        a, b = rng.uniform(-2.0, 2.0, size=2)
        h = hessian_f(x, y, q).matrix
        direct = np.array([a, b]) @ h @ np.array([a, b])
        factored = hessian_quadratic_form(x, y, q, a, b)
        assert factored == pytest.approx(direct, rel=1e-9, abs=1e-12)
        assert factored <= 1e-12


def test_check_concavity_passes_for_valid_q():
    for q in (2.0, 4.0 / 3.0):
        rep = check_concavity(q, samples=300, seed=1)
        assert rep.passed, rep
        assert rep.max_eigenvalue <= 1e-8
        assert rep.max_fd_relative_error <= 1e-4
        assert rep.max_quadform_relative_error <= 1e-6


def test_check_concavity_rejects_small_q():
    with pytest.raises(ValueError):
        check_concavity(0.5)


def test_feasible_point_from_cut():
    g = cycle_graph(4)
    z = feasible_point_from_cut(g, Cut({0, 1}), C)
    assert z.matrix[0, 1] == 0.0
    assert z.matrix[0, 2] == 2.0
    for p in (0.25, 0.5, 1.0, 1.5, 1.9):
        assert objective_z(g, z, p) == pytest.approx(2.0, abs=1e-12)
    g2 = Graph(2, ((0, 1),))
    z2 = feasible_point_from_cut(g2, Cut({0}))
    assert z2.matrix.tolist() == [[0.0, 2.0], [2.0, 0.0]]
    with pytest.raises(InfeasibleBalanceError):
        feasible_point_from_cut(g, Cut(set()))
    with pytest.raises(InfeasibleBalanceError):
        feasible_point_from_cut(g, Cut({0}), C)  # size 1 not 1/4-balanced on n=4


def test_linear_subproblem_two_vertex_hand_cases():
    g = Graph(2, ((0, 1),))
    up = np.array([[0.0, 0.5], [0.5, 0.0]])
    z = linear_subproblem(up, g, C, 1e-6, 1.0, z0=np.array([[0.0, 2.0], [2.0, 0.0]]))
    assert z.matrix[0, 1] == pytest.approx(2 * C * (1 - C) * 4, abs=1e-5)
    z = linear_subproblem(-up, g, C, 1e-6, 1.0)
    assert z.matrix[0, 1] == pytest.approx(2.0, abs=1e-5)


def test_solve_concave_sound_on_small_graphs():
    for g in [cycle_graph(4), complete_graph(4), path_graph(5), gnp_graph(6, 0.5, 1)]:
        _, alpha = exact_balanced_separator(g, C)
        for p in P_INNER:
            _, rep = solve_concave(g, C, p, ConcaveOptions(starts=3, seed=0))
            assert rep.value <= alpha + 1e-5


def test_solve_concave_k3_matches_spread_tight_optimum():
    # the extreme point (0, s, s) with 2s = 2c(1-c)9 gives 2 sqrt(s/2)
    g = complete_graph(3)
    s = zform_spread_requirement(3, C) / 2.0
    _, rep = solve_concave(g, C, 1.0, ConcaveOptions(starts=2, seed=0))
    assert rep.value == pytest.approx(2.0 * np.sqrt(s / 2.0), abs=2e-3)


def test_solve_concave_rejects_bad_exponent():
    g = cycle_graph(4)
    with pytest.raises(ValueError):
        solve_concave(g, C, 2.0)
    with pytest.raises(ValueError):
        solve_concave(g, C, 0.0)


def test_solve_concave_local_minimality_certificate():
    g = gnp_graph(7, 0.5, 5)
    opts = ConcaveOptions(starts=3, seed=0, inner_tol=1e-5)
    z, rep = solve_concave(g, C, 1.0, opts)
    grad = objective_gradient(g, z.matrix, 1.0)
    znext = linear_subproblem(grad, g, C, opts.inner_tol, 1.0, z0=z.matrix)
    improvement = rep.value - objective_z(g, znext, 1.0)
    assert improvement < opts.inner_tol


def test_solve_concave_never_above_any_start_value():
    g = gnp_graph(8, 0.5, 9)
    _, alpha = exact_balanced_separator(g, C)
    for p in P_INNER:
        _, rep = solve_concave(g, C, p, ConcaveOptions(starts=4, seed=2))
        # cut starts include the optimum, so alpha bounds every start
        assert rep.value <= alpha + 1e-9


def test_objective_concavity_along_segments():
    g = cycle_graph(6)
    rng = np.random.default_rng(3)
    cuts = [m for m, _ in brute_force_cut_values(g, C)]
    for p in P_INNER:
        for _ in range(200):
            picks = rng.choice(len(cuts), size=2, replace=False)
            z1 = feasible_point_from_cut(g, Cut(cuts[picks[0]])).matrix
            z2 = feasible_point_from_cut(g, Cut(cuts[picks[1]])).matrix
            lam = rng.random()
            mix = lam * z1 + (1 - lam) * z2
            lhs = objective_z(g, ZForm(mix), p)
            rhs = lam * objective_z(g, ZForm(z1), p) + (1 - lam) * objective_z(
                g, ZForm(z2), p
            )
            assert lhs >= rhs - 1e-9


def test_grid_oracle_edge_cases():
    empty = Graph(3)
    assert grid_oracle_n3(empty, C, 1.0, 0.05) == 0.0
    with pytest.raises(ValueError):
        grid_oracle_n3(complete_graph(3), C, 1.0, 0.0)
    with pytest.raises(ValueError):
        grid_oracle_n3(complete_graph(4), C, 1.0, 0.05)


def test_grid_oracle_agrees_with_solvers_on_k3():
    g = complete_graph(3)
    res = 0.02
    grid = grid_oracle_n3(g, C, 2.0, res)
    from sepkit.sdp import solve_sdp

    _, rep = solve_sdp(g, C)
    assert abs(rep.value - grid) <= 3 * res
    grid1 = grid_oracle_n3(g, C, 1.0, res)
    _, rep1 = solve_concave(g, C, 1.0, ConcaveOptions(starts=2, seed=0))
    assert abs(rep1.value - grid1) <= 3 * res


def test_solve_concave_extreme_exponents_smoke():
    g = cycle_graph(4)
    _, alpha = exact_balanced_separator(g, C)
    for p in (0.2, 1.9):
        _, rep = solve_concave(g, C, p, ConcaveOptions(starts=2, seed=0))
        assert rep.value <= alpha + 1e-5


def test_solve_concave_deterministic():
    g = gnp_graph(7, 0.5, 13)
    _, r1 = solve_concave(g, C, 1.0, ConcaveOptions(starts=3, seed=4))
    _, r2 = solve_concave(g, C, 1.0, ConcaveOptions(starts=3, seed=4))
    assert abs(r1.value - r2.value) <= 1e-12
