import numpy as np
import pytest

from oracles import l2_distance, shooting_profile
from ultramorse.critical import (SolverConfig, WindowError, deflated_search, filter_window,
                                 morse_data, newton_solve)
from ultramorse.galerkin import build_level, embed, eval_u
from ultramorse.problem import chafee_infante, dirichlet_energy

# J of the positive mu = 2.5 branch, from shooting + 1e6-point Simpson (oracles.py)
J_U1_MU25 = -1.2226803750885886


def check_invariants(p, cfg):
    assert p.grad_norm < cfg.tol_grad
    assert p.morse_index == int(np.sum(p.spectrum < -cfg.eig_tol))
    assert p.nondegenerate == (np.min(np.abs(p.spectrum)) > cfg.eig_tol)
    assert np.all(np.diff(p.spectrum) >= 0)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"tol_grad": 0}, {"n_starts": 0}, {"eig_tol": -1.0}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)


class TestNewton:
    def test_exact_start(self):
        level = build_level(chafee_infante(2.5), 8)
        p = newton_solve(level, level.zero())
        assert p is not None and p.iterations == 1
        assert np.all(p.coeffs == 0)

    def test_positive_branch_matches_shooting(self):
        level = build_level(chafee_infante(2.5), 8)
        start = np.zeros(8)
        start[0] = 2.0
        p = newton_solve(level, start)
        assert p is not None and p.value < 0
        prof, _ = shooting_profile(2.5)
        dist = l2_distance(lambda x: eval_u(p.v, x), lambda x: prof(x)[0])
        assert dist < 1e-4
        assert eval_u(p.v, np.pi / 2) > 0

    def test_deflation_excludes_known_point(self):
        level = build_level(chafee_infante(2.5), 8)
        zero = newton_solve(level, level.zero())
        again = newton_solve(level, level.zero(), deflated_against=[zero])
        assert again is None or np.linalg.norm(again.coeffs) > 1e-6

    def test_deflation_steers_to_new_point(self):
        level = build_level(chafee_infante(2.5), 8)
        zero = newton_solve(level, level.zero())
        start = np.full(8, 1e-3)
        p = newton_solve(level, start, deflated_against=[zero])
        assert p is not None and level.w_norm(p.coeffs) > 1e-3

    def test_iteration_cap_is_failure(self):
        level = build_level(chafee_infante(2.5), 8)
        start = np.random.default_rng(0).standard_normal(8)
        assert newton_solve(level, start, SolverConfig(max_newton_iter=1)) is None


class TestSearch:
    def test_three_points_mu25(self, points_25_n8):
        level, pts = points_25_n8
        cfg = SolverConfig()
        assert len(pts) == 3
        for p in pts:
            check_invariants(p, cfg)
        values = [p.value for p in pts]
        assert values[2] == 0.0
        assert values[0] == pytest.approx(values[1], abs=1e-12)
        assert values[0] == pytest.approx(J_U1_MU25, abs=1e-6)
        assert sorted(p.morse_index for p in pts) == [0, 0, 1]

    def test_odd_symmetry(self, points_25_n8):
        level, pts = points_25_n8
        for p in pts:
            assert min(level.w_norm(p.coeffs + q.coeffs) for q in pts) < SolverConfig().distinct_tol

    def test_below_first_eigenvalue(self):
        level = build_level(chafee_infante(0.5), 8)
        pts = deflated_search(level)
        assert len(pts) == 1 and np.all(pts[0].coeffs == 0)
        # convexity: Hessian at zero has spectrum k^2 - 0.5 > 0
        np.testing.assert_allclose(pts[0].spectrum, np.arange(1, 9) ** 2 - 0.5, atol=1e-10)

    def test_dirichlet_energy(self):
        pts = deflated_search(build_level(dirichlet_energy(), 6))
        assert len(pts) == 1 and pts[0].morse_index == 0

    def test_deterministic(self):
        level = build_level(chafee_infante(5.0), 6)
        a = deflated_search(level, SolverConfig(seed=3))
        b = deflated_search(level, SolverConfig(seed=3))
        assert len(a) == len(b)
        for p, q in zip(a, b):
            assert p.value == q.value
            np.testing.assert_array_equal(p.coeffs, q.coeffs)

    def test_index_stable_between_n_and_2n(self):
        for n in (4, 8, 16):
            coarse = deflated_search(build_level(chafee_infante(5.0), n))
            fine_level = build_level(chafee_infante(5.0), 2 * n)
            fine = deflated_search(fine_level)
            for p in coarse:
                pe = embed(p.v, fine_level).coeffs
                q = min(fine, key=lambda q: fine_level.w_norm(q.coeffs - pe))
                assert q.morse_index == p.morse_index


class TestMorseData:
    def test_zero_mu25(self):
        level = build_level(chafee_infante(2.5), 6)
        index, nondeg, spec = morse_data(level, np.zeros(6))
        assert index == 1 and nondeg
        np.testing.assert_allclose(spec[:3], [-1.5, 1.5, 6.5], atol=1e-10)

    def test_zero_mu5(self):
        level = build_level(chafee_infante(5.0), 6)
        index, nondeg, spec = morse_data(level, np.zeros(6))
        assert index == 2 and nondeg
        np.testing.assert_allclose(spec[:3], [-4.0, -1.0, 4.0], atol=1e-10)

    def test_degenerate_at_bifurcation(self):
        level = build_level(chafee_infante(1.0), 4)
        index, nondeg, spec = morse_data(level, np.zeros(4))
        assert not nondeg and index == 0

    def test_branch_minimum_at_two_levels(self):
        for n in (16, 32):
            level = build_level(chafee_infante(2.5), n)
            start = np.zeros(n)
            start[0] = 2.0
            p = newton_solve(level, start)
            assert p.morse_index == 0 and p.nondegenerate


class TestWindow:
    def test_all(self, points_25_n8):
        _, pts = points_25_n8
        assert filter_window(pts, min(p.value for p in pts) - 1, 1.0) == pts

    def test_nontrivial_only(self, points_25_n8):
        _, pts = points_25_n8
        sel = filter_window(pts, -1.0 - 1.0, -1e-6)
        assert len(sel) == 2 and all(p.value < 0 for p in sel)

    def test_empty(self, points_25_n8):
        _, pts = points_25_n8
        assert filter_window(pts, 5.0, 6.0) == []

    def test_bad_window(self, points_25_n8):
        with pytest.raises(WindowError):
            filter_window(points_25_n8[1], 1.0, 1.0)
