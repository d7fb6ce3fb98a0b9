"""Relaxed objective, its gradient, and the exact-objective expansion identity."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from fusematch import (
    Instance,
    build_relaxation,
    enumerate_feasible,
    frobenius_objective,
    relaxed_gradient,
    relaxed_objective,
)
from fusematch.relax import frobenius_from_mats
from fusematch import build_modality_matrices

from conftest import random_feasible_assignment, random_instance


def brute_force_frobenius(U: np.ndarray, instance: Instance) -> float:
    """Direct evaluation of the sum of squared residuals, one modality at a time."""
    mats = build_modality_matrices(instance).mats
    gram = U @ U.T
    return float(sum(np.sum((gram - mat) ** 2) for mat in mats))


class TestAggregateMatrix:
    def test_inconclusive_score_maps_to_zero(self):
        inst = Instance(set_sizes=(1, 1), modality_count=1, scores={(0, 1): (0.5,)})
        data = build_relaxation(inst)
        assert data.abar[0, 1] == 0.0

    def test_certain_match_maps_to_minus_one(self):
        inst = Instance(set_sizes=(1, 1), modality_count=1, scores={(0, 1): (1.0,)})
        data = build_relaxation(inst)
        assert data.abar[0, 1] == -1.0

    def test_certain_mismatch_maps_to_plus_one(self):
        inst = Instance(set_sizes=(1, 1), modality_count=1, scores={(0, 1): (0.0,)})
        data = build_relaxation(inst)
        assert data.abar[0, 1] == 1.0

    def test_four_modalities_all_certain(self):
        inst = Instance(set_sizes=(1, 1), modality_count=4,
                        scores={(0, 1): (1.0, 1.0, 1.0, 1.0)})
        data = build_relaxation(inst)
        assert data.abar[0, 1] == -4.0

    def test_diagonal_equals_minus_modality_count(self):
        inst = Instance(set_sizes=(2, 1), modality_count=3, scores={})
        data = build_relaxation(inst)
        np.testing.assert_array_equal(np.diag(data.abar), -3.0)

    def test_penalty_matrices(self):
        inst = Instance(set_sizes=(2, 1), modality_count=1, scores={})
        data = build_relaxation(inst)
        np.testing.assert_array_equal(data.p_o, 1.0 - np.eye(3))
        expected_pd = np.zeros((3, 3))
        expected_pd[0, 1] = expected_pd[1, 0] = 1.0
        np.testing.assert_array_equal(data.p_d, expected_pd)

    def test_frob_const(self):
        inst = Instance(set_sizes=(1, 1), modality_count=1, scores={(0, 1): (0.9,)})
        data = build_relaxation(inst)
        assert data.frob_const == pytest.approx(2 * (1.0 + 0.9**2), abs=1e-12)


class TestExpansionIdentity:
    """The exact objective equals the aggregate inner product plus a constant
    on every feasible binary point. This pins the aggregate matrix, diagonal
    included."""

    def test_small_instances_every_feasible_point(self, rng):
        for _ in range(8):
            inst = random_instance(rng, max_universe=3, max_sets=3)
            if inst.num_elements > 7:
                continue
            data = build_relaxation(inst)
            for a in enumerate_feasible(inst):
                U = a.entries
                direct = brute_force_frobenius(U, inst)
                expanded = float((U @ U.T * data.abar).sum()) + data.frob_const
                assert abs(direct - expanded) <= 1e-10

    def test_frobenius_objective_matches_brute_force(self, rng):
        for _ in range(20):
            inst = random_instance(rng)
            a = random_feasible_assignment(rng, inst.set_sizes)
            assert frobenius_objective(a.entries, inst) == pytest.approx(
                brute_force_frobenius(a.entries, inst), abs=1e-9
            )

    def test_frobenius_from_mats_accepts_fractional_points(self, rng):
        inst = random_instance(rng)
        m = inst.num_elements
        U = rng.uniform(0.0, 1.0, size=(m, m))
        mats = build_modality_matrices(inst).mats
        assert frobenius_from_mats(U, mats) == pytest.approx(
            brute_force_frobenius(U, inst), abs=1e-9
        )


class TestRelaxedObjective:
    def test_zero_matrix_with_unit_weight(self):
        inst = Instance(set_sizes=(1, 1), modality_count=1, scores={})
        data = build_relaxation(inst)
        U = np.zeros((2, 2))
        assert relaxed_objective(U, data, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_feasible_binary_value(self, rng):
        # penalties vanish on feasible binary points, leaving the data term
        # minus d times the element count
        for _ in range(25):
            inst = random_instance(rng)
            data = build_relaxation(inst)
            a = random_feasible_assignment(rng, inst.set_sizes)
            U = a.entries
            for d in (0.0, 1.0, 17.3):
                expected = float((U @ U.T * data.abar).sum()) - d * inst.num_elements
                assert relaxed_objective(U, data, d) == pytest.approx(expected, abs=1e-9)

    def test_penalty_bracket_favors_feasible_points(self):
        inst = Instance(set_sizes=(2,), modality_count=1, scores={})
        data = build_relaxation(inst)
        both_first = np.array([[1.0, 0.0], [1.0, 0.0]])  # same-set collision

        def bracket(U):
            return relaxed_objective(U, data, 1.0) - relaxed_objective(U, data, 0.0)

        # the bracket bottoms out at -m, reached only on feasible points
        assert bracket(np.eye(2)) == pytest.approx(-2.0, abs=1e-12)
        assert bracket(both_first) > bracket(np.eye(2))
        assert bracket(np.full((2, 2), 0.5)) > bracket(np.eye(2))
        v_feas = relaxed_objective(np.eye(2), data, 0.0)
        assert relaxed_objective(np.eye(2), data, 100.0) == pytest.approx(
            v_feas - 100.0 * 2, abs=1e-9
        )

    def test_inconclusive_scores_make_all_assignments_tie(self, rng):
        # every cross-set score 0.5: the data term cannot distinguish
        # feasible binary assignments
        sizes = (2, 2, 1)
        inst = Instance(set_sizes=sizes, modality_count=2,
                        scores={})  # absent pairs default to 0.5
        data = build_relaxation(inst)
        values = set()
        for _ in range(100):
            a = random_feasible_assignment(rng, sizes)
            values.add(round(relaxed_objective(a.entries, data, 3.0), 9))
        assert len(values) == 1

    def test_rejects_negative_entries(self):
        inst = Instance(set_sizes=(1, 1), modality_count=1, scores={})
        data = build_relaxation(inst)
        with pytest.raises(ValueError):
            relaxed_objective(np.array([[-0.1, 0.0], [0.0, 0.5]]), data, 1.0)

    def test_rejects_negative_weight(self):
        inst = Instance(set_sizes=(1, 1), modality_count=1, scores={})
        data = build_relaxation(inst)
        with pytest.raises(ValueError):
            relaxed_objective(np.eye(2) * 0.5, data, -1.0)


class TestGradient:
    def test_matches_central_differences(self, rng):
        h = 1e-5
        for _ in range(12):
            inst = random_instance(rng, max_universe=3, max_sets=3)
            data = build_relaxation(inst)
            m = inst.num_elements
            U = rng.uniform(0.05, 0.95, size=(m, m))
            U /= U.sum(axis=1, keepdims=True) * float(rng.uniform(1.0, 2.0))
            for d in (0.0, 1.0, 10.0):
                g = relaxed_gradient(U, data, d)
                fd = np.empty_like(g)
                for i, j in itertools.product(range(m), range(m)):
                    up, um = U.copy(), U.copy()
                    up[i, j] += h
                    um[i, j] -= h
                    fd[i, j] = (
                        relaxed_objective(up, data, d)
                        - relaxed_objective(um, data, d)
                    ) / (2 * h)
                rel = np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12)
                assert rel <= 1e-6

    def test_gradient_handles_rectangular_input(self, rng):
        inst = random_instance(rng)
        data = build_relaxation(inst)
        m = inst.num_elements
        c = max(1, m - 2)
        U = rng.uniform(0.0, 0.5, size=(m, c))
        g = relaxed_gradient(U, data, 2.0)
        assert g.shape == (m, c)
        h = 1e-6
        i, j = 0, c - 1
        up, um = U.copy(), U.copy()
        up[i, j] += h
        um[i, j] -= h
        fd = (relaxed_objective(up, data, 2.0) - relaxed_objective(um, data, 2.0)) / (2 * h)
        assert g[i, j] == pytest.approx(fd, rel=1e-4, abs=1e-6)
