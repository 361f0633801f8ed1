# -*- coding: utf-8 -*-
import cmath

import numpy as np
import pytest

from hdcpf.enums import BellOutcome
from hdcpf.fock import keyed_generator
from hdcpf.protocol import QuditState
from hdcpf.protocol import HdRouting
from hdcpf.protocol import ideal_hd_bs
from hdcpf.protocol import auxiliary
from hdcpf.protocol import cpf_oracle
from hdcpf.protocol import subspace_hadamard
from hdcpf.protocol import correction_unitary
from hdcpf.protocol import run_protocol
from hdcpf.protocol import transfer_operators
from hdcpf.protocol import heralding_probability
from hdcpf.protocol import align_phase
from hdcpf.protocol import aligned_overlap
from hdcpf.exceptions import InvalidDimension
from hdcpf.exceptions import InvalidSubspace
from hdcpf.exceptions import NotNormalized

from tests import utils


class TestOracle:

    @pytest.mark.parametrize('d', [2, 3, 4, 5, 6])
    def test_every_branch_matches(self, d):
        rng = keyed_generator(d, 'oracle')
        aux = auxiliary(0 if d == 2 else 1, d)
        oracle = cpf_oracle(d)
        for _ in range(100):
            psi = QuditState.random(d, rng)
            target = oracle.dot(psi.amps)
            for outcome, (state, p) in run_protocol(psi, aux).items():
                assert aligned_overlap(target, state.amps) >= 1 - 1e-10
                assert p == pytest.approx(1 / 16.0, abs=1e-10)

    @pytest.mark.parametrize('p', [0, 1, 2])
    def test_any_subspace(self, p):
        rng = keyed_generator(p, 'subspace')
        psi = QuditState.random(4, rng)
        target = cpf_oracle(4).dot(psi.amps)
        for state, _ in run_protocol(psi, auxiliary(p, 4)).values():
            assert utils.same_ray(target, state.amps)

    def test_oracle_flips_top_corner_only(self):
        u = cpf_oracle(3)
        assert np.allclose(np.diag(u), [1] * 8 + [-1])

    def test_heralding(self):
        psi = QuditState.basis(4, 3, 3)
        results = run_protocol(psi, auxiliary(1, 4))
        accepted = ['PhiPlus', BellOutcome.PSI_PLUS]
        assert heralding_probability(results, accepted) == \
            pytest.approx(1 / 8.0)

    def test_transfer_operators(self):
        ops = transfer_operators(auxiliary(1, 3))
        assert sorted(ops) == list(BellOutcome.ALL)
        for op in ops.values():
            assert np.allclose(op.conj().T.dot(op), np.eye(9) / 16)
            phase = op[0, 0] * 4
            assert abs(phase) == pytest.approx(1)
            assert np.allclose(op * 4, phase * cpf_oracle(3))


class TestGuards:

    def test_dimension(self):
        with pytest.raises(InvalidDimension):
            cpf_oracle(1)
        with pytest.raises(InvalidDimension):
            QuditState(1.5, [1])

    def test_subspace(self):
        with pytest.raises(InvalidSubspace):
            auxiliary(3, 4)
        with pytest.raises(InvalidSubspace):
            subspace_hadamard(-1, 4)

    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            QuditState(2, [1, 1, 0, 0])
        psi = QuditState(2, [1, 1, 0, 0], check=False)
        with pytest.raises(NotNormalized):
            run_protocol(psi, auxiliary(0, 2))

    def test_dimension_mismatch(self):
        psi = QuditState.basis(3, 0, 0)
        with pytest.raises(InvalidDimension):
            run_protocol(psi, auxiliary(1, 4))

    def test_amplitude_count(self):
        with pytest.raises(ValueError):
            QuditState(3, [1, 0, 0])


class TestComponents:

    def test_routing(self):
        routes = ideal_hd_bs(4).routing_map()
        assert routes[('A', 3)] == ('D', 3)
        assert routes[('A', 0)] == ('C', 0)
        assert routes[('B', 0)] == ('D', 0)
        assert routes[('B', 3)] == ('C', 3)

    def test_routing_is_permutation(self):
        m = HdRouting(5).matrix
        assert np.allclose(m.dot(m.T), np.eye(10))

    def test_hadamard(self):
        h = subspace_hadamard(1, 4)
        assert np.allclose(h.dot(h), np.eye(4))
        assert h[0, 0] == 1 and h[2, 2] == 1

    def test_corrections_are_diagonal_signs(self):
        for outcome in BellOutcome.ALL:
            u = correction_unitary(outcome, 3)
            assert np.allclose(np.abs(np.diag(u)), 1)
            assert np.allclose(u, np.diag(np.diag(u)))
        assert np.allclose(correction_unitary('PhiPlus', 3), np.eye(9))


class TestQuditState:

    def test_json_round_trip(self):
        psi = QuditState.random(3, keyed_generator(0, 'json'))
        again = QuditState.from_json(3, psi.to_json())
        assert np.allclose(again.amps, psi.amps)

    def test_json_out_of_range(self):
        with pytest.raises(ValueError):
            QuditState.from_json(2, '[[2, 0, 1.0, 0.0]]')

    def test_product(self):
        psi = QuditState.product([0, 1], [1, 0])
        assert psi.matrix()[1, 0] == 1

    def test_apply(self):
        psi = QuditState.basis(2, 1, 1).apply(cpf_oracle(2))
        assert psi.amps[3] == -1


class TestPhase:

    def test_align(self):
        ref = utils.random_vector(6, np.random.default_rng(1))
        got = align_phase(ref, cmath.exp(0.7j) * ref)
        assert np.allclose(got, ref)

    def test_orthogonal_fallback(self):
        ref = np.array([1, 1j]) / np.sqrt(2)
        cand = np.array([1, -1j]) / np.sqrt(2)
        assert aligned_overlap(ref, cand) == pytest.approx(0, abs=1e-12)
