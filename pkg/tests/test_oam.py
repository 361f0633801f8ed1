# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from hdcpf.enums import Pol, BellOutcome, Readout
from hdcpf.modes import Mode, ModeSpace, SinglePhotonState
from hdcpf.conventions import load_conventions
from hdcpf.fock import keyed_generator
from hdcpf.protocol import QuditState, cpf_oracle
from hdcpf.oam import QUDIT_OAM
from hdcpf.oam import PREPARATION_RECIPES
from hdcpf.oam import AMBIGUOUS
from hdcpf.oam import build_ok_cnot
from hdcpf.oam import build_hd_beamsplitter
from hdcpf.oam import build_bsm_stage
from hdcpf.oam import check_stages
from hdcpf.oam import transcript_check
from hdcpf.oam import prepare_input
from hdcpf.oam import prepare_auxiliary
from hdcpf.oam import qudit_to_photon
from hdcpf.oam import photon_to_qudit
from hdcpf.oam import input_coefficients
from hdcpf.oam import get_pipeline
from hdcpf.oam import run_cpf_d4
from hdcpf.oam import heralded_kraus
from hdcpf.oam import pipeline_elements
from hdcpf.elements import apply_to_single_photon
from hdcpf.noise import NoiseSpec, draw_ensemble, apply_noise
from hdcpf.noise import IDEAL
from hdcpf.exceptions import EncodingError
from hdcpf.exceptions import NotNormalized
from hdcpf.exceptions import TruncationOverflow

from tests import utils

ACCEPTED = ('PhiPlus', 'PsiPlus')


def qudit(level):
    v = np.zeros(4, dtype=complex)
    v[level] = 1
    return v


class TestOkCnot:

    @pytest.mark.parametrize('k', [1, 2])
    def test_closed_form(self, k):
        assert build_ok_cnot(k).deviation() < 1e-10

    def test_flips_oam(self):
        space = ModeSpace(['A'], 2)
        gate = build_ok_cnot(1, space)
        state = SinglePhotonState.basis(space, Mode('A', Pol.H, 2))
        out = apply_to_single_photon(gate.transform, state)
        assert out.amplitude('A:H:-2') == pytest.approx(-1)
        assert abs(out.amplitude('A:V:-2')) < 1e-12

    def test_unknown_order(self):
        with pytest.raises(ValueError):
            build_ok_cnot(3)


class TestHdBeamSplitter:

    @pytest.fixture(autouse=True)
    def splitter(self):
        self.bs = build_hd_beamsplitter()

    @pytest.mark.parametrize('mode,out', [
        ('A:H:-2', 'C:H:-2'),
        ('A:H:-1', 'C:H:-1'),
        ('A:H:0', 'C:H:0'),
        ('A:H:1', 'D:H:1'),
        ('B:H:-1', 'D:H:-1'),
        ('B:H:1', 'C:H:1'),
    ])
    def test_routing(self, mode, out):
        state = SinglePhotonState.basis(self.bs.space, Mode.parse(mode))
        assert self.bs.apply(state).amplitude(out) == pytest.approx(1)

    def test_transcripts(self):
        report = transcript_check(self.bs)
        assert report.ok, report.summary()
        assert report.checked > 0

    def test_missing_mirror_diverges(self):
        report = transcript_check(self.bs.without('p2_stack', 'MIRROR'))
        assert not report.ok
        assert report.first_divergence.stage == 'p2_stack'

    def test_flipped_pbs_phase_diverges_at_first_pbs(self):
        flipped = load_conventions(pbs_reflection_phase=-math.pi / 2)
        report = transcript_check(build_hd_beamsplitter(conventions=flipped))
        assert not report.ok
        assert report.first_divergence.stage == 'pbs1'
        assert report.first_divergence.fixture == 'port_a'
        assert 'pbs2' in set(f.stage for f in report.failures)

    @pytest.mark.parametrize('stage,fixture', [
        ('p2_stack', 'port_a'),
        ('b_prep', 'port_b'),
    ])
    def test_missing_phase_plate_diverges(self, stage, fixture):
        report = transcript_check(self.bs.without(stage, 'PP'))
        assert not report.ok
        assert report.first_divergence.stage == stage
        assert report.first_divergence.fixture == fixture

    def test_bsm_transcript(self):
        bsm = build_bsm_stage(ModeSpace(['D1', 'D2', 'E', 'F'], 2))
        assert check_stages(bsm.stages, bsm.space, 'bsm').ok

    def test_needs_two_oam_levels(self):
        with pytest.raises(TruncationOverflow):
            build_hd_beamsplitter(ModeSpace(
                ['A', 'B', 'N1', 'P1', 'P2', 'N3', 'C', 'D'], 1))

    def test_unitary(self):
        assert self.bs.transform().deviation() < 1e-10


class TestPreparation:

    @pytest.mark.parametrize('row', sorted(PREPARATION_RECIPES))
    def test_rows(self, row):
        state, probability = prepare_input(row)
        assert 0 < probability <= 1
        assert utils.same_ray(PREPARATION_RECIPES[row].target,
                              photon_to_qudit(state))

    def test_direct_rows(self):
        assert prepare_input(9)[1] == 1.0

    def test_unknown_row(self):
        with pytest.raises(ValueError):
            prepare_input(11)

    def test_auxiliary(self):
        state = prepare_auxiliary()
        assert abs(state.amplitude('B:V:-1')) == pytest.approx(2 ** -0.5)
        assert abs(state.amplitude('B:H:1')) == pytest.approx(2 ** -0.5)
        assert state.norm() == pytest.approx(1)


class TestEncoding:

    def test_round_trip(self):
        space = ModeSpace(['A'], 2)
        v = utils.random_vector(4, np.random.default_rng(4))
        photon = qudit_to_photon(v, space, 'A')
        assert photon.amplitude(Mode('A', Pol.H, QUDIT_OAM[0])) == \
            pytest.approx(v[0])
        assert np.allclose(photon_to_qudit(photon), v)

    def test_outside_alphabet(self):
        space = ModeSpace(['A'], 2)
        photon = SinglePhotonState.basis(space, Mode('A', Pol.V, 0))
        with pytest.raises(EncodingError):
            photon_to_qudit(photon)

    def test_two_paths(self):
        space = ModeSpace(['A', 'B'], 2)
        photon = SinglePhotonState.from_terms(space, {'A:H:0': 2 ** -0.5,
                                                      'B:H:0': 2 ** -0.5})
        with pytest.raises(EncodingError):
            photon_to_qudit(photon)

    def test_coefficients(self):
        c = input_coefficients(qudit(1), qudit(3))
        assert c[1, 3] == 1

    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            input_coefficients(2 * qudit(1), qudit(3))

    def test_wrong_dimension(self):
        with pytest.raises(EncodingError):
            input_coefficients(QuditState.basis(3, 0, 0))


class TestNoise:

    def test_ideal_draw(self):
        rng = keyed_generator(0, 'noise')
        assert apply_noise(NoiseSpec().clean(), rng) == IDEAL

    def test_full_loss_and_no_visibility(self):
        rng = keyed_generator(1, 'noise')
        drawn = apply_noise(NoiseSpec(loss=1, visibility=0).clean(), rng)
        assert all(0 <= phase < 2 * np.pi for phase in drawn.aux_phase)
        assert not drawn.has_jitter

    def test_dephasing_is_diagonal(self):
        rng = keyed_generator(2, 'noise')
        drawn = apply_noise(NoiseSpec(dephasing=0.3).clean(), rng)
        op = drawn.dephasing_operator()
        assert np.allclose(op, np.diag(np.diag(op)))
        assert np.allclose(np.abs(np.diag(op)), 1)

    def test_coherent_ensemble(self):
        ensemble = draw_ensemble(NoiseSpec(loss=0.2).clean())
        assert ensemble.realizations == [IDEAL]
        assert ensemble.survival() == pytest.approx(0.8 ** 4)

    def test_seeded_ensemble(self):
        spec = NoiseSpec(jitter=0.2, seed=5).clean()
        first = draw_ensemble(spec, 5)
        assert len(first.realizations) == 5
        assert first.realizations == draw_ensemble(spec, 5).realizations
        assert np.allclose(first.weights(), 0.2)

    def test_loss_scales_herald_only(self):
        spec = NoiseSpec(jitter=0.3, dephasing=0.2, seed=3).clean()
        lossless = run_cpf_d4(qudit(3), qudit(3), accepted=ACCEPTED,
                              ensemble=draw_ensemble(spec, 4))
        lossy_spec = spec.replace(loss=0.1)
        lossy = run_cpf_d4(qudit(3), qudit(3), accepted=ACCEPTED,
                           ensemble=draw_ensemble(lossy_spec, 4))
        assert lossy.probability == \
            pytest.approx(0.9 ** 4 * lossless.probability, rel=1e-10)
        assert np.allclose(lossy.density, lossless.density)


class TestPipeline:

    def test_basis_probabilities(self):
        result = run_cpf_d4(qudit(3), qudit(3), accepted=ACCEPTED)
        assert result.probability == pytest.approx(1 / 8.0, abs=1e-10)
        for name in BellOutcome.NAMES:
            assert result.branches[name] == pytest.approx(1 / 16.0,
                                                          abs=1e-10)
        assert result.fidelity(cpf_oracle(4).dot(np.kron(qudit(3),
                                                          qudit(3)))) == \
            pytest.approx(1)

    def test_flips_sign_only_on_top_pair(self):
        plus = np.ones(4) / 2
        result = run_cpf_d4(plus, plus, accepted=ACCEPTED)
        target = cpf_oracle(4).dot(np.kron(plus, plus))
        assert result.fidelity(target) == pytest.approx(1, abs=1e-10)
        assert result.fidelity(np.kron(plus, plus)) == \
            pytest.approx((14 / 16.0) ** 2, abs=1e-10)

    def test_random_products(self):
        rng = keyed_generator(11, 'pipeline')
        for _ in range(5):
            a = utils.random_vector(4, rng)
            b = utils.random_vector(4, rng)
            result = run_cpf_d4(a, b, accepted=ACCEPTED)
            target = cpf_oracle(4).dot(np.kron(a, b))
            assert result.fidelity(target) >= 1 - 1e-10
            assert utils.same_ray(target, result.state.amps)
            assert result.probability == pytest.approx(1 / 8.0, abs=1e-10)

    def test_joint_input(self):
        psi = QuditState.random(4, keyed_generator(2, 'joint'))
        result = run_cpf_d4(psi, accepted=ACCEPTED)
        assert result.fidelity(cpf_oracle(4).dot(psi.amps)) >= 1 - 1e-10

    def test_prepared_rows(self):
        in1, _ = prepare_input(4, ModeSpace(['A'], 2))
        in4, _ = prepare_input(6, ModeSpace(['A'], 2))
        result = run_cpf_d4(in1, in4, accepted=ACCEPTED)
        target = cpf_oracle(4).dot(np.kron(PREPARATION_RECIPES[4].target,
                                           PREPARATION_RECIPES[6].target))
        assert result.fidelity(target) == pytest.approx(1, abs=1e-10)

    def test_tallies(self):
        result = run_cpf_d4(qudit(0), qudit(1), accepted=ACCEPTED,
                            shots=1000, seed=7)
        assert sum(result.tallies.values()) == 1000
        again = run_cpf_d4(qudit(0), qudit(1), accepted=ACCEPTED,
                           shots=1000, seed=7)
        assert again.tallies == result.tallies

    def test_loss_scales_probability(self):
        noise = NoiseSpec(loss=0.1).clean()
        result = run_cpf_d4(qudit(3), qudit(3), accepted=ACCEPTED,
                            noise=noise)
        assert result.probability == pytest.approx(0.9 ** 4 / 8.0)
        assert result.state is not None

    def test_noisy_run_has_no_pure_state(self):
        noise = NoiseSpec(jitter=0.3, seed=1).clean()
        result = run_cpf_d4(qudit(3), qudit(3), accepted=ACCEPTED,
                            noise=noise, ensemble=draw_ensemble(noise, 2))
        assert result.state is None
        assert np.trace(result.density).real == pytest.approx(1)


class TestCrossEngine:
    """
    The four-photon pipeline and the abstract protocol give the same
    heralded map
    """

    @pytest.fixture(autouse=True)
    def operators(self):
        self.ops = get_pipeline().transfer_operators()

    def test_every_branch(self):
        assert sorted(self.ops) == list(BellOutcome.ALL)
        for op in self.ops.values():
            assert np.allclose(op.conj().T.dot(op), np.eye(16) / 16)
            phase = op[0, 0] * 4
            assert np.allclose(op * 4, phase * cpf_oracle(4))

    @pytest.mark.parametrize('first,second', [('Z', 'X'), ('X', 'Z')])
    def test_basis_pairs(self, first, second):
        fourier = np.exp(2j * np.pi * np.outer(range(4), range(4)) / 4) / 2
        bases = {'Z': np.eye(4), 'X': fourier}
        for j in range(4):
            c = np.kron(bases[first][:, j], bases[second][:, 3 - j])
            for op in self.ops.values():
                assert utils.same_ray(cpf_oracle(4).dot(c), op.dot(c))

    def test_kraus(self):
        kraus, survival = heralded_kraus(accepted=ACCEPTED)
        assert survival == 1.0
        total = sum(k.conj().T.dot(k) for k in kraus)
        assert np.allclose(total, np.eye(16) / 8)


class TestPbsReadout:

    @pytest.fixture(autouse=True)
    def stage(self):
        self.bsm = build_bsm_stage(ModeSpace(['D1', 'D2', 'E', 'F'], 2),
                                   readout='pbs')

    def test_two_outcomes(self):
        assert self.bsm.distinguishable() == [BellOutcome.PHI_PLUS,
                                              BellOutcome.PHI_MINUS]

    def test_bunched_is_ambiguous(self):
        assert self.bsm.decode(('D+D', '-')) == AMBIGUOUS
        assert self.bsm.decode(('nothing', )) == AMBIGUOUS

    def test_decoder_patterns(self):
        decoded = [o for o in self.bsm.decoder.values() if o != AMBIGUOUS]
        assert len(decoded) == 4

    def test_pipeline(self):
        result = run_cpf_d4(qudit(3), qudit(2),
                            accepted=('PhiPlus', 'PhiMinus'),
                            readout=Readout.PBS)
        assert result.probability == pytest.approx(1 / 8.0, abs=1e-10)
        target = cpf_oracle(4).dot(np.kron(qudit(3), qudit(2)))
        assert result.fidelity(target) == pytest.approx(1, abs=1e-10)

    def test_elements_include_combiner(self):
        kinds = [e.kind for e in pipeline_elements('pbs')]
        assert kinds[-1] == 'PBS'
        assert 'PBS' not in [e.kind for e in
                             pipeline_elements('projective')[-10:]]
