# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from hdcpf.enums import Pol
from hdcpf.modes import Mode, ModeSpace, SinglePhotonState
from hdcpf.elements import element_transform
from hdcpf.fock import MultiPhotonState
from hdcpf.fock import DetectionPattern
from hdcpf.fock import inject_product
from hdcpf.fock import apply_transform
from hdcpf.fock import post_select
from hdcpf.fock import project_pair
from hdcpf.fock import pol_vector
from hdcpf.fock import local_basis_transform
from hdcpf.fock import outcome_distribution
from hdcpf.fock import keyed_generator
from hdcpf.fock import sample_counts
from hdcpf.fock import random_unitary
from hdcpf.exceptions import EmptyPostSelection
from hdcpf.exceptions import BasisIncomplete
from hdcpf.exceptions import SpaceMismatch

SQ = 1 / math.sqrt(2)


class TestInjection:

    @pytest.fixture(autouse=True)
    def space(self):
        self.space = ModeSpace(['A', 'B'], L=1)

    def photon(self, text):
        return SinglePhotonState.basis(self.space, Mode.parse(text))

    def test_product(self):
        s = inject_product([self.photon('A:H:0'), self.photon('B:V:1')])
        assert s.n == 2
        assert s.amplitude(['A:H:0', 'B:V:1']) == pytest.approx(1)

    def test_bunched(self):
        s = inject_product([self.photon('A:H:0'), self.photon('A:H:0')])
        index = self.space.index(Mode.parse('A:H:0'))
        assert s.terms == {(index, index): pytest.approx(1)}

    def test_superposition(self):
        plus = SinglePhotonState.from_terms(self.space, {'A:H:0': SQ,
                                                         'A:V:0': SQ})
        s = inject_product([plus, self.photon('B:H:0')])
        assert s.mass() == pytest.approx(1)
        assert len(s) == 2

    def test_space_mismatch(self):
        other = SinglePhotonState.basis(ModeSpace(['A']), Mode('A', Pol.H, 0))
        with pytest.raises(SpaceMismatch):
            inject_product([self.photon('A:H:0'), other])

    def test_empty(self):
        with pytest.raises(ValueError):
            inject_product([])

    def test_text_round_trip(self):
        s = inject_product([self.photon('A:H:0'), self.photon('B:V:1')])
        again = MultiPhotonState.from_text(self.space, s.to_text())
        assert again.overlap(s) == pytest.approx(1)


class TestHongOuMandel:

    @pytest.fixture(autouse=True)
    def space(self):
        self.space = ModeSpace(['A', 'B', 'C', 'D'], L=0)
        self.bs = element_transform('BS(in=[A,B],out=[C,D])', self.space)

    def evolve(self, second):
        photons = [SinglePhotonState.basis(self.space, Mode.parse(t))
                   for t in ('A:H:0', second)]
        return apply_transform(self.bs, inject_product(photons))

    def test_bunching(self):
        s = self.evolve('B:H:0')
        dist = outcome_distribution(s, {'C': 'pol', 'D': 'pol'})
        assert dist.get(('H', 'H'), 0.0) == pytest.approx(0.0, abs=1e-12)
        assert dist[('H+H', '-')] == pytest.approx(0.5)
        assert dist[('-', 'H+H')] == pytest.approx(0.5)

    def test_distinguishable(self):
        s = self.evolve('B:V:0')
        dist = outcome_distribution(s, {'C': 'pol', 'D': 'pol'})
        assert dist[('H', 'V')] == pytest.approx(0.25)
        assert dist[('V', 'H')] == pytest.approx(0.25)

    def test_coincidence_postselection(self):
        with pytest.raises(EmptyPostSelection):
            post_select(self.evolve('B:H:0'),
                        DetectionPattern({'C': 1, 'D': 1}))
        state, kept = post_select(self.evolve('B:V:0'),
                                  DetectionPattern({'C': 1, 'D': 1}))
        assert kept == pytest.approx(0.5)
        assert state.mass() == pytest.approx(1)

    def test_pattern_too_large(self):
        with pytest.raises(EmptyPostSelection):
            post_select(self.evolve('B:V:0'), DetectionPattern({'C': 3}))

    def test_unresolved_path(self):
        with pytest.raises(BasisIncomplete):
            outcome_distribution(self.evolve('B:V:0'), {'C': 'pol'})


class TestNormPreservation:

    def test_random_unitaries(self):
        space = ModeSpace(['A', 'B'], L=0)
        photons = [SinglePhotonState.basis(space, Mode.parse(t))
                   for t in ('A:H:0', 'B:V:0')]
        state = inject_product(photons)
        for seed in range(1000):
            out = apply_transform(random_unitary(space, seed), state)
            assert abs(out.mass() - 1) < 1e-10

    def test_random_unitary_seeded(self):
        space = ModeSpace(['A'], L=1)
        assert np.allclose(random_unitary(space, 3).dense(),
                           random_unitary(space, 3).dense())


class TestMeasurement:

    @pytest.fixture(autouse=True)
    def space(self):
        self.space = ModeSpace(['A', 'B'], L=1)

    def test_project_pair(self):
        s = inject_product([
            SinglePhotonState.basis(self.space, Mode('A', Pol.H, 0)),
            SinglePhotonState.basis(self.space, Mode('B', Pol.H, 0))])
        h = pol_vector(self.space, Pol.H)
        v = pol_vector(self.space, Pol.V)
        assert project_pair(s, ('A', 'B'), np.outer(h, h)).mass() == \
            pytest.approx(1)
        assert project_pair(s, ('A', 'B'), np.outer(h, v)).mass() == 0
        phi = SQ * (np.outer(h, h) + np.outer(v, v))
        assert project_pair(s, ('A', 'B'), phi).mass() == pytest.approx(0.5)

    def test_project_pair_shape(self):
        s = inject_product([
            SinglePhotonState.basis(self.space, Mode('A', Pol.H, 0))])
        with pytest.raises(SpaceMismatch):
            project_pair(s, ('A', 'B'), np.eye(2))

    def test_local_basis(self):
        s = inject_product([
            SinglePhotonState.basis(self.space, Mode('A', Pol.H, 0))])
        h = pol_vector(self.space, Pol.H)
        v = pol_vector(self.space, Pol.V)
        dist = outcome_distribution(s, {'A': [('D', SQ * (h + v)),
                                              ('A', SQ * (h - v))]})
        assert dist[('D', )] == pytest.approx(0.5)
        assert dist[('A', )] == pytest.approx(0.5)

    def test_incomplete_basis(self):
        s = inject_product([
            SinglePhotonState.basis(self.space, Mode('A', Pol.H, 1))])
        h = pol_vector(self.space, Pol.H)
        v = pol_vector(self.space, Pol.V)
        with pytest.raises(BasisIncomplete):
            outcome_distribution(s, {'A': [('H', h), ('V', v)]})

    def test_not_orthonormal(self):
        h = pol_vector(self.space, Pol.H)
        with pytest.raises(BasisIncomplete):
            local_basis_transform(self.space, 'A', [h, h])

    def test_oam_resolution(self):
        s = inject_product([
            SinglePhotonState.basis(self.space, Mode('A', Pol.V, -1))])
        dist = outcome_distribution(s, {'A': 'oam'})
        assert dist == {('-1', ): pytest.approx(1)}


class TestSampling:

    DIST = {'a': 0.1, 'b': 0.2, 'c': 0.3, 'd': 0.4}

    def test_total(self):
        counts = sample_counts(self.DIST, 10000, seed=1)
        assert sum(counts.values()) == 10000
        assert sorted(counts) == ['a', 'b', 'c', 'd']

    def test_deterministic(self):
        assert sample_counts(self.DIST, 1000, 5, 'x') == \
            sample_counts(self.DIST, 1000, 5, 'x')

    def test_seed_changes_counts(self):
        assert sample_counts(self.DIST, 10000, 1) != \
            sample_counts(self.DIST, 10000, 2)

    def test_experiment_streams(self):
        a = keyed_generator(7, 'fidelity').uniform(size=4)
        b = keyed_generator(7, 'lock').uniform(size=4)
        assert not np.allclose(a, b)

    def test_zero_shots(self):
        assert sample_counts(self.DIST, 0, 1) == dict.fromkeys(self.DIST, 0)

    def test_negative_shots(self):
        with pytest.raises(ValueError):
            sample_counts(self.DIST, -1, 1)

    def test_rejected_everywhere(self):
        with pytest.raises(EmptyPostSelection):
            sample_counts({'PhiPlus': 0.0, 'PsiPlus': 0.0}, 100, 1)

    def test_nan_weights(self):
        with pytest.raises(EmptyPostSelection):
            sample_counts({'a': float('nan')}, 10, 1)

    def test_frequencies(self):
        counts = sample_counts(self.DIST, 100000, 3)
        for key, p in self.DIST.items():
            assert counts[key] / 100000.0 == pytest.approx(p, abs=0.01)
