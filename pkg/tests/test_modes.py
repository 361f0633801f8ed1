# -*- coding: utf-8 -*-
import pytest

from hdcpf.enums import Pol
from hdcpf.modes import Mode, ModeSpace, SinglePhotonState
from hdcpf.exceptions import SpaceMismatch, TruncationOverflow


class TestModeSpace:

    @pytest.fixture(autouse=True)
    def space(self):
        self.space = ModeSpace(['A', 'B'], L=2)

    def test_dimensions(self):
        assert self.space.ladder == 5
        assert self.space.block == 10
        assert self.space.dim == 20
        assert len(self.space) == 20

    def test_index_round_trip(self):
        for index in range(self.space.dim):
            assert self.space.index(self.space.mode(index)) == index

    def test_index_order(self):
        assert self.space.index(Mode('A', Pol.H, -2)) == 0
        assert self.space.index(Mode('A', Pol.V, -2)) == 5
        assert self.space.index(Mode('B', Pol.H, 0)) == 12

    def test_truncation(self):
        with pytest.raises(TruncationOverflow):
            self.space.index(Mode('A', Pol.H, 3))

    def test_undeclared_path(self):
        with pytest.raises(SpaceMismatch):
            self.space.offset('Z')

    def test_duplicate_paths(self):
        with pytest.raises(ValueError):
            ModeSpace(['A', 'A'])

    def test_equality(self):
        assert self.space == ModeSpace(('A', 'B'), 2)
        assert self.space != ModeSpace(('A', 'B'), 3)
        assert hash(self.space) == hash(ModeSpace(('A', 'B'), 2))

    def test_extend(self):
        extended = self.space.extend('B', 'C')
        assert extended.paths == ('A', 'B', 'C')


class TestMode:

    def test_parse(self):
        mode = Mode.parse('C:V:-1')
        assert mode == Mode('C', Pol.V, -1)
        assert str(mode) == 'C:V:-1'

    def test_parse_malformed(self):
        with pytest.raises(ValueError):
            Mode.parse('C:V')
        with pytest.raises(ValueError):
            Mode.parse('C:X:0')


class TestSinglePhotonState:

    @pytest.fixture(autouse=True)
    def space(self):
        self.space = ModeSpace(['A', 'B'], L=1)

    def test_from_terms(self):
        s = SinglePhotonState.from_terms(self.space, {'A:H:1': 0.6,
                                                      'B:V:0': 0.8j})
        assert s.norm() == pytest.approx(1.0)
        assert s.amplitude('B:V:0') == pytest.approx(0.8j)
        assert s.paths() == ['A', 'B']

    def test_shape_mismatch(self):
        with pytest.raises(SpaceMismatch):
            SinglePhotonState(self.space, [1, 0])

    def test_text_round_trip(self):
        s = SinglePhotonState.from_terms(self.space, {'A:H:-1': 0.6,
                                                      'B:V:1': -0.8j})
        again = SinglePhotonState.from_text(self.space, s.to_text())
        assert abs(again.overlap(s)) == pytest.approx(1.0)
        assert s.to_text() == 'A:H:-1 0.6 0\nB:V:1 0 -0.8'

    def test_overlap_across_spaces(self):
        s = SinglePhotonState.basis(self.space, Mode('A', Pol.H, 0))
        other = SinglePhotonState.basis(ModeSpace(['A']), Mode('A', Pol.H, 0))
        with pytest.raises(SpaceMismatch):
            s.overlap(other)

    def test_restricted(self):
        s = SinglePhotonState.basis(self.space, Mode('B', Pol.V, 1))
        local = s.restricted('B')
        assert len(local) == self.space.block
        assert local[self.space.local_index(Pol.V, 1)] == 1
