# -*- coding: utf-8 -*-
import logging
from dataclasses import dataclass

import numpy as np

from . import settings
from .enums import Pol
from .exceptions import SpaceMismatch
from .exceptions import TruncationOverflow

log = logging.getLogger('hdcpf')


@dataclass(frozen=True, order=True)
class Mode(object):
    path: str
    pol: int
    oam: int

    def __str__(self):
        return '%s:%s:%d' % (self.path, Pol.NAMES[self.pol], self.oam)

    @classmethod
    def parse(cls, text):
        """
        'A:H:-1' -> Mode('A', Pol.H, -1)
        """
        try:
            path, pol, oam = text.strip().split(':')
            return cls(path, Pol.from_name(pol), int(oam))
        except ValueError:
            raise ValueError('Malformed mode %r, expected path:pol:oam'
                             % text)


class ModeSpace(object):
    """
    Truncated single-photon mode space: paths x {H, V} x [-L, L]. The dense
    index runs path-major, then polarization, then OAM.
    """

    def __init__(self, paths, L=settings.DEFAULT_TRUNCATION):
        paths = tuple(paths)
        if len(set(paths)) != len(paths):
            raise ValueError('Duplicate path labels in %r' % (paths, ))
        if L < 0:
            raise ValueError('Truncation bound must be non-negative')
        self.paths = paths
        self.L = int(L)
        self.ladder = 2 * self.L + 1
        self.block = 2 * self.ladder
        self.dim = len(paths) * self.block
        self._path_index = dict((p, i) for i, p in enumerate(paths))

    def __repr__(self):
        return '<ModeSpace: paths=%s L=%d>' % (','.join(self.paths), self.L)

    def __eq__(self, other):
        return isinstance(other, ModeSpace) and \
            self.paths == other.paths and self.L == other.L

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.paths, self.L))

    def __len__(self):
        return self.dim

    def has_path(self, path):
        return path in self._path_index

    def check_paths(self, *paths):
        for p in paths:
            if p not in self._path_index:
                raise SpaceMismatch('Path %s is not declared in %r'
                                    % (p, self))

    def local_index(self, pol, oam):
        if abs(oam) > self.L:
            raise TruncationOverflow('OAM %d outside [-%d, %d]'
                                     % (oam, self.L, self.L))
        return pol * self.ladder + oam + self.L

    def offset(self, path):
        self.check_paths(path)
        return self._path_index[path] * self.block

    def index(self, mode):
        return self.offset(mode.path) + self.local_index(mode.pol, mode.oam)

    def mode(self, index):
        if not 0 <= index < self.dim:
            raise IndexError(index)
        path, local = divmod(index, self.block)
        pol, oam = divmod(local, self.ladder)
        return Mode(self.paths[path], pol, oam - self.L)

    def path_of(self, index):
        return self.paths[index // self.block]

    def path_slice(self, path):
        start = self.offset(path)
        return slice(start, start + self.block)

    def modes(self, path=None):
        paths = [path] if path else self.paths
        for p in paths:
            for pol in (Pol.H, Pol.V):
                for oam in range(-self.L, self.L + 1):
                    yield Mode(p, pol, oam)

    def oam_values(self):
        return range(-self.L, self.L + 1)

    def extend(self, *paths):
        return ModeSpace(self.paths + tuple(p for p in paths
                                            if p not in self._path_index),
                         self.L)


def format_amplitude(value):
    return '%.12g %.12g' % (value.real + 0.0, value.imag + 0.0)


class SinglePhotonState(object):
    """
    Complex amplitude vector over a ModeSpace. ``probability`` carries the
    post-selection weight left behind by a projector.
    """

    def __init__(self, space, amps, probability=1.0):
        amps = np.array(amps, dtype=complex)
        if amps.shape != (space.dim, ):
            raise SpaceMismatch('Amplitude vector of shape %r does not fit %r'
                                % (amps.shape, space))
        self.space = space
        self.amps = amps
        self.amps.setflags(write=False)
        self.probability = probability

    def __repr__(self):
        return '<SinglePhotonState: %s>' % self.to_text().replace('\n', '; ')

    @classmethod
    def from_terms(cls, space, terms):
        amps = np.zeros(space.dim, dtype=complex)
        items = terms.items() if hasattr(terms, 'items') else terms
        for mode, amp in items:
            if isinstance(mode, str):
                mode = Mode.parse(mode)
            amps[space.index(mode)] += amp
        return cls(space, amps)

    @classmethod
    def basis(cls, space, mode):
        return cls.from_terms(space, [(mode, 1.0)])

    @classmethod
    def from_text(cls, space, text):
        """
        Inverse of to_text, one 'path:pol:oam re im' term per line
        """
        terms = []
        for line in text.splitlines():
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            mode, re_part, im_part = line.split()
            terms.append((Mode.parse(mode),
                          complex(float(re_part), float(im_part))))
        return cls.from_terms(space, terms)

    def norm(self):
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def normalized(self):
        norm = self.norm()
        if norm == 0:
            return self
        return SinglePhotonState(self.space, self.amps / norm,
                                 self.probability)

    def pruned(self, tolerance=None):
        tolerance = settings.PRUNE_TOLERANCE if tolerance is None \
            else tolerance
        amps = np.where(np.abs(self.amps) < tolerance, 0, self.amps)
        return SinglePhotonState(self.space, amps, self.probability)

    def terms(self, tolerance=None):
        tolerance = settings.PRUNE_TOLERANCE if tolerance is None \
            else tolerance
        result = {}
        for i in np.flatnonzero(np.abs(self.amps) >= tolerance):
            result[self.space.mode(i)] = complex(self.amps[i])
        return result

    def paths(self):
        return sorted(set(m.path for m in self.terms()))

    def amplitude(self, mode):
        if isinstance(mode, str):
            mode = Mode.parse(mode)
        return complex(self.amps[self.space.index(mode)])

    def overlap(self, other):
        if other.space != self.space:
            raise SpaceMismatch('Overlap across %r and %r'
                                % (self.space, other.space))
        return complex(np.vdot(self.amps, other.amps))

    def restricted(self, path):
        """
        Local (pol, oam) block of one path
        """
        return self.amps[self.space.path_slice(path)]

    def to_text(self, tolerance=None):
        lines = []
        for mode, amp in sorted(self.terms(tolerance).items(),
                                key=lambda x: self.space.index(x[0])):
            lines.append('%s %s' % (mode, format_amplitude(amp)))
        return '\n'.join(lines)
