# -*- coding: utf-8 -*-
"""
Multi-photon states in the occupation representation.

A configuration is the sorted tuple of dense mode indices of the photons,
so ``(3, 3, 17)`` holds two photons in mode 3 and one in mode 17. Stored
amplitudes are coefficients on the normalized occupation basis: the
``sqrt(k!)`` factor of a k-fold occupied mode lives in the basis, not in
the amplitude.
"""
import math
import hashlib
import logging
import itertools
from collections import Counter, defaultdict

import numpy as np
from scipy import linalg, sparse
from scipy.stats import unitary_group

from . import settings
from .enums import Pol
from .modes import Mode, format_amplitude
from .elements import ModeTransform
from .decorators import require_same_space
from .exceptions import SpaceMismatch
from .exceptions import BasisIncomplete
from .exceptions import EmptyPostSelection
from .exceptions import TruncationOverflow

log = logging.getLogger('hdcpf')


def _occupation_factor(config):
    """
    prod sqrt(m_k!) over the occupied modes of ``config``
    """
    factor = 1.0
    for count in Counter(config).values():
        if count > 1:
            factor *= math.sqrt(math.factorial(count))
    return factor


class MultiPhotonState(object):

    def __init__(self, space, terms, n=None, probability=1.0):
        self.space = space
        self.terms = dict((tuple(sorted(c)), complex(a))
                          for c, a in terms.items())
        if n is None:
            n = len(next(iter(self.terms))) if self.terms else 0
        for config in self.terms:
            if len(config) != n:
                raise ValueError('Configuration %r does not hold %d photons'
                                 % (config, n))
            if config and not 0 <= config[-1] < space.dim:
                raise SpaceMismatch('Configuration %r does not fit %r'
                                    % (config, space))
        self.n = n
        self.probability = probability

    def __repr__(self):
        return '<MultiPhotonState: n=%d terms=%d>' % (self.n, len(self.terms))

    def __len__(self):
        return len(self.terms)

    def mass(self):
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def norm(self):
        return math.sqrt(self.mass())

    def normalized(self):
        norm = self.norm()
        if norm == 0:
            return self
        return MultiPhotonState(self.space, dict(
            (c, a / norm) for c, a in self.terms.items()), self.n,
            self.probability)

    def pruned(self, tolerance=None):
        tolerance = settings.PRUNE_TOLERANCE if tolerance is None \
            else tolerance
        return MultiPhotonState(self.space, dict(
            (c, a) for c, a in self.terms.items() if abs(a) >= tolerance),
            self.n, self.probability)

    def amplitude(self, modes):
        config = tuple(sorted(self.space.index(m) if isinstance(m, Mode)
                              else self.space.index(Mode.parse(m))
                              for m in modes))
        return self.terms.get(config, 0j)

    def modes(self, config):
        return [self.space.mode(i) for i in config]

    def path_counts(self, config):
        return Counter(self.space.path_of(i) for i in config)

    def overlap(self, other):
        if other.space != self.space:
            raise SpaceMismatch('Overlap across %r and %r'
                                % (self.space, other.space))
        return complex(sum(a.conjugate() * other.terms.get(c, 0)
                           for c, a in self.terms.items()))

    def to_text(self, tolerance=None):
        """
        One line per term, ``path:pol:l[,path:pol:l...] re im``
        """
        tolerance = settings.PRUNE_TOLERANCE if tolerance is None \
            else tolerance
        lines = []
        for config in sorted(self.terms):
            amp = self.terms[config]
            if abs(amp) < tolerance:
                continue
            label = ','.join(str(m) for m in self.modes(config))
            lines.append('%s %s' % (label, format_amplitude(amp)))
        return '\n'.join(lines)

    @classmethod
    def from_text(cls, space, text):
        terms = defaultdict(complex)
        for line in text.splitlines():
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            label, re_part, im_part = line.split()
            config = tuple(sorted(space.index(Mode.parse(m))
                                  for m in label.split(',')))
            terms[config] += complex(float(re_part), float(im_part))
        return cls(space, terms)


class DetectionPattern(object):
    """
    Required photon numbers per path. With ``marginalize_pol_oam`` off the
    keys are full modes (``C:H:0``) and count exact mode occupations.
    """

    def __init__(self, required, marginalize_pol_oam=True):
        for key, count in required.items():
            if int(count) != count or count < 0:
                raise ValueError('Photon count for %s must be a non-negative '
                                 'integer' % key)
        self.required = dict((k, int(v)) for k, v in required.items())
        self.marginalize_pol_oam = marginalize_pol_oam

    def __repr__(self):
        return '<DetectionPattern: %s>' % ', '.join(
            '%s:%d' % kv for kv in sorted(self.required.items()))

    def total(self):
        return sum(self.required.values())

    def check(self, space):
        for key in self.required:
            if self.marginalize_pol_oam:
                space.check_paths(key)
            else:
                space.index(Mode.parse(key))

    def matches(self, space, config):
        if self.marginalize_pol_oam:
            counts = Counter(space.path_of(i) for i in config)
        else:
            counts = Counter(str(space.mode(i)) for i in config)
        return all(counts.get(k, 0) == v for k, v in self.required.items())


def inject_product(photons):
    """
    Symmetrized product of single-photon states: prod_i (sum_j phi_i(j)
    a_j^dagger) |0>, renormalized
    """
    photons = list(photons)
    if not photons:
        raise ValueError('At least one photon is required')
    space = photons[0].space
    for p in photons[1:]:
        if p.space != space:
            raise SpaceMismatch('Photons live on %r and %r'
                                % (space, p.space))

    supports = [[(j, a) for j, a in enumerate(p.amps) if a != 0]
                for p in photons]
    terms = defaultdict(complex)
    for choice in itertools.product(*supports):
        config = tuple(sorted(j for j, _ in choice))
        amp = 1.0 + 0j
        for _, a in choice:
            amp *= a
        terms[config] += amp * _occupation_factor(config)

    probability = 1.0
    for p in photons:
        probability *= p.probability
    state = MultiPhotonState(space, terms, len(photons), probability)
    return state.pruned().normalized()


@require_same_space
def apply_transform(t, s):
    """
    Substitutes a_j^dagger -> sum_k M[k, j] a_k^dagger in every term
    """
    tolerance = settings.PRUNE_TOLERANCE
    overflow = t.overflow
    out = defaultdict(complex)
    for config, amp in s.terms.items():
        if abs(amp) < tolerance:
            continue
        if overflow and overflow.intersection(config):
            raise TruncationOverflow(
                '%s shifts %s outside the truncation window'
                % (t.provenance, ', '.join(
                    str(s.space.mode(j)) for j in config if j in overflow)))
        scale = amp / _occupation_factor(config)
        columns = [t.column(j) for j in config]
        for choice in itertools.product(*columns):
            target = tuple(sorted(k for k, _ in choice))
            value = scale
            for _, m in choice:
                value *= m
            out[target] += value * _occupation_factor(target)

    terms = dict((c, a) for c, a in out.items() if abs(a) >= tolerance)
    return MultiPhotonState(s.space, terms, s.n, s.probability)


def apply_sequence(transforms, s):
    for t in transforms:
        s = apply_transform(t, s)
    return s


def post_select(s, pattern):
    """
    Keeps the configurations matching ``pattern``; returns the renormalized
    state and the matching probability
    """
    pattern.check(s.space)
    if pattern.total() > s.n:
        raise EmptyPostSelection('Pattern %r asks for %d photons of %d'
                                 % (pattern, pattern.total(), s.n))
    total = s.mass()
    kept = dict((c, a) for c, a in s.terms.items()
                if pattern.matches(s.space, c))
    kept_mass = sum(abs(a) ** 2 for a in kept.values())
    if total == 0 or kept_mass <= settings.PRUNE_TOLERANCE ** 2:
        raise EmptyPostSelection('No term survives %r' % pattern)
    probability = min(1.0, kept_mass / total)
    log.debug('[%s] Post-selection %r kept %.6g'
              % (log.name.upper(), pattern, probability))
    state = MultiPhotonState(s.space, kept, s.n, s.probability * probability)
    return state.normalized(), probability


def project_pair(s, paths, vector):
    """
    Contracts the photons on two paths with a two-photon vector given as a
    (block, block) array over the local (pol, oam) indices of both paths.
    The result keeps the remaining photons and is not renormalized; configs
    without exactly one photon on each path drop out.
    """
    first, second = paths
    s.space.check_paths(first, second)
    vector = np.asarray(vector, dtype=complex)
    block = s.space.block
    if vector.shape != (block, block):
        raise SpaceMismatch('Pair vector of shape %r does not fit block %d'
                            % (vector.shape, block))
    off1, off2 = s.space.offset(first), s.space.offset(second)
    out = defaultdict(complex)
    for config, amp in s.terms.items():
        on1 = [j for j in config if off1 <= j < off1 + block]
        on2 = [j for j in config if off2 <= j < off2 + block]
        if len(on1) != 1 or len(on2) != 1:
            continue
        weight = vector[on1[0] - off1, on2[0] - off2]
        if weight == 0:
            continue
        rest = list(config)
        rest.remove(on1[0])
        rest.remove(on2[0])
        out[tuple(rest)] += weight.conjugate() * amp
    terms = dict((c, a) for c, a in out.items()
                 if abs(a) >= settings.PRUNE_TOLERANCE)
    return MultiPhotonState(s.space, terms, s.n - 2, s.probability)


def pol_vector(space, pol, oam=0):
    v = np.zeros(space.block, dtype=complex)
    v[space.local_index(pol, oam)] = 1
    return v


def local_basis_transform(space, path, vectors):
    """
    Unitary on ``path`` whose first rows are the conjugated ``vectors``;
    the rest is an orthonormal completion
    """
    rows = np.array([np.asarray(v, dtype=complex) for v in vectors])
    gram = rows.conj().dot(rows.T)
    if np.abs(gram - np.eye(len(rows))).max() > settings.NORM_TOLERANCE:
        raise BasisIncomplete('Basis vectors on %s are not orthonormal'
                              % path)
    complement = linalg.null_space(rows.conj())
    local = np.vstack([rows.conj(), complement.conj().T])
    blocks = [sparse.csc_matrix(local) if p == path else
              sparse.identity(space.block, dtype=complex, format='csc')
              for p in space.paths]
    return ModeTransform(space, sparse.block_diag(blocks, format='csc'),
                         provenance='basis@%s' % path)


def _label(space, index, resolution):
    mode = space.mode(index)
    if resolution == 'pol':
        return Pol.NAMES[mode.pol]
    if resolution == 'oam':
        return '%d' % mode.oam
    return '%s:%d' % (Pol.NAMES[mode.pol], mode.oam)


def _alphabet(resolution):
    if resolution == 'pol':
        return list(Pol.NAMES)
    if isinstance(resolution, (list, tuple)):
        return [name for name, _ in resolution]
    return None


def outcome_distribution(s, resolution):
    """
    Joint outcome probabilities for a local measurement. ``resolution`` maps
    a path to 'pol', 'oam', 'mode' or a list of (label, local vector), and a
    pair of paths to a list of (label, two-photon vector). Outcome keys are
    tuples of labels in the order of ``resolution``.
    """
    keys = list(resolution)
    total = s.mass()
    if total == 0:
        raise EmptyPostSelection('Cannot resolve an empty state')

    covered = set()
    for key in keys:
        covered.update(key if isinstance(key, tuple) else (key, ))
    occupied = set(s.space.path_of(i) for c in s.terms for i in c)
    missing = occupied - covered
    if missing:
        raise BasisIncomplete('Occupied paths %s are not resolved'
                              % ', '.join(sorted(missing)))

    dist = _resolve(s, keys, resolution)
    unresolved = sum(p for k, p in dist.items() if 'unresolved' in k)
    if unresolved > settings.NORM_TOLERANCE * total:
        raise BasisIncomplete('%.3g of the probability falls outside the '
                              'measurement basis' % (unresolved / total))
    result = dict((k, p / total) for k, p in dist.items()
                  if 'unresolved' not in k)

    alphabets = [_alphabet(resolution[k]) for k in keys]
    single = all(sorted(s.space.path_of(i) for i in c) == sorted(covered)
                 for c in s.terms)
    if single and all(a is not None for a in alphabets):
        for outcome in itertools.product(*alphabets):
            result.setdefault(outcome, 0.0)
    return result


def _resolve(s, keys, resolution):
    """
    Unnormalized outcome masses, pair keys are contracted first
    """
    for position, key in enumerate(keys):
        if not isinstance(key, tuple):
            continue
        rest = keys[:position] + keys[position + 1:]
        dist = defaultdict(float)
        resolved = 0.0
        for name, vector in resolution[key]:
            branch = project_pair(s, key, vector)
            resolved += branch.mass()
            if not branch.terms:
                continue
            for outcome, p in _resolve(branch, rest, resolution).items():
                dist[_insert(outcome, position, name)] += p
        leftover = s.mass() - resolved
        if leftover > settings.NORM_TOLERANCE:
            dist[_insert(('unresolved', ) * len(rest), position,
                         'unresolved')] += leftover
        return dist

    for key in keys:
        if isinstance(resolution[key], (list, tuple)):
            names = [name for name, _ in resolution[key]]
            vectors = [v for _, v in resolution[key]]
            s = apply_transform(local_basis_transform(s.space, key, vectors),
                                s)
            resolution = dict(resolution)
            resolution[key] = names

    dist = defaultdict(float)
    for config, amp in s.terms.items():
        outcome = []
        for key in keys:
            offset = s.space.offset(key)
            labels = []
            for i in config:
                if s.space.path_of(i) != key:
                    continue
                if isinstance(resolution[key], list):
                    local = i - offset
                    names = resolution[key]
                    labels.append(names[local] if local < len(names)
                                  else 'unresolved')
                else:
                    labels.append(_label(s.space, i, resolution[key]))
            outcome.append('+'.join(sorted(labels)) if labels else '-')
        dist[tuple(outcome)] += abs(amp) ** 2
    return dist


def _insert(outcome, position, name):
    outcome = list(outcome)
    outcome.insert(position, name)
    return tuple(outcome)


def keyed_generator(seed, experiment='default'):
    """
    Counter-based generator keyed by (seed, experiment id); independent
    streams for distinct experiments under one seed
    """
    digest = hashlib.sha256(str(experiment).encode('utf-8')).digest()
    key = (int(seed) % 2 ** 64) << 64 | int.from_bytes(digest[:8], 'big')
    return np.random.Generator(np.random.Philox(key=key))


def sample_counts(dist, shots, seed, experiment='default'):
    """
    Multinomial draw of ``shots`` events over ``dist``. A distribution
    without weight has nothing to draw from and raises EmptyPostSelection.
    """
    if shots < 0:
        raise ValueError('shots must be non-negative')
    outcomes = sorted(dist, key=str)
    counts = dict((o, 0) for o in outcomes)
    if shots == 0 or not outcomes:
        return counts
    p = np.clip(np.array([dist[o] for o in outcomes], dtype=float), 0, None)
    total = p.sum()
    if not total > 0:
        raise EmptyPostSelection('No weight to sample %d shots from' % shots)
    p = p / total
    draws = keyed_generator(seed, experiment).multinomial(shots, p)
    for o, c in zip(outcomes, draws):
        counts[o] = int(c)
    return counts


def random_unitary(space, seed):
    """
    Haar-random interferometer on the whole mode space
    """
    rng = np.random.default_rng(seed)
    matrix = unitary_group.rvs(space.dim, random_state=rng)
    return ModeTransform(space, matrix, provenance='haar(%d)' % seed)
