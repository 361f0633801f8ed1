# -*- coding: utf-8 -*-
"""
Four-dimensional CPF gate on photonic OAM.

Qudit levels are carried by horizontally polarized OAM modes,
|0> = |l=-2>, |1> = |-1>, |2> = |0>, |3> = |+1>. The auxiliary subspace
index is p = 1, so the auxiliaries use l = -1 and l = +1.
"""
import os
import math
import logging
import functools
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import settings
from .enums import Pol, BellOutcome, Readout
from .modes import Mode, ModeSpace, SinglePhotonState
from .elements import Element
from .elements import parse_element
from .elements import element_transform
from .elements import compose_transforms
from .elements import apply_to_single_photon
from .conventions import default_conventions
from .fock import MultiPhotonState
from .fock import DetectionPattern
from .fock import inject_product
from .fock import apply_transform
from .fock import apply_sequence
from .fock import project_pair
from .fock import outcome_distribution
from .fock import pol_vector
from .fock import sample_counts
from .protocol import QuditState, correction_unitary
from .noise import IDEAL, NoiseSpec, draw_ensemble
from .exceptions import EncodingError
from .exceptions import EmptyPostSelection
from .exceptions import NotNormalized
from .exceptions import TruncationOverflow

log = logging.getLogger('hdcpf')

D = 4
P = 1
QUDIT_OAM = (-2, -1, 0, 1)
HD_PATHS = ('A', 'B', 'N1', 'P1', 'P2', 'N3', 'C', 'D')
PIPELINE_PATHS = tuple(p + '1' for p in HD_PATHS) + \
    tuple(p + '2' for p in HD_PATHS) + ('E', 'F')
AMBIGUOUS = 'ambiguous'

_SQ = 1 / math.sqrt(2)
_PI = math.pi


def ocnot_closed_form(k, pol, oam):
    """
    Closed-form image of |pol>|oam> under the O_k-CNOT as {pol: amplitude},
    every term carrying OAM -oam
    """
    if k == 1:
        c, s = math.cos(oam * _PI / 2), math.sin(oam * _PI / 2)
        if pol == Pol.H:
            return {Pol.H: c, Pol.V: -1j * s}
        return {Pol.H: 1j * s, Pol.V: -c}
    if k == 2:
        phase = np.exp(1j * (oam - 1) * _PI / 2)
        pref = np.exp(-1j * (oam - 1) * _PI / 4)
        if pol == Pol.H:
            return {Pol.H: pref * (1 - phase) / 2,
                    Pol.V: pref * 1j * (1 + phase) / 2}
        return {Pol.H: -pref * (1 + phase) / 2,
                Pol.V: -pref * 1j * (1 - phase) / 2}
    raise ValueError('O_k-CNOT order must be 1 or 2')


class OkCnot(object):

    def __init__(self, k, transform, path):
        self.k = k
        self.transform = transform
        self.path = path

    def __repr__(self):
        return '<OkCnot: k=%d @%s>' % (self.k, self.path)

    def closed_form(self):
        space = self.transform.space
        matrix = np.eye(space.dim, dtype=complex)
        offset = space.offset(self.path)
        block = slice(offset, offset + space.block)
        matrix[block, block] = 0
        for pol in (Pol.H, Pol.V):
            for oam in space.oam_values():
                col = offset + space.local_index(pol, oam)
                for out, amp in ocnot_closed_form(self.k, pol, oam).items():
                    matrix[offset + space.local_index(out, -oam), col] = amp
        return matrix

    def deviation(self):
        return float(np.abs(self.transform.dense() -
                            self.closed_form()).max())


def build_ok_cnot(k, space=None, path='A', conventions=None):
    space = space or ModeSpace([path])
    element = Element('OCNOT', {'k': k}, path)
    return OkCnot(k, element_transform(element, space, conventions), path)


class HdBeamSplitter(object):
    """
    OAM HD beam splitter for d = 4: l = +1 entering A and every level but
    l = +1 entering B leave at D. Paths carry ``suffix`` so that two
    instances share one mode space.
    """

    def __init__(self, space, suffix='', conventions=None, prepare_b=True,
                 omit=()):
        self.space = space
        self.suffix = suffix
        self.conventions = conventions or default_conventions()
        self.prepare_b = prepare_b
        self.omit = frozenset(omit)
        space.check_paths(*[self.path(p) for p in HD_PATHS])
        if space.L < 2:
            raise TruncationOverflow('The HD beam splitter needs L >= 2, '
                                     'got L = %d' % space.L)
        self.stages = self._stages()
        self._cache = {}

    def __repr__(self):
        return '<HdBeamSplitter: suffix=%r stages=%s>' % (
            self.suffix, ','.join(self.stage_names()))

    def path(self, name):
        return name + self.suffix

    def _stages(self):
        c = self.conventions

        def at(kind, path, **params):
            return Element(kind, params, self.path(path))

        def pbs(x, y, u, w):
            return Element('PBS', {'in': (self.path(x), self.path(y)),
                                   'out': (self.path(u), self.path(w))})

        stages = []
        if self.prepare_b:
            stages.append(('b_prep', [at('OCNOT', 'B', k=2),
                                      at('HWP', 'B', angle=_PI / 4),
                                      at('DP', 'B', angle=0.0),
                                      at('PP', 'B', phase=c.pp_b)]))
        stages.extend([
            ('o1_a', [at('OCNOT', 'A', k=1)]),
            ('pbs1', [pbs('A', 'N1', 'P1', 'P2')]),
            ('o2_p2', [at('OCNOT', 'P2', k=2)]),
            ('pbs2', [pbs('P2', 'B', 'D', 'P2')]),
            ('p2_stack', [at('OCNOT', 'P2', k=2), at('MIRROR', 'P2'),
                          at('PP', 'P2', phase=c.pp_p2), at('DL', 'P1')]),
            ('pbs3', [pbs('P1', 'P2', 'C', 'N3')]),
            ('outputs', [at('OCNOT', 'C', k=1), at('MIRROR', 'D'),
                         at('OCNOT', 'D', k=2), at('HWP', 'D', angle=_PI / 4),
                         at('DP', 'D', angle=_PI / 4)]),
        ])
        return [(name, [e for e in elements if (name, e.kind) not in
                        self.omit]) for name, elements in stages]

    def stage_names(self):
        return [name for name, _ in self.stages]

    def without(self, stage, kind):
        """
        Copy with every ``kind`` element of ``stage`` removed
        """
        return HdBeamSplitter(self.space, self.suffix, self.conventions,
                              self.prepare_b, self.omit | {(stage, kind)})

    def _compose(self, key, elements):
        if key not in self._cache:
            self._cache[key] = compose_transforms(
                [element_transform(e, self.space, self.conventions)
                 for e in elements])
        return self._cache[key]

    def stage_transform(self, name):
        return self._compose(name, dict(self.stages)[name])

    def transform(self):
        return self._compose('all', [e for _, elements in self.stages
                                     for e in elements])

    def halves(self):
        """
        Transforms before and after the point between PBS2 and the P2
        stack where the interferometer phase drifts
        """
        names = self.stage_names()
        cut = names.index('pbs2') + 1
        before = [e for _, elements in self.stages[:cut] for e in elements]
        after = [e for _, elements in self.stages[cut:] for e in elements]
        return self._compose('before', before), self._compose('after', after)

    def jitter_transform(self, zeta):
        return element_transform(
            Element('PP', {'phase': zeta}, self.path('P2')), self.space,
            self.conventions)

    def apply(self, state):
        return apply_to_single_photon(self.transform(), state)


def build_hd_beamsplitter(space=None, suffix='', conventions=None,
                          prepare_b=True):
    if space is None:
        space = ModeSpace([p + suffix for p in HD_PATHS])
    return HdBeamSplitter(space, suffix, conventions, prepare_b)


@dataclass
class TranscriptBlock:
    input: Mode
    stages: dict = field(default_factory=dict)


@dataclass
class Divergence:
    fixture: str
    input: str
    stage: str
    position: int
    expected: str
    got: str
    deviation: float


@dataclass
class TranscriptReport:
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures

    @property
    def first_divergence(self):
        if not self.failures:
            return None
        return min(self.failures, key=lambda f: f.position)

    def summary(self):
        if self.ok:
            return '%d transcript lines match' % self.checked
        first = self.first_divergence
        return '%d of %d lines diverge, first at %s (%s, input %s)' % (
            len(self.failures), self.checked, first.stage, first.fixture,
            first.input)


def load_transcript(name):
    path = os.path.join(settings.DATA_DIR, 'transcripts', '%s.txt' % name)
    blocks = []
    with open(path, 'r') as f:
        for line in f:
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            head, rest = line.split(None, 1)
            if head == 'input':
                blocks.append(TranscriptBlock(Mode.parse(rest)))
            else:
                blocks[-1].stages.setdefault(head, []).append(rest)
    return blocks


def _rename(mode, suffix):
    return Mode(mode.path + suffix, mode.pol, mode.oam)


def check_stages(stages, space, fixture, suffix='', conventions=None):
    """
    Runs every fixture input through ``stages`` one element at a time and
    compares the state at the end of each stage the fixture lists
    """
    report = TranscriptReport()
    tolerance = settings.UNITARY_TOLERANCE
    names = [name for name, _ in stages]
    for block in load_transcript(fixture):
        state = SinglePhotonState.basis(space, _rename(block.input, suffix))
        for position, (name, elements) in enumerate(stages):
            for e in elements:
                state = apply_to_single_photon(
                    element_transform(e, space, conventions), state)
            if name not in block.stages:
                continue
            terms = []
            for line in block.stages[name]:
                mode, re_part, im_part = line.split()
                terms.append((_rename(Mode.parse(mode), suffix),
                              complex(float(re_part), float(im_part))))
            expected = SinglePhotonState.from_terms(space, terms)
            deviation = float(np.abs(state.amps - expected.amps).max())
            report.checked += 1
            if deviation > tolerance:
                report.failures.append(Divergence(
                    fixture, str(block.input), name, position,
                    expected.to_text().replace('\n', '; '),
                    state.to_text().replace('\n', '; '), deviation))
        for name in block.stages:
            if name not in names:
                report.checked += 1
                report.failures.append(Divergence(
                    fixture, str(block.input), name, len(names), '', '',
                    float('inf')))
    return report


def transcript_check(bs, fixtures=('port_a', 'port_b')):
    report = TranscriptReport()
    for fixture in fixtures:
        part = check_stages(bs.stages, bs.space, fixture, bs.suffix,
                            bs.conventions)
        report.checked += part.checked
        report.failures.extend(part.failures)
    log.debug('[%s] %s' % (log.name.upper(), report.summary()))
    return report


def qudit_to_photon(vector, space, path, pol=Pol.H):
    amps = np.zeros(space.dim, dtype=complex)
    for level, amp in enumerate(vector):
        amps[space.index(Mode(path, pol, QUDIT_OAM[level]))] = amp
    return SinglePhotonState(space, amps)


def photon_to_qudit(state, path=None):
    """
    Qudit amplitudes of a horizontally polarized photon, raises
    EncodingError for content outside the d = 4 alphabet
    """
    if path is None:
        paths = state.paths()
        if len(paths) != 1:
            raise EncodingError('Expected a photon on one path, found %s'
                                % (', '.join(paths) or 'none'))
        path = paths[0]
    vector = np.array([state.amplitude(Mode(path, Pol.H, oam))
                       for oam in QUDIT_OAM])
    leak = state.norm() ** 2 - float(np.vdot(vector, vector).real)
    if leak > settings.NORM_TOLERANCE:
        raise EncodingError('%.3g of the photon lies outside the qudit '
                            'alphabet' % leak)
    return vector


@dataclass(frozen=True)
class PreparationRecipe:
    row: int
    label: str
    target: tuple
    elements: tuple = ()
    post_select: bool = True
    direct: bool = False


def _recipe(row, label, target, elements=(), direct=False):
    norm = math.sqrt(sum(abs(x) ** 2 for x in target))
    return PreparationRecipe(row, label, tuple(x / norm for x in target),
                             tuple(elements), True, direct)


_ROW_MINUS = ('QWP(angle=-pi/4)', 'QP(q=1/2)', 'QWP(angle=-pi/4)')
_ROW_PLUS = ('QWP(angle=pi/4)', 'QP(q=1/2)', 'QWP(angle=pi/4)')

PREPARATION_RECIPES = dict((r.row, r) for r in [
    _recipe(1, '|-2>', (1, 0, 0, 0), _ROW_MINUS + ('SPP(dl=-1)', )),
    _recipe(2, '|-1>', (0, 1, 0, 0), _ROW_MINUS),
    _recipe(3, '|0>', (0, 0, 1, 0), _ROW_PLUS + ('SPP(dl=-1)', )),
    _recipe(4, '|+1>', (0, 0, 0, 1), _ROW_PLUS),
    _recipe(5, '(|-2>+|0>)/sqrt2', (1, 0, 1, 0),
            ('HWP(angle=-pi/8)', ) + _ROW_PLUS +
            ('HWP(angle=pi/8)', 'SPP(dl=-1)')),
    _recipe(6, '(|-1>+|+1>)/sqrt2', (0, 1, 0, 1),
            ('HWP(angle=-pi/8)', ) + _ROW_PLUS + ('HWP(angle=pi/8)', )),
    _recipe(7, '(|-2>-|0>)/sqrt2', (1, 0, -1, 0),
            ('HWP(angle=pi/8)', ) + _ROW_PLUS +
            ('HWP(angle=pi/8)', 'SPP(dl=-1)')),
    _recipe(8, '(|-1>-|+1>)/sqrt2', (0, 1, 0, -1),
            ('HWP(angle=pi/8)', ) + _ROW_PLUS + ('HWP(angle=pi/8)', )),
    _recipe(9, '(|0>+|+1>)/sqrt2', (0, 0, 1, 1), direct=True),
    _recipe(10, '(|-1>+|0>)/sqrt2', (0, 1, 1, 0), direct=True),
])

AUXILIARY_CHAIN = ('QP(q=1/2)', 'QWP(angle=pi/4)', 'QWP(angle=0)')


def _run_chain(descriptors, space, path, conventions=None):
    state = SinglePhotonState.basis(space, Mode(path, Pol.H, 0))
    for text in descriptors:
        element = parse_element('%s@%s' % (text, path))
        state = apply_to_single_photon(
            element_transform(element, space, conventions), state)
    return state


def prepare_input(recipe, space=None, path='A', conventions=None):
    """
    Returns (state, success probability). Element rows start from |H>|0>
    and end on the horizontal output of a PBS.
    """
    if not isinstance(recipe, PreparationRecipe):
        try:
            recipe = PREPARATION_RECIPES[int(recipe)]
        except (KeyError, ValueError):
            raise ValueError('Unknown preparation row %r' % (recipe, ))
    space = space or ModeSpace([path])
    if recipe.direct:
        return qudit_to_photon(recipe.target, space, path), 1.0

    descriptors = recipe.elements
    if recipe.post_select:
        descriptors = descriptors + ('POL(angle=0)', )
    state = _run_chain(descriptors, space, path, conventions)
    probability = state.norm() ** 2
    log.debug('[%s] Row %d prepared with probability %.6g'
              % (log.name.upper(), recipe.row, probability))
    return state.normalized(), probability


def prepare_auxiliary(space=None, path='B', conventions=None):
    """
    (|V>|-1> + |H>|+1>)/sqrt2 straight from |H>|0>; the closing QWP(0)
    removes the relative phase i the first two plates leave behind
    """
    space = space or ModeSpace([path])
    return _run_chain(AUXILIARY_CHAIN, space, path, conventions)


ARM_PHOTON2 = (('arm2_o2', 'OCNOT(k=2)'),
               ('arm2_qwp_in', 'QWP(angle=-pi/4)'),
               ('arm2_qp', 'QP(q=1/2)'),
               ('arm2_qwp_out', 'QWP(angle=-pi/4)'),
               ('arm2_hwp', 'HWP(angle=0)'))
ARM_PHOTON3 = (('arm3_o2', 'OCNOT(k=2)'),
               ('arm3_qwp_phase', 'QWP(angle=pi/2)'),
               ('arm3_qwp_in', 'QWP(angle=-pi/4)'),
               ('arm3_qp', 'QP(q=1/2)'),
               ('arm3_qwp_out', 'QWP(angle=0)'))


class BsmStage(object):
    """
    Moves the auxiliary qubits of photons 2 and 3 into polarization at
    l = 0, |p> -> H and |d-1> -> V, with a Hadamard on photon 3, then reads
    them out either with ideal polarization Bell projectors or with a PBS
    and two diagonal analyzers
    """

    def __init__(self, space, readout=Readout.PROJECTIVE, arms=('D1', 'D2'),
                 outputs=('E', 'F'), conventions=None):
        self.space = space
        self.readout = readout
        self.arms = tuple(arms)
        self.outputs = tuple(outputs)
        self.conventions = conventions or default_conventions()
        space.check_paths(*self.arms)
        self.stages = [(name, [parse_element('%s@%s' % (text, arm))])
                       for arm, chain in zip(self.arms,
                                             (ARM_PHOTON2, ARM_PHOTON3))
                       for name, text in chain]
        if readout == Readout.PBS:
            space.check_paths(*self.outputs)
            self.stages.append(('combine', [Element(
                'PBS', {'in': self.arms, 'out': self.outputs})]))
        self.transform = compose_transforms(
            [element_transform(e, space, self.conventions)
             for _, elements in self.stages for e in elements])
        self.decoder = self._derive_decoder()

    def __repr__(self):
        return '<BsmStage: %s>' % Readout.NAMES[self.readout]

    def bell_vectors(self):
        """
        Polarization Bell states of the two arms at l = 0 as (block, block)
        arrays, H standing for |p> and V for |d-1>
        """
        h = pol_vector(self.space, Pol.H)
        v = pol_vector(self.space, Pol.V)
        return {
            BellOutcome.PHI_PLUS: _SQ * (np.outer(h, h) + np.outer(v, v)),
            BellOutcome.PHI_MINUS: _SQ * (np.outer(h, h) - np.outer(v, v)),
            BellOutcome.PSI_PLUS: _SQ * (np.outer(h, v) + np.outer(v, h)),
            BellOutcome.PSI_MINUS: _SQ * (np.outer(h, v) - np.outer(v, h)),
        }

    def analyzers(self):
        h = pol_vector(self.space, Pol.H)
        v = pol_vector(self.space, Pol.V)
        return [('D', _SQ * (h + v)), ('A', _SQ * (h - v))]

    def _derive_decoder(self):
        if self.readout == Readout.PROJECTIVE:
            return dict((BellOutcome.NAMES[o], o) for o in BellOutcome.ALL)

        combine = element_transform(self.stages[-1][1][0], self.space,
                                    self.conventions)
        first, second = (self.space.offset(a) for a in self.arms)
        seen = defaultdict(set)
        for outcome, vector in self.bell_vectors().items():
            terms = {}
            for i, j in zip(*np.nonzero(vector)):
                terms[(first + i, second + j)] = vector[i, j]
            state = apply_transform(combine,
                                    MultiPhotonState(self.space, terms, 2))
            resolution = dict((path, self.analyzers())
                              for path in self.outputs)
            for pattern, p in outcome_distribution(state,
                                                   resolution).items():
                if p > settings.NORM_TOLERANCE:
                    seen[pattern].add(outcome)
        decoder = {}
        for pattern, outcomes in seen.items():
            single = all('+' not in x and x != '-' for x in pattern)
            if single and len(outcomes) == 1:
                decoder[pattern] = outcomes.pop()
            else:
                decoder[pattern] = AMBIGUOUS
        return decoder

    def decode(self, pattern):
        return self.decoder.get(tuple(pattern), AMBIGUOUS)

    def distinguishable(self):
        return sorted(set(o for o in self.decoder.values()
                          if o != AMBIGUOUS))

    def heralds(self):
        """
        Yields (key, outcome, two-photon vector, paths) for each heralding
        projection the readout performs
        """
        if self.readout == Readout.PROJECTIVE:
            for outcome, vector in sorted(self.bell_vectors().items()):
                yield outcome, outcome, vector, self.arms
            return
        analyzers = dict(self.analyzers())
        for pattern, outcome in sorted(self.decoder.items()):
            if outcome == AMBIGUOUS:
                continue
            vector = np.outer(analyzers[pattern[0]], analyzers[pattern[1]])
            yield (outcome, pattern), outcome, vector, self.outputs


def build_bsm_stage(space=None, readout=Readout.PROJECTIVE, conventions=None):
    if isinstance(readout, str):
        readout = Readout.NAMES.index(readout)
    space = space or ModeSpace(['D1', 'D2', 'E', 'F'])
    return BsmStage(space, readout, conventions=conventions)


class CpfPipeline(object):
    """
    Photons 1 and 4 enter the A ports of two HD beam splitters, the
    auxiliaries 2 and 3 the B ports. One photon per output port is kept,
    the D outputs go through the BSM stage and the C outputs carry the
    heralded qudits.
    """

    def __init__(self, L=settings.DEFAULT_TRUNCATION, conventions=None,
                 readout=Readout.PROJECTIVE):
        self.conventions = conventions or default_conventions()
        self.readout = readout
        self.space = ModeSpace(PIPELINE_PATHS, L)
        self.splitters = tuple(HdBeamSplitter(self.space, suffix,
                                              self.conventions,
                                              prepare_b=False)
                               for suffix in ('1', '2'))
        self.bsm = BsmStage(self.space, readout, conventions=self.conventions)
        aux = prepare_auxiliary(ModeSpace(['B'], L),
                                conventions=self.conventions)
        self.aux_local = np.array(aux.restricted('B'))
        self.aux_top = self.space.local_index(Pol.H, QUDIT_OAM[D - 1])
        self.pattern = DetectionPattern({'C1': 1, 'D1': 1, 'C2': 1, 'D2': 1})
        self._components = {}

    def __repr__(self):
        return '<CpfPipeline: L=%d readout=%s>' % (
            self.space.L, Readout.NAMES[self.readout])

    def _photon(self, path, local):
        amps = np.zeros(self.space.dim, dtype=complex)
        amps[self.space.path_slice(path)] = local
        return SinglePhotonState(self.space, amps)

    def _qudit(self, path, level):
        local = np.zeros(self.space.block, dtype=complex)
        local[self.space.local_index(Pol.H, QUDIT_OAM[level])] = 1
        return self._photon(path, local)

    def evolve(self, c, aux=None, jitter=(0.0, 0.0)):
        """
        Unnormalized corrected heralded vectors {key: 16-vector} for the
        coefficient matrix ``c``; the squared norm of each is the joint
        probability of its heralding pattern
        """
        c = np.asarray(c, dtype=complex)
        aux = aux or (self.aux_local, self.aux_local)
        aux2 = self._photon('B1', aux[0])
        aux3 = self._photon('B2', aux[1])

        terms = defaultdict(complex)
        for m, n in zip(*np.nonzero(np.abs(c) > settings.PRUNE_TOLERANCE)):
            state = inject_product([self._qudit('A1', m), aux2, aux3,
                                    self._qudit('A2', n)])
            for config, amp in state.terms.items():
                terms[config] += c[m, n] * amp
        state = MultiPhotonState(self.space, terms, 4)

        for zeta, splitter in zip(jitter, self.splitters):
            if zeta:
                before, after = splitter.halves()
                state = apply_sequence(
                    [before, splitter.jitter_transform(zeta), after], state)
            else:
                state = apply_transform(splitter.transform(), state)

        # Unnormalized projection on one photon per output port, a single
        # auxiliary component may leave nothing behind
        kept = dict((k, a) for k, a in state.terms.items()
                    if self.pattern.matches(self.space, k))
        state = MultiPhotonState(self.space, kept, 4)
        state = apply_transform(self.bsm.transform, state)

        branches = {}
        for key, outcome, vector, paths in self.bsm.heralds():
            rest = project_pair(state, paths, vector)
            heralded = self._decode(rest)
            branches[key] = correction_unitary(outcome, D).dot(heralded)
        return branches

    def _decode(self, rest):
        vector = np.zeros(D * D, dtype=complex)
        for m in range(D):
            for n in range(D):
                vector[m * D + n] = rest.amplitude(
                    [Mode('C1', Pol.H, QUDIT_OAM[m]),
                     Mode('C2', Pol.H, QUDIT_OAM[n])])
        leak = rest.mass() - float(np.vdot(vector, vector).real)
        if leak > settings.NORM_TOLERANCE:
            raise EncodingError('%.3g of a heralded branch leaves the qudit '
                                'alphabet' % leak)
        return vector

    def _operators(self, aux=None, jitter=(0.0, 0.0)):
        ops = {}
        for j in range(D * D):
            e = np.zeros(D * D, dtype=complex)
            e[j] = 1
            for key, vector in self.evolve(e.reshape(D, D), aux,
                                           jitter).items():
                ops.setdefault(key, np.zeros((D * D, D * D),
                                             dtype=complex))[:, j] = vector
        return ops

    def _aux_components(self):
        """
        Operators with each auxiliary fixed to one of its two components,
        the map is bilinear in the two auxiliary photons
        """
        if not self._components:
            locals_ = []
            for index in np.flatnonzero(np.abs(self.aux_local) >
                                        settings.PRUNE_TOLERANCE):
                unit = np.zeros(self.space.block, dtype=complex)
                unit[index] = 1
                locals_.append((int(index), unit))
            for i, u2 in locals_:
                for j, u3 in locals_:
                    self._components[(i, j)] = self._operators((u2, u3))
        return self._components

    def transfer_operators(self, realization=IDEAL):
        """
        {key: 16 x 16} heralded maps for one noise realization
        """
        aux = []
        for phase in realization.aux_phase:
            local = self.aux_local.copy()
            local[self.aux_top] *= np.exp(1j * phase)
            aux.append(local)

        if realization.has_jitter:
            ops = self._operators(tuple(aux), realization.jitter)
        else:
            ops = {}
            for (i, j), part in self._aux_components().items():
                weight = aux[0][i] * aux[1][j]
                for key, matrix in part.items():
                    ops[key] = ops.get(key, 0) + weight * matrix
        dephasing = realization.dephasing_operator()
        return dict((k, m.dot(dephasing)) for k, m in ops.items())


@functools.lru_cache(maxsize=8)
def get_pipeline(L=settings.DEFAULT_TRUNCATION, conventions=None,
                 readout=Readout.PROJECTIVE):
    return CpfPipeline(L, conventions, readout)


def input_coefficients(in1, in4=None):
    """
    4 x 4 coefficient matrix of photons 1 and 4 from two photons, two
    qudit vectors or one joint QuditState
    """
    if isinstance(in1, QuditState):
        if in1.d != D:
            raise EncodingError('The OAM gate is four-dimensional, got d=%d'
                                % in1.d)
        return in1.matrix()

    vectors = []
    for photon in (in1, in4):
        if photon is None:
            raise ValueError('Two photons or one joint state are required')
        if isinstance(photon, SinglePhotonState):
            vectors.append(photon_to_qudit(photon))
        else:
            vector = np.asarray(photon, dtype=complex).ravel()
            if vector.shape != (D, ):
                raise EncodingError('Expected %d qudit amplitudes' % D)
            vectors.append(vector)
    c = np.outer(vectors[0], vectors[1])
    norm = math.sqrt(float(np.sum(np.abs(c) ** 2)))
    if abs(norm - 1.0) > settings.NORM_TOLERANCE:
        raise NotNormalized('Input norm is %.12g' % norm)
    return c


@dataclass
class CpfResult:
    density: np.ndarray
    probability: float
    branches: dict
    postselection: float
    state: QuditState = None
    tallies: dict = None

    def fidelity(self, target):
        target = np.asarray(target, dtype=complex).ravel()
        return float(np.vdot(target, self.density.dot(target)).real)


def _outcome(key):
    return key[0] if isinstance(key, tuple) else key


def run_cpf_d4(in1, in4=None, accepted=(BellOutcome.PHI_PLUS, ), noise=None,
               readout=Readout.PROJECTIVE, shots=0, seed=0,
               L=settings.DEFAULT_TRUNCATION, conventions=None,
               ensemble=None):
    """
    Heralded output of the four-photon pipeline. Noisy specs are averaged
    over an ensemble of realizations, ``shots`` > 0 adds sampled herald
    tallies.
    """
    if isinstance(readout, str):
        readout = Readout.NAMES.index(readout)
    accepted = set(BellOutcome.from_name(a) if isinstance(a, str) else a
                   for a in accepted)
    c = input_coefficients(in1, in4).ravel()
    pipeline = get_pipeline(L, conventions, readout)
    if readout == Readout.PBS:
        blind = accepted - set(pipeline.bsm.distinguishable())
        if blind:
            log.warning('[%s] The pbs readout can not herald %s'
                        % (log.name.upper(), ', '.join(
                            BellOutcome.NAMES[o] for o in sorted(blind))))
    ensemble = ensemble or draw_ensemble(noise)

    density = np.zeros((D * D, D * D), dtype=complex)
    branches = defaultdict(float)
    best = (0.0, None)
    for weight, realization in zip(ensemble.weights(),
                                   ensemble.realizations):
        for key, matrix in pipeline.transfer_operators(realization).items():
            out = matrix.dot(c)
            p = float(np.vdot(out, out).real)
            outcome = _outcome(key)
            branches[outcome] += weight * p
            if outcome in accepted:
                density += weight * np.outer(out, out.conj())
                if p > best[0]:
                    best = (p, out)

    herald = float(np.trace(density).real)
    if herald <= settings.NORM_TOLERANCE:
        raise EmptyPostSelection('No accepted Bell outcome is heralded')
    density /= herald
    survival = ensemble.survival()

    state = None
    if ensemble.spec.is_coherent():
        state = QuditState(D, best[1] / math.sqrt(best[0]))

    result = CpfResult(
        density=density, probability=herald * survival,
        branches=dict((BellOutcome.NAMES[o], p * survival)
                      for o, p in branches.items()),
        postselection=sum(branches.values()), state=state)

    if shots:
        dist = dict(result.branches)
        dist['none'] = max(0.0, 1.0 - sum(dist.values()))
        result.tallies = sample_counts(dist, shots, seed, 'cpf_d4')
    log.info('[%s] CPF run heralded with probability %.6g'
             % (log.name.upper(), result.probability))
    return result


@functools.lru_cache(maxsize=64)
def _kraus(noise, accepted, readout, L, conventions, samples):
    pipeline = get_pipeline(L, conventions, readout)
    ensemble = draw_ensemble(noise, samples)
    kraus = []
    for weight, realization in zip(ensemble.weights(),
                                   ensemble.realizations):
        for key, matrix in pipeline.transfer_operators(realization).items():
            if _outcome(key) in accepted:
                kraus.append(math.sqrt(weight) * matrix)
    return tuple(kraus), ensemble.survival()


def heralded_kraus(noise=None, accepted=(BellOutcome.PHI_PLUS, ),
                   readout=Readout.PROJECTIVE,
                   L=settings.DEFAULT_TRUNCATION, conventions=None,
                   samples=None):
    """
    Kraus operators of the accepted heralded channel on the 16-dimensional
    two-qudit space and the loss survival factor. The operators are not
    normalized; sum_k K^dagger K carries the herald probability before loss.
    """
    if isinstance(readout, str):
        readout = Readout.NAMES.index(readout)
    accepted = tuple(sorted(set(BellOutcome.from_name(a)
                                if isinstance(a, str) else a
                                for a in accepted)))
    noise = noise or NoiseSpec().clean()
    return _kraus(noise, accepted, readout, L, conventions, samples)


def pipeline_elements(readout=Readout.PROJECTIVE,
                      L=settings.DEFAULT_TRUNCATION, conventions=None):
    """
    Elements of the four-photon pipeline in device order: both HD beam
    splitters, then the BSM stage
    """
    if isinstance(readout, str):
        readout = Readout.NAMES.index(readout)
    pipeline = get_pipeline(L, conventions, readout)
    elements = []
    for splitter in pipeline.splitters:
        elements.extend(e for _, stage in splitter.stages for e in stage)
    elements.extend(e for _, stage in pipeline.bsm.stages for e in stage)
    return elements
