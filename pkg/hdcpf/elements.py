# -*- coding: utf-8 -*-
"""
Single-photon optical elements and their mode transforms.

Descriptors follow the grammar ``KIND(key=value,...)@PATH``; two-path
elements name their paths in the parameters instead,
``PBS(in=[A,N1],out=[P1,P2])``. Angles accept plain floats or multiples of
pi (``pi/8``, ``-pi/4``, ``3*pi/8``).
"""
import re
import math
import logging
import functools

import numpy as np
from scipy import sparse

from . import settings
from .enums import Pol, TransformKind
from .modes import SinglePhotonState
from .conventions import default_conventions
from .decorators import require_same_space
from .exceptions import UnknownElement
from .exceptions import DescriptorError
from .exceptions import ConventionError
from .exceptions import TruncationOverflow
from .exceptions import ValidationError

log = logging.getLogger('hdcpf')

_SQ = 1 / math.sqrt(2)
_DESCRIPTOR_RE = re.compile(r'^\s*([A-Za-z][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*'
                            r'(?:@\s*([A-Za-z0-9_]+))?\s*$')


def _term(text):
    if text.endswith('pi'):
        prefix = text[:-2].rstrip('*')
        if prefix in ('', '+'):
            return math.pi
        if prefix == '-':
            return -math.pi
        return float(prefix) * math.pi
    return float(text)


def parse_number(text):
    """
    '0.3', '1/2', 'pi/8', '-pi/4', '3*pi/8'; finite values only
    """
    text = text.strip().replace(' ', '')
    if not text:
        raise ValueError('missing parameter value')
    numerator, slash, denominator = text.partition('/')
    value = _term(numerator)
    if slash:
        divisor = float(denominator)
        if divisor == 0:
            raise ValueError('division by zero in %s' % text)
        value /= divisor
    if not math.isfinite(value):
        raise ValueError('%s is not a finite number' % text)
    return value


def format_number(value):
    """
    Canonical text of a parameter value; multiples of pi/8 print
    symbolically so that descriptors round-trip
    """
    if isinstance(value, (bool, int)):
        return '%d' % value
    eighths = value * 8 / math.pi
    n = int(round(eighths))
    if n and abs(eighths - n) < 1e-9:
        d = 8 // math.gcd(abs(n), 8)
        n = n * d // 8
        text = '-' if n < 0 else ''
        if abs(n) != 1:
            text += '%d*' % abs(n)
        text += 'pi'
        if d != 1:
            text += '/%d' % d
        return text
    return '%.12g' % (value + 0.0)


# Parameter types
def _float(text):
    return parse_number(text)


def _int(text):
    value = parse_number(text)
    if value != int(value):
        raise ValueError('expected an integer, got %s' % text)
    return int(value)


def _pol(text):
    return Pol.from_name(text)


def _paths(text):
    text = text.strip()
    if not (text.startswith('[') and text.endswith(']')):
        raise ValueError('expected a path list like [A,B]')
    paths = [p.strip() for p in text[1:-1].split(',') if p.strip()]
    if len(paths) != 2:
        raise ValueError('expected exactly two paths')
    if paths[0] == paths[1]:
        raise ValueError('repeated path %s' % paths[0])
    return tuple(paths)


class Param(object):
    def __init__(self, name, parse, required=True, default=None,
                 check=None):
        self.name = name
        self.parse = parse
        self.required = required
        self.default = default
        self.check = check

    def format(self, value):
        if self.parse is _paths:
            return '[%s]' % ','.join(value)
        if self.parse is _pol:
            return Pol.NAMES[value]
        return format_number(value)


def _half_integer_charge(q):
    if abs(2 * q - round(2 * q)) > 1e-12:
        raise ValueError('2q must be an integer; fractional OAM is prepared '
                         'directly, not as a mode transform')


def _order(k):
    if k not in (1, 2):
        raise ValueError('O_k-CNOT order must be 1 or 2')


# kind -> (parameters, number of bound paths via @)
CATALOGUE = {
    'HWP': ([Param('angle', _float)], 1),
    'QWP': ([Param('angle', _float)], 1),
    'QP': ([Param('q', _float, check=_half_integer_charge)], 1),
    'SPP': ([Param('dl', _int)], 1),
    'DP': ([Param('angle', _float),
            Param('pol', _pol, required=False)], 1),
    'PP': ([Param('phase', _float),
            Param('pol', _pol, required=False)], 1),
    'MIRROR': ([], 1),
    'DL': ([], 1),
    'POL': ([Param('angle', _float)], 1),
    'PBS': ([Param('in', _paths), Param('out', _paths)], 0),
    'BS': ([Param('in', _paths), Param('out', _paths)], 0),
    'OCNOT': ([Param('k', _int, check=_order)], 1),
}


class Element(object):
    """
    Parsed element descriptor
    """

    def __init__(self, kind, params=None, path=None):
        kind = kind.upper()
        if kind not in CATALOGUE:
            raise UnknownElement('Unknown element kind %s' % kind)
        self.kind = kind
        self.params = dict(params or {})
        self.path = path
        spec, bound = CATALOGUE[kind]
        for p in spec:
            if p.name not in self.params:
                if p.required:
                    raise DescriptorError('%s requires parameter %s'
                                          % (kind, p.name))
                continue
            if p.check:
                try:
                    p.check(self.params[p.name])
                except ValueError as e:
                    raise ValidationError(['%s.%s: %s' % (kind, p.name, e)])
        unknown = set(self.params) - set(p.name for p in spec)
        if unknown:
            raise DescriptorError('%s does not take %s'
                                  % (kind, ', '.join(sorted(unknown))))
        if bound and not path:
            raise DescriptorError('%s must be bound to a path with @PATH'
                                  % kind)
        if not bound and path:
            raise DescriptorError('%s names its paths in parameters' % kind)

    @property
    def paths(self):
        if self.path:
            return (self.path, )
        return tuple(self.params['in']) + tuple(
            p for p in self.params['out'] if p not in self.params['in'])

    def __str__(self):
        spec, bound = CATALOGUE[self.kind]
        args = ','.join('%s=%s' % (p.name, p.format(self.params[p.name]))
                        for p in spec if p.name in self.params)
        text = '%s(%s)' % (self.kind, args)
        if self.path:
            text += '@%s' % self.path
        return text

    def __repr__(self):
        return '<Element: %s>' % self

    def __eq__(self, other):
        return isinstance(other, Element) and str(self) == str(other)

    def __hash__(self):
        return hash(str(self))

    def at(self, path):
        """
        Same element bound to another path
        """
        return Element(self.kind, self.params, path)


def parse_element(text):
    """
    Parses ``KIND(key=value,...)@PATH``. Raises DescriptorError with the
    column of the offending token, UnknownElement for unknown kinds.
    """
    match = _DESCRIPTOR_RE.match(text)
    if not match:
        raise DescriptorError('malformed element descriptor', 0)
    kind, body, path = match.groups()
    if kind.upper() not in CATALOGUE:
        raise UnknownElement('Unknown element kind %s' % kind)
    spec = dict((p.name, p) for p in CATALOGUE[kind.upper()][0])

    params = {}
    body_start = text.find('(') + 1
    for token, column in _split_args(body or '', body_start):
        if '=' not in token:
            raise DescriptorError('expected key=value, got %r' % token,
                                  column)
        key, value = token.split('=', 1)
        key = key.strip()
        if key not in spec:
            raise DescriptorError('%s does not take parameter %s'
                                  % (kind.upper(), key), column)
        if not value.strip():
            raise DescriptorError('missing parameter value',
                                  column + len(key) + 1)
        try:
            params[key] = spec[key].parse(value)
        except (ValueError, ArithmeticError) as e:
            raise DescriptorError('%s: %s' % (key, e), column + len(key) + 1)
    return Element(kind, params, path)


def format_element(element):
    """
    Canonical descriptor text, the inverse of parse_element
    """
    return str(element)


def _split_args(body, offset):
    """
    Splits on commas outside brackets, yields (token, column)
    """
    depth, start = 0, 0
    for i, ch in enumerate(body + ','):
        if ch == '[':
            depth += 1
        elif ch == ']':
            depth -= 1
        elif ch == ',' and depth == 0:
            token = body[start:i]
            if token.strip():
                yield token.strip(), offset + start + (
                    len(token) - len(token.lstrip()))
            start = i + 1


def expand_element(element, conventions=None):
    """
    Macro elements expand into primitives, primitives return themselves
    """
    if element.kind != 'OCNOT':
        return [element]
    conventions = conventions or default_conventions()
    gamma = math.pi / 4 if element.params['k'] == 1 else math.pi / 8
    path = element.path
    chain = [
        Element('HWP', {'angle': math.pi / 8}, path),
        Element('DP', {'angle': gamma, 'pol': Pol.H}, path),
        Element('DP', {'angle': -gamma, 'pol': Pol.V}, path),
        Element('PP', {'phase': conventions.interferometer_phase}, path),
        Element('HWP', {'angle': math.pi / 4}, path),
    ]
    if element.params['k'] == 1:
        chain.append(Element('HWP', {'angle': math.pi / 8}, path))
    else:
        chain.append(Element('QWP', {'angle': math.pi / 4}, path))
    return chain


def hwp_matrix(alpha):
    c, s = math.cos(2 * alpha), math.sin(2 * alpha)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp_matrix(beta):
    """
    Retarder with fast axis at beta: R(-beta) diag(i, 1) R(beta)
    """
    c, s = math.cos(beta), math.sin(beta)
    rot = np.array([[c, s], [-s, c]], dtype=complex)
    return rot.T.dot(np.diag([1j, 1])).dot(rot)


def circular_basis():
    """
    Columns |R>, |L> in the H/V basis
    """
    return np.array([[_SQ, _SQ], [1j * _SQ, -1j * _SQ]], dtype=complex)


class ModeTransform(object):
    """
    Sparse matrix on a ModeSpace. ``overflow`` holds the columns whose
    physical image leaves the truncation window; the stored matrix completes
    them cyclically so unitary elements stay unitary.
    """

    def __init__(self, space, matrix, kind=TransformKind.UNITARY,
                 provenance='', overflow=frozenset(), check=True):
        self.space = space
        self.matrix = sparse.csc_matrix(matrix, dtype=complex)
        if self.matrix.shape != (space.dim, space.dim):
            raise ConventionError('Transform shape %r does not fit %r'
                                  % (self.matrix.shape, space))
        self.kind = kind
        self.provenance = provenance
        self.overflow = frozenset(overflow)
        self._columns = {}
        if check:
            self.self_check()

    def __repr__(self):
        return '<ModeTransform: %s %s>' % (TransformKind.NAMES[self.kind],
                                           self.provenance)

    def dense(self):
        return self.matrix.toarray()

    def column(self, j):
        """
        Non-zero entries of column j as [(row, value)]
        """
        if j not in self._columns:
            start, end = self.matrix.indptr[j], self.matrix.indptr[j + 1]
            rows = self.matrix.indices[start:end]
            values = self.matrix.data[start:end]
            self._columns[j] = [(int(r), complex(v)) for r, v in
                                zip(rows, values) if abs(v) > 0]
        return self._columns[j]

    def deviation(self):
        m = self.matrix
        eye = sparse.identity(self.space.dim, dtype=complex, format='csc')
        if self.kind == TransformKind.UNITARY:
            return max(_max_abs(m.conj().T.dot(m) - eye),
                       _max_abs(m.dot(m.conj().T) - eye))
        if self.kind == TransformKind.ISOMETRY:
            return _max_abs(m.conj().T.dot(m) - eye)
        return max(_max_abs(m.dot(m) - m), _max_abs(m - m.conj().T))

    def self_check(self):
        deviation = self.deviation()
        if deviation > settings.UNITARY_TOLERANCE:
            raise ConventionError('%s is not %s (deviation %.3g)'
                                  % (self.provenance,
                                     TransformKind.NAMES[self.kind],
                                     deviation))

    def check_support(self, amps, tolerance=None):
        tolerance = settings.PRUNE_TOLERANCE if tolerance is None \
            else tolerance
        for j in self.overflow:
            if abs(amps[j]) > tolerance:
                raise TruncationOverflow(
                    '%s shifts %s outside the truncation window'
                    % (self.provenance, self.space.mode(j)))


def _max_abs(m):
    m = sparse.csc_matrix(m)
    return float(np.abs(m.data).max()) if m.nnz else 0.0


def _oam_flip(L):
    n = 2 * L + 1
    return np.fliplr(np.eye(n, dtype=complex))


def _oam_dove(L, gamma):
    n = 2 * L + 1
    m = np.zeros((n, n), dtype=complex)
    for oam in range(-L, L + 1):
        m[-oam + L, oam + L] = 1j * np.exp(2j * gamma * oam)
    return m


def _oam_shift(L, step):
    """
    Cyclic shift by ``step`` and the OAM values that wrap around
    """
    n = 2 * L + 1
    m = np.zeros((n, n), dtype=complex)
    wrapped = []
    for oam in range(-L, L + 1):
        target = oam + step
        if abs(target) > L:
            wrapped.append(oam)
        m[(target + L) % n, oam + L] = 1
    return m, wrapped


def _pol_projector(pol):
    p = np.zeros((2, 2), dtype=complex)
    p[pol, pol] = 1
    return p


def _local(element, space, conventions):
    """
    Local block on the bound path: (matrix, kind, overflowing local indices)
    """
    L, n = space.L, space.ladder
    eye = np.eye(n, dtype=complex)
    kind = TransformKind.UNITARY
    wrapped_local = []
    params = element.params

    if element.kind == 'HWP':
        local = np.kron(hwp_matrix(params['angle']), eye)
    elif element.kind == 'QWP':
        local = np.kron(qwp_matrix(params['angle']), eye)
    elif element.kind == 'POL':
        v = np.array([math.cos(params['angle']), math.sin(params['angle'])])
        local = np.kron(np.outer(v, v).astype(complex), eye)
        kind = TransformKind.PROJECTOR
    elif element.kind == 'SPP':
        shift, wrapped = _oam_shift(L, params['dl'])
        local = np.kron(np.eye(2), shift)
        wrapped_local = [pol * n + oam + L for pol in (Pol.H, Pol.V)
                         for oam in wrapped]
    elif element.kind == 'QP':
        step = int(round(2 * params['q']))
        circ = circular_basis()
        r, l = circ[:, 0], circ[:, 1]
        up, wrapped_up = _oam_shift(L, step)
        down, wrapped_down = _oam_shift(L, -step)
        local = np.kron(np.outer(l, r.conj()), up) + \
            np.kron(np.outer(r, l.conj()), down)
        wrapped_local = [pol * n + oam + L for pol in (Pol.H, Pol.V)
                         for oam in sorted(set(wrapped_up + wrapped_down))]
    elif element.kind == 'DP':
        dove = _oam_dove(L, params['angle'])
        pol = params.get('pol')
        if pol is None:
            local = np.kron(np.eye(2), dove)
        else:
            local = np.kron(_pol_projector(pol), dove) + \
                np.kron(_pol_projector(1 - pol), eye)
    elif element.kind == 'PP':
        phase = np.exp(1j * params['phase'])
        pol = params.get('pol')
        if pol is None:
            local = phase * np.eye(2 * n, dtype=complex)
        else:
            diag = np.ones(2, dtype=complex)
            diag[pol] = phase
            local = np.kron(np.diag(diag), eye)
    elif element.kind == 'MIRROR':
        oam = _oam_flip(L) if conventions.mirror_flips_oam else eye
        local = np.exp(1j * conventions.mirror_phase) * np.kron(np.eye(2), oam)
    elif element.kind == 'DL':
        local = np.eye(2 * n, dtype=complex)
    else:
        raise UnknownElement('%s has no single-path form' % element.kind)
    return local, kind, wrapped_local


def _two_path_entries(element, space, conventions):
    """
    Yields (row, col, value) for the two-path splitters including the
    completion of output-only paths back onto input-only paths
    """
    x, y = element.params['in']
    u, w = element.params['out']
    n = space.ladder
    L = space.L
    r = np.exp(1j * conventions.pbs_reflection_phase)
    flip = conventions.pbs_reflection_flips_oam

    def idx(path, pol, oam):
        return space.offset(path) + pol * n + oam + L

    for oam in range(-L, L + 1):
        reflected = -oam if flip else oam
        for pol in (Pol.H, Pol.V):
            if element.kind == 'PBS':
                if pol == Pol.H:
                    yield idx(u, pol, oam), idx(x, pol, oam), 1.0
                    yield idx(w, pol, oam), idx(y, pol, oam), 1.0
                else:
                    yield idx(w, pol, reflected), idx(x, pol, oam), r
                    yield idx(u, pol, reflected), idx(y, pol, oam), r
            else:
                yield idx(u, pol, oam), idx(x, pol, oam), _SQ
                yield idx(w, pol, oam), idx(x, pol, oam), _SQ
                yield idx(u, pol, oam), idx(y, pol, oam), _SQ
                yield idx(w, pol, oam), idx(y, pol, oam), -_SQ

    inputs, outputs = (x, y), (u, w)
    input_only = [p for p in inputs if p not in outputs]
    output_only = [p for p in outputs if p not in inputs]
    for src, dst in zip(output_only, input_only):
        for local in range(space.block):
            yield space.offset(dst) + local, space.offset(src) + local, 1.0


def _build(element, space, conventions):
    if element.kind in ('PBS', 'BS'):
        space.check_paths(*element.paths)
        touched = set(element.paths)
        rows, cols, values = [], [], []
        for row, col, value in _two_path_entries(element, space,
                                                 conventions):
            rows.append(row)
            cols.append(col)
            values.append(value)
        for path in space.paths:
            if path in touched:
                continue
            start = space.offset(path)
            for local in range(space.block):
                rows.append(start + local)
                cols.append(start + local)
                values.append(1.0)
        matrix = sparse.coo_matrix((values, (rows, cols)),
                                   shape=(space.dim, space.dim))
        return ModeTransform(space, matrix, provenance=str(element))

    space.check_paths(element.path)
    local, kind, wrapped_local = _local(element, space, conventions)
    blocks = []
    for path in space.paths:
        if path == element.path:
            blocks.append(sparse.csc_matrix(local))
        else:
            blocks.append(sparse.identity(space.block, dtype=complex,
                                          format='csc'))
    matrix = sparse.block_diag(blocks, format='csc')
    offset = space.offset(element.path)
    return ModeTransform(space, matrix, kind=kind, provenance=str(element),
                         overflow=[offset + i for i in wrapped_local])


@functools.lru_cache(maxsize=1024)
def _cached_transform(element, space, conventions):
    log.debug('[%s] Building transform for %s on %r'
              % (log.name.upper(), element, space))
    primitives = expand_element(element, conventions)
    if len(primitives) == 1:
        return _build(primitives[0], space, conventions)
    result = compose_transforms([_build(e, space, conventions)
                                 for e in primitives])
    result.provenance = str(element)
    return result


def element_transform(element, space, conventions=None):
    """
    Exact single-photon transform of one element on ``space``, identity on
    every path the element does not touch
    """
    if isinstance(element, str):
        element = parse_element(element)
    conventions = conventions or default_conventions()
    return _cached_transform(element, space, conventions)


def compose_transforms(sequence):
    """
    Matrix product in application order, ``sequence[0]`` acts first
    """
    sequence = list(sequence)
    if not sequence:
        raise ValueError('Nothing to compose')
    return _compose(*sequence)


@require_same_space
def _compose(*sequence):
    space = sequence[0].space
    matrix = sequence[0].matrix
    overflow = set(sequence[0].overflow)
    kinds = set([sequence[0].kind])
    for t in sequence[1:]:
        # A column overflows when the running product feeds an overflow
        # column of the next factor
        if t.overflow:
            outer = np.array(sorted(t.overflow))
            touched = np.asarray(abs(matrix[outer, :]).sum(axis=0)).ravel()
            overflow.update(int(j) for j in np.flatnonzero(touched > 0))
        matrix = t.matrix.dot(matrix)
        kinds.add(t.kind)

    if kinds == set([TransformKind.UNITARY]):
        kind = TransformKind.UNITARY
    elif TransformKind.PROJECTOR in kinds:
        kind = TransformKind.PROJECTOR
    else:
        kind = TransformKind.ISOMETRY
    provenance = ' ; '.join(t.provenance for t in sequence)
    matrix = sparse.csc_matrix(matrix)
    matrix.data[np.abs(matrix.data) < settings.PRUNE_TOLERANCE] = 0
    matrix.eliminate_zeros()
    return ModeTransform(space, matrix, kind=kind, provenance=provenance,
                         overflow=overflow,
                         check=kind == TransformKind.UNITARY)


@require_same_space
def apply_to_single_photon(t, s):
    t.check_support(s.amps)
    amps = t.matrix.dot(s.amps)
    amps[np.abs(amps) < settings.PRUNE_TOLERANCE] = 0
    probability = s.probability
    if t.kind != TransformKind.UNITARY:
        probability *= float(np.vdot(amps, amps).real) / \
            max(float(np.vdot(s.amps, s.amps).real), 1e-300)
    return SinglePhotonState(t.space, amps, probability)


def apply_chain(elements, state, conventions=None):
    """
    Applies descriptors one at a time, returns the final state
    """
    for e in elements:
        state = apply_to_single_photon(
            element_transform(e, state.space, conventions), state)
    return state


def chain_transform(elements, space, conventions=None):
    return compose_transforms([element_transform(e, space, conventions)
                               for e in elements])
