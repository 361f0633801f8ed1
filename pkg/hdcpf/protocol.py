# -*- coding: utf-8 -*-
"""
Abstract heralded controlled phase-flip protocol for arbitrary dimension.

Photons 1 and 4 carry the two qudits, photons 2 and 3 are the auxiliaries
(|p> + |d-1>)/sqrt2. Each pair passes an ideal HD beam splitter, one photon
per output port is kept, photon 3 gets a Hadamard on span{|p>, |d-1>} and
photons 2, 3 are projected on the Bell basis of that span.
"""
import json
import math
import logging

import numpy as np

from . import models
from . import settings
from .enums import BellOutcome
from .decorators import require_normalized
from .exceptions import InvalidDimension
from .exceptions import InvalidSubspace
from .exceptions import NotNormalized
from .exceptions import ValidationError

log = logging.getLogger('hdcpf')

_SQ = 1 / math.sqrt(2)

# Port indices of the two-port routing map
A, B = range(0, 2)
C, D = range(0, 2)
IN_PORTS = ('A', 'B')
OUT_PORTS = ('C', 'D')


def _check_dimension(d):
    if int(d) != d or d < 2:
        raise InvalidDimension('Dimension must be an integer >= 2, got %r'
                               % (d, ))
    return int(d)


class QuditState(object):
    """
    Joint pure state of systems 1 and 4, ``amps[m * d + n] = c_{m,n}``
    """

    def __init__(self, d, amps, check=True):
        self.d = _check_dimension(d)
        amps = np.array(amps, dtype=complex).ravel()
        if amps.shape != (self.d ** 2, ):
            raise ValueError('Expected %d amplitudes, got %d'
                             % (self.d ** 2, amps.size))
        self.amps = amps
        if check and abs(self.norm() - 1.0) > settings.QUDIT_NORM_TOLERANCE:
            raise NotNormalized('Qudit state norm is %.15g' % self.norm())

    def __repr__(self):
        return '<QuditState: d=%d %s>' % (self.d, self.to_json())

    def norm(self):
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def matrix(self):
        return self.amps.reshape(self.d, self.d)

    @classmethod
    def basis(cls, d, m, n):
        amps = np.zeros(d * d, dtype=complex)
        amps[m * d + n] = 1
        return cls(d, amps)

    @classmethod
    def product(cls, first, second):
        first = np.asarray(first, dtype=complex)
        second = np.asarray(second, dtype=complex)
        return cls(len(first), np.kron(first, second))

    @classmethod
    def random(cls, d, rng):
        amps = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
        return cls(d, amps / np.linalg.norm(amps))

    def apply(self, operator):
        return QuditState(self.d, np.asarray(operator).dot(self.amps))

    def to_json(self):
        entries = []
        for index in np.flatnonzero(np.abs(self.amps) >
                                    settings.PRUNE_TOLERANCE):
            m, n = divmod(int(index), self.d)
            value = self.amps[index]
            entries.append([m, n, float(value.real), float(value.imag)])
        return json.dumps(entries)

    @classmethod
    def from_json(cls, d, text):
        amps = np.zeros(d * d, dtype=complex)
        for m, n, re_part, im_part in json.loads(text):
            if not (0 <= m < d and 0 <= n < d):
                raise ValueError('Entry (%d, %d) outside d=%d' % (m, n, d))
            amps[m * d + n] += complex(re_part, im_part)
        return cls(d, amps)


class AuxiliaryConfig(models.Model):
    """
    Auxiliary photons are prepared in (|p> + |d-1>)/sqrt2
    """
    p = models.Field(default=1, cast=int)
    d = models.Field(default=4, cast=int)

    def invariants(self):
        if self.d < 2:
            return [('d', 'dimension must be at least 2')]
        if not 0 <= self.p < self.d - 1:
            return [('p', 'p must lie in [0, %d)' % (self.d - 1))]
        return []

    def vector(self):
        v = np.zeros(self.d, dtype=complex)
        v[self.p] += _SQ
        v[self.d - 1] += _SQ
        return v


def auxiliary(p, d):
    """
    Validated AuxiliaryConfig, range errors surface as InvalidSubspace
    """
    try:
        return AuxiliaryConfig(p=p, d=d).clean()
    except ValidationError as e:
        raise InvalidSubspace('Invalid auxiliary (p=%r, d=%r): %s'
                              % (p, d, e))


def cpf_oracle(d):
    d = _check_dimension(d)
    diag = np.ones(d * d, dtype=complex)
    diag[-1] = -1
    return np.diag(diag)


class HdRouting(object):
    """
    Ideal two-port HD beam splitter: |d-1> entering A leaves at D, every
    other level at C; from B the roles swap. Indices are port * d + level.
    """

    def __init__(self, d):
        self.d = _check_dimension(d)
        self.matrix = np.zeros((2 * d, 2 * d), dtype=complex)
        for port in (A, B):
            for level in range(d):
                out = self.route(port, level)
                self.matrix[out * d + level, port * d + level] = 1

    def route(self, port, level):
        if isinstance(port, str):
            port = IN_PORTS.index(port)
        top = level == self.d - 1
        if port == A:
            return D if top else C
        return C if top else D

    def routing_map(self):
        return dict(((IN_PORTS[port], level),
                     (OUT_PORTS[self.route(port, level)], level))
                    for port in (A, B) for level in range(self.d))


def ideal_hd_bs(d):
    return HdRouting(d)


def subspace_hadamard(p, d):
    d = _check_dimension(d)
    if int(p) != p or not 0 <= p < d - 1:
        raise InvalidSubspace('Subspace index %r outside [0, %d)'
                              % (p, d - 1))
    h = np.eye(d, dtype=complex)
    h[p, p] = h[d - 1, p] = h[p, d - 1] = _SQ
    h[d - 1, d - 1] = -_SQ
    return h


def _flip_top(d):
    u = np.eye(d, dtype=complex)
    u[d - 1, d - 1] = -1
    return u


def correction_unitary(outcome, d):
    """
    Local correction on systems 1 and 4 for each Bell outcome
    """
    d = _check_dimension(d)
    if isinstance(outcome, str):
        outcome = BellOutcome.from_name(outcome)
    eye, flip = np.eye(d, dtype=complex), _flip_top(d)
    return {
        BellOutcome.PHI_PLUS: np.kron(eye, eye),
        BellOutcome.PHI_MINUS: np.kron(flip, eye),
        BellOutcome.PSI_PLUS: np.kron(eye, flip),
        BellOutcome.PSI_MINUS: np.kron(flip, flip),
    }[outcome]


def bell_vectors(p, d):
    """
    Bell basis of span{|p>, |d-1>} for photons 2 and 3 as d x d arrays
    """
    top = d - 1

    def ket(a, b):
        v = np.zeros((d, d), dtype=complex)
        v[a, b] = 1
        return v

    return {
        BellOutcome.PHI_PLUS: _SQ * (ket(p, p) + ket(top, top)),
        BellOutcome.PHI_MINUS: _SQ * (ket(p, p) - ket(top, top)),
        BellOutcome.PSI_PLUS: _SQ * (ket(p, top) + ket(top, p)),
        BellOutcome.PSI_MINUS: _SQ * (ket(p, top) - ket(top, p)),
    }


def _herald(c, aux):
    """
    Unnormalized, corrected heralded outputs of the linear protocol map.
    ``c`` is the d x d coefficient array of systems 1 and 4; the squared
    norm of each returned branch is its joint probability.
    """
    d, p = aux.d, aux.p
    routing = HdRouting(d)
    a = aux.vector()
    m = routing.matrix

    # Photons 1, 2 enter BS1 at A, B; photons 3, 4 enter BS2 at B, A.
    # Labelled tensor indices run over port * d + level.
    src1 = np.zeros((2 * d, d), dtype=complex)
    src1[A * d:(A + 1) * d, :] = np.eye(d)
    aux_in = np.zeros(2 * d, dtype=complex)
    aux_in[B * d:(B + 1) * d] = a
    photon1 = m.dot(src1)
    photon4 = m.dot(src1)
    aux_out = m.dot(aux_in)

    # X[i1, i2, i3, i4] summed over the data coefficients
    x = np.einsum('mn,im,j,k,ln->ijkl', c, photon1, aux_out, aux_out,
                  photon4)
    x = x.reshape(2, d, 2, d, 2, d, 2, d)

    # Keep one photon per port at each splitter and relabel by port: the
    # photon at C becomes system 1 (4), the photon at D becomes 2 (3).
    # Amplitudes of the two label orderings add.
    y = x[C, :, D, :, D, :, C, :] + \
        np.transpose(x[D, :, C, :, D, :, C, :], (1, 0, 2, 3)) + \
        np.transpose(x[C, :, D, :, C, :, D, :], (0, 1, 3, 2)) + \
        np.transpose(x[D, :, C, :, C, :, D, :], (1, 0, 3, 2))

    y = np.einsum('abcd,ec->abed', y, subspace_hadamard(p, d))
    branches = {}
    for outcome, bell in bell_vectors(p, d).items():
        heralded = np.einsum('abcd,bc->ad', y, bell.conj()).ravel()
        branches[outcome] = correction_unitary(outcome, d).dot(heralded)
    return branches


@require_normalized(settings.QUDIT_NORM_TOLERANCE)
def run_protocol(psi, aux):
    """
    Returns {BellOutcome: (heralded QuditState, joint probability)}
    """
    if psi.d != aux.d:
        raise InvalidDimension('State has d=%d, auxiliary d=%d'
                               % (psi.d, aux.d))
    result = {}
    for outcome, vector in _herald(psi.matrix(), aux).items():
        probability = float(np.vdot(vector, vector).real)
        state = QuditState(psi.d, vector / math.sqrt(probability))
        result[outcome] = (state, probability)
        log.debug('[%s] d=%d %s probability %.12g'
                  % (log.name.upper(), psi.d, BellOutcome.NAMES[outcome],
                     probability))
    return result


def transfer_operators(aux):
    """
    d^2 x d^2 maps psi -> corrected, unnormalized branch, per outcome
    """
    d = aux.d
    ops = dict((o, np.zeros((d * d, d * d), dtype=complex))
               for o in BellOutcome.ALL)
    for j in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[j] = 1
        for outcome, vector in _herald(e.reshape(d, d), aux).items():
            ops[outcome][:, j] = vector
    return ops


def heralding_probability(results, accepted):
    accepted = [BellOutcome.from_name(a) if isinstance(a, str) else a
                for a in accepted]
    return sum(results[o][1] for o in accepted)


def align_phase(reference, candidate):
    """
    ``candidate`` times the conjugate phase of its overlap with
    ``reference``; falls back to the largest reference component when the
    overlap vanishes
    """
    reference = np.asarray(reference, dtype=complex)
    candidate = np.asarray(candidate, dtype=complex)
    overlap = np.vdot(reference, candidate)
    if abs(overlap) < settings.PRUNE_TOLERANCE:
        k = int(np.argmax(np.abs(reference)))
        if abs(candidate[k]) < settings.PRUNE_TOLERANCE:
            return candidate
        overlap = candidate[k] / reference[k]
    return candidate * np.conj(overlap) / abs(overlap)


def aligned_overlap(reference, candidate):
    """
    Re<reference|candidate> after phase alignment, 1 for equal rays
    """
    reference = np.asarray(reference, dtype=complex)
    return float(np.vdot(reference, align_phase(reference, candidate)).real)
