# -*- coding: utf-8 -*-
"""
Fidelity estimation for the d = 4 gate.

Classical fidelities are measured on the ZX and XZ product bases and
turned into process fidelity bounds; the seven superposition inputs are
scored directly, the entangled one through its stabilizers.
"""
import math
import logging
from dataclasses import dataclass, field

import numpy as np

from . import settings
from .enums import BellOutcome, Readout
from .oam import D, heralded_kraus
from .fock import keyed_generator, sample_counts
from .protocol import cpf_oracle
from .noise import NoiseSpec

log = logging.getLogger('hdcpf')

_SQ = 1 / math.sqrt(2)

LEVEL_LABELS = ('|-2>', '|-1>', '|0>', '|+1>')


def _ket(*levels, signs=None):
    v = np.zeros(D, dtype=complex)
    signs = signs or (1, ) * len(levels)
    for level, sign in zip(levels, signs):
        v[level] = sign
    return v / np.linalg.norm(v)


def _sum_label(a, b, sign='+'):
    return '(%s%s%s)/sqrt2' % (LEVEL_LABELS[a], sign, LEVEL_LABELS[b])


Z_STATES = [(LEVEL_LABELS[k], _ket(k)) for k in range(D)]
X_STATES = [(_sum_label(0, 2), _ket(0, 2)),
            (_sum_label(0, 2, '-'), _ket(0, 2, signs=(1, -1))),
            (_sum_label(1, 3), _ket(1, 3)),
            (_sum_label(1, 3, '-'), _ket(1, 3, signs=(1, -1)))]


class BasisTable(object):
    """
    Ordered list of (photon-1 state, photon-4 state) inputs. Entry i is
    also outcome i when the table is used as a measurement basis.
    """

    def __init__(self, name, entries):
        self.name = name
        self.entries = list(entries)

    def __repr__(self):
        return '<BasisTable: %s (%d entries)>' % (self.name, len(self))

    def __len__(self):
        return len(self.entries)

    def labels(self):
        return ['%s x %s' % (first[0], second[0])
                for first, second in self.entries]

    def vectors(self):
        return [np.kron(first[1], second[1])
                for first, second in self.entries]

    def is_basis(self):
        v = np.array(self.vectors())
        return len(self) == D * D and \
            np.abs(v.conj().dot(v.T) - np.eye(D * D)).max() < \
            settings.NORM_TOLERANCE

    def targets(self):
        oracle = cpf_oracle(D)
        return [oracle.dot(v) for v in self.vectors()]

    def expected_outputs(self):
        """
        Index of the basis entry each input is mapped to by the ideal gate
        """
        vectors = np.array(self.vectors())
        expected = []
        for target in self.targets():
            overlaps = np.abs(vectors.conj().dot(target))
            expected.append(int(np.argmax(overlaps)))
        return expected

    def flipped_rows(self):
        return [(i, j) for i, j in enumerate(self.expected_outputs())
                if i != j]


def _product_table(name, first, second):
    return BasisTable(name, [(a, b) for a in first for b in second])


ZX = _product_table('ZX', Z_STATES, X_STATES)
XZ = _product_table('XZ', X_STATES, Z_STATES)
SUPERPOSITIONS = BasisTable('superpositions', [
    ((_sum_label(0, 2), _ket(0, 2)), (_sum_label(2, 3), _ket(2, 3))),
    ((_sum_label(0, 2), _ket(0, 2)), (_sum_label(1, 2), _ket(1, 2))),
    ((_sum_label(0, 2), _ket(0, 2)), (_sum_label(0, 2), _ket(0, 2))),
    ((_sum_label(0, 2), _ket(0, 2)), (_sum_label(1, 3), _ket(1, 3))),
    ((_sum_label(1, 3), _ket(1, 3)), (_sum_label(1, 2), _ket(1, 2))),
    ((_sum_label(1, 3), _ket(1, 3)), (_sum_label(0, 2), _ket(0, 2))),
    ((_sum_label(1, 3), _ket(1, 3)), (_sum_label(1, 3), _ket(1, 3))),
])
TABLES = dict((t.name, t) for t in (ZX, XZ, SUPERPOSITIONS))


def basis_table(name):
    if isinstance(name, BasisTable):
        return name
    try:
        return TABLES[name]
    except KeyError:
        raise ValueError('Unknown basis table %r, expected one of %s'
                         % (name, ', '.join(sorted(TABLES))))


def _check_unit(name, value, low=0.0):
    if value is None or not math.isfinite(value) or not \
            low - 1e-12 <= value <= 1 + 1e-12:
        raise ValueError('%s must lie in [%g, 1], got %r'
                         % (name, low, value))


def hofmann_bounds(f_zx, f_xz):
    _check_unit('f_zx', f_zx)
    _check_unit('f_xz', f_xz)
    lower = max(0.0, round(f_zx + f_xz - 1.0, 12))
    upper = min(f_zx, f_xz)
    return [lower, upper]


def conditional_bounds(f_zx, f_xz, undetected=0.0):
    """
    Process fidelity bounds once ``undetected``, the channel weight on
    pair-label phase flips, is taken off the Hofmann lower bound
    """
    lower, upper = hofmann_bounds(f_zx, f_xz)
    return [max(0.0, round(lower - undetected, 12)), upper]


def output_density(kraus, vector):
    """
    Unnormalized heralded output of ``vector``; its trace is the herald
    probability
    """
    rho = np.zeros((D * D, D * D), dtype=complex)
    for k in kraus:
        out = k.dot(vector)
        rho += np.outer(out, out.conj())
    return rho


def outcome_matrix(kraus, basis):
    """
    (heralded outcome probabilities, herald probability per input); row i
    holds P(outcome j | input i, herald)
    """
    basis = basis_table(basis)
    vectors = basis.vectors()
    matrix = np.zeros((len(basis), len(vectors)))
    heralds = np.zeros(len(basis))
    for i, v in enumerate(vectors):
        rho = output_density(kraus, v)
        heralds[i] = float(np.trace(rho).real)
        if heralds[i] <= settings.PRUNE_TOLERANCE:
            continue
        for j, w in enumerate(vectors):
            matrix[i, j] = float(np.vdot(w, rho.dot(w)).real) / heralds[i]
    return matrix, heralds


def classical_fidelity(kraus, basis):
    """
    Heralded events with the expected output over all heralded events, the
    inputs drawn uniformly from ``basis``
    """
    basis = basis_table(basis)
    matrix, heralds = outcome_matrix(kraus, basis)
    expected = basis.expected_outputs()
    hits = sum(heralds[i] * matrix[i, expected[i]] for i in range(len(basis)))
    return float(hits / heralds.sum())


def process_fidelity(kraus, unitary=None):
    """
    Overlap of the normalized Choi state of the heralded channel with the
    one of ``unitary`` (the CPF gate by default)
    """
    unitary = cpf_oracle(D) if unitary is None else np.asarray(unitary)
    dim = unitary.shape[0]
    overlap = sum(abs(np.trace(unitary.conj().T.dot(k))) ** 2
                  for k in kraus)
    total = sum(float(np.trace(k.conj().T.dot(k)).real) for k in kraus)
    if total <= settings.PRUNE_TOLERANCE:
        return 0.0
    return float(overlap / (dim * total))


# Phase flip of the pair label, levels {0, 2} against {1, 3}. ZX and XZ
# read the pair label of both photons in Z.
_PAIR_FLIP = np.diag([1, -1, 1, -1]).astype(complex)
PAIR_FLIPS = (np.eye(D * D, dtype=complex),
              np.kron(_PAIR_FLIP, np.eye(D)),
              np.kron(np.eye(D), _PAIR_FLIP),
              np.kron(_PAIR_FLIP, _PAIR_FLIP))


def pair_phase_fidelity(kraus, unitary=None):
    """
    Process fidelity with ``unitary`` up to pair-label phase flips on
    either photon; F_ZX + F_XZ - 1 never exceeds it
    """
    unitary = cpf_oracle(D) if unitary is None else np.asarray(unitary)
    return float(sum(process_fidelity(kraus, unitary.dot(flip))
                     for flip in PAIR_FLIPS))


def undetected_error(kraus):
    """
    Weight of the heralded channel on pair-label phase flips of the gate,
    the errors neither ZX nor XZ can see
    """
    return max(0.0, pair_phase_fidelity(kraus) - process_fidelity(kraus))


@dataclass
class FidelityReport:
    fidelities: dict = field(default_factory=dict)
    matrices: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    heralding: float = None
    shots: int = 0
    undetected: float = None

    @property
    def f_zx(self):
        return self.fidelities.get('ZX')

    @property
    def f_xz(self):
        return self.fidelities.get('XZ')

    @property
    def bounds(self):
        if self.f_zx is None or self.f_xz is None:
            return None
        return hofmann_bounds(self.f_zx, self.f_xz)

    @property
    def process_bounds(self):
        if self.bounds is None:
            return None
        return conditional_bounds(self.f_zx, self.f_xz,
                                  self.undetected or 0.0)

    def to_dict(self):
        data = {'fidelities': dict(self.fidelities), 'shots': self.shots,
                'heralding': self.heralding}
        if self.bounds is not None:
            data['lower'], data['upper'] = self.bounds
            data['undetected'] = self.undetected
        data['matrices'] = dict((name, m.tolist())
                                for name, m in self.matrices.items())
        if self.counts:
            data['counts'] = dict((name, c.tolist())
                                  for name, c in self.counts.items())
        return data

    def matrix_rows(self, name):
        """
        (input label, outcome label, probability, count) rows in table
        order
        """
        basis = basis_table(name)
        labels = basis.labels()
        matrix = self.matrices[name]
        counts = self.counts.get(name)
        for i, row in enumerate(labels):
            for j, column in enumerate(labels):
                count = int(counts[i, j]) if counts is not None else ''
                yield row, column, float(matrix[i, j]), count


def run_fidelity_experiment(basis=('ZX', 'XZ'), shots=0, noise=None, seed=0,
                            accepted=(BellOutcome.PHI_PLUS, ),
                            readout=Readout.PROJECTIVE,
                            L=settings.DEFAULT_TRUNCATION, samples=None):
    """
    Outcome matrices and classical fidelities per basis. ``shots`` = 0 is
    the analytic mode; otherwise every input gets ``shots`` heralded events
    sampled from its outcome distribution.
    """
    names = [basis] if isinstance(basis, (str, BasisTable)) else list(basis)
    kraus, survival = heralded_kraus(noise, accepted, readout, L,
                                     samples=samples)
    report = FidelityReport(shots=shots,
                            undetected=undetected_error(kraus))
    heralded = []
    for name in names:
        table = basis_table(name)
        if table.name not in ('ZX', 'XZ'):
            raise ValueError('Fidelity experiments run on ZX or XZ, got %s'
                             % table.name)
        matrix, heralds = outcome_matrix(kraus, table)
        heralded.append(heralds.mean() * survival)
        report.matrices[table.name] = matrix
        expected = table.expected_outputs()
        if not shots:
            hits = sum(heralds[i] * matrix[i, expected[i]]
                       for i in range(len(table)))
            report.fidelities[table.name] = float(hits / heralds.sum())
            continue

        counts = np.zeros(matrix.shape, dtype=int)
        for i in range(len(table)):
            dist = dict((j, matrix[i, j]) for j in range(len(table)))
            drawn = sample_counts(dist, shots, seed,
                                  'fidelity/%s/%d' % (table.name, i))
            for j, c in drawn.items():
                counts[i, j] = c
        report.counts[table.name] = counts
        report.fidelities[table.name] = float(
            sum(counts[i, expected[i]] for i in range(len(table))) /
            counts.sum())
    report.heralding = float(np.mean(heralded))
    log.info('[%s] Fidelities %s'
             % (log.name.upper(), ', '.join(
                 '%s=%.6g' % kv for kv in sorted(report.fidelities.items()))))
    return report


def channel_process_fidelity(noise=None, accepted=(BellOutcome.PHI_PLUS, ),
                             readout=Readout.PROJECTIVE,
                             L=settings.DEFAULT_TRUNCATION, samples=None):
    kraus, _ = heralded_kraus(noise, accepted, readout, L, samples=samples)
    return process_fidelity(kraus)


# Qubit embedding on span{|-1>, |+1>} = levels 1 and 3
_LOW, _HIGH = 1, 3


def _embed(qubit_op):
    op = np.zeros((D, D), dtype=complex)
    for a, i in enumerate((_LOW, _HIGH)):
        for b, j in enumerate((_LOW, _HIGH)):
            op[i, j] = qubit_op[a, b]
    return op


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

STABILIZERS = (np.kron(_embed(PAULI_Z), _embed(PAULI_X)),
               np.kron(_embed(PAULI_X), _embed(PAULI_Z)),
               np.kron(_embed(PAULI_Y), _embed(PAULI_Y)))

ENTANGLED_TARGET = 0.5 * (np.kron(_ket(1), _ket(1)) +
                          np.kron(_ket(1), _ket(3)) +
                          np.kron(_ket(3), _ket(1)) -
                          np.kron(_ket(3), _ket(3)))


def stabilizer_expectations(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (4, 4):
        ops = (np.kron(PAULI_Z, PAULI_X), np.kron(PAULI_X, PAULI_Z),
               np.kron(PAULI_Y, PAULI_Y))
    else:
        ops = STABILIZERS
    return tuple(float(np.trace(rho.dot(op)).real) for op in ops)


def stabilizer_fidelity(e1, e2, e3):
    for name, value in (('e1', e1), ('e2', e2), ('e3', e3)):
        _check_unit(name, value, low=-1.0)
    return (1.0 + e1 + e2 + e3) / 4.0


def superposition_suite(shots=0, noise=None, seed=0,
                        accepted=(BellOutcome.PHI_PLUS, ),
                        readout=Readout.PROJECTIVE,
                        L=settings.DEFAULT_TRUNCATION, samples=None):
    """
    One row per superposition input: rows 1-6 are scored against their
    unchanged product outputs, row 7 through the stabilizers of the
    entangled output
    """
    kraus, _ = heralded_kraus(noise, accepted, readout, L, samples=samples)
    rows = []
    entangled = len(SUPERPOSITIONS)
    table = SUPERPOSITIONS
    for index, (label, vector, target) in enumerate(zip(
            table.labels(), table.vectors(), table.targets()), 1):
        rho = output_density(kraus, vector)
        rho /= np.trace(rho).real
        row = {'row': index, 'input': label}
        if index != entangled:
            fidelity = float(np.vdot(target, rho.dot(target)).real)
            if shots:
                drawn = sample_counts({'match': fidelity,
                                       'miss': 1 - fidelity}, shots, seed,
                                      'superposition/%d' % index)
                fidelity = drawn['match'] / float(shots)
        else:
            expectations = stabilizer_expectations(rho)
            if shots:
                estimated = []
                for k, e in enumerate(expectations):
                    drawn = sample_counts({'+': (1 + e) / 2,
                                           '-': (1 - e) / 2}, shots, seed,
                                          'superposition/7/%d' % k)
                    estimated.append((drawn['+'] - drawn['-']) /
                                     float(shots))
                expectations = tuple(estimated)
            row['e1'], row['e2'], row['e3'] = expectations
            fidelity = stabilizer_fidelity(*[max(-1.0, min(1.0, e))
                                             for e in expectations])
        row['fidelity'] = fidelity
        rows.append(row)
    return rows


def locking_average(noise, samples=1000, seed=0):
    """
    Mean of the phase-sensitive coincidence (1 + cos zeta) / 2 over jitter
    draws of ``noise``
    """
    noise = noise or NoiseSpec().clean()
    rng = keyed_generator(seed, 'locking')
    zeta = rng.normal(0.0, noise.jitter, samples) if noise.jitter \
        else np.zeros(samples)
    return float(np.mean((1 + np.cos(zeta)) / 2))


def heralding_rate(noise, shots, seed=0,
                   accepted=(BellOutcome.PHI_PLUS, BellOutcome.PSI_PLUS),
                   readout=Readout.PROJECTIVE, L=settings.DEFAULT_TRUNCATION):
    """
    Monte Carlo heralding rate: every shot keeps each of the four photons
    with probability 1 - loss and then heralds with the lossless
    probability
    """
    noise = noise or NoiseSpec().clean()
    kraus, _ = heralded_kraus(noise.replace(loss=0.0), accepted, readout, L)
    total = sum(k.conj().T.dot(k) for k in kraus)
    lossless = float(np.trace(total).real) / (D * D)
    rng = keyed_generator(noise.seed if seed is None else seed, 'heralding')
    survived = np.all(rng.uniform(size=(shots, 4)) >= noise.loss, axis=1)
    heralded = rng.uniform(size=shots) < lossless
    return float(np.count_nonzero(survived & heralded)) / shots
