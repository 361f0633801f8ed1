# -*- coding: utf-8 -*-
"""
Experiment dispatch and result emission.
"""
import os
import csv
import json
import math
import copy
import logging
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import settings
from .enums import BellOutcome
from .modes import SinglePhotonState
from .elements import element_transform
from .fock import inject_product
from .fock import apply_sequence
from .fock import post_select
from .fock import outcome_distribution
from .fock import keyed_generator
from .fock import sample_counts
from .fock import DetectionPattern
from .protocol import QuditState, auxiliary, run_protocol, cpf_oracle
from .protocol import aligned_overlap
from .noise import draw_ensemble
from .oam import PREPARATION_RECIPES
from .oam import D
from .oam import qudit_to_photon
from .oam import prepare_input
from .oam import prepare_auxiliary
from .oam import pipeline_elements
from .oam import run_cpf_d4
from .oam import build_hd_beamsplitter
from .oam import build_bsm_stage
from .oam import check_stages
from .oam import transcript_check
from .analysis import run_fidelity_experiment
from .analysis import superposition_suite
from .lock import simulate_lock
from .exceptions import NetlistError
from .exceptions import ExecutionError
from .exceptions import EmitError

log = logging.getLogger('hdcpf')


@dataclass
class RunResult:
    experiment: str
    probability: float = None
    tallies: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    shots: int = 0

    def to_dict(self):
        return {
            'experiment': self.experiment,
            'probability': self.probability,
            'shots': self.shots,
            'tallies': dict((str(k), v) for k, v in self.tallies.items()),
            'reports': self.reports,
            'tables': dict((name, {'header': list(header),
                                   'rows': [list(r) for r in rows]})
                           for name, (header, rows) in self.tables.items()),
            'provenance': self.provenance,
        }


def _clean(value):
    """
    JSON-ready copy with floats rounded to 12 significant digits
    """
    if isinstance(value, dict):
        return dict((str(k), _clean(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [_clean(value.real), _clean(value.imag)]
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            return str(value)
        return float('%.12g' % value) + 0.0
    return value


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return '%.12g' % value
    return str(value)


class Experiment(object):
    """
    Base handler. Subclasses set ``name`` and implement ``run``.
    """
    name = None
    runner = None

    def run(self, netlist, options):
        raise NotImplementedError


def _source_photon(source, space):
    """
    (SinglePhotonState, preparation probability)
    """
    if source.kind == 'mode':
        return SinglePhotonState.basis(space, source.value), 1.0
    if source.kind == 'row':
        return prepare_input(source.value, space, source.path)
    if source.kind == 'auxiliary':
        return prepare_auxiliary(space, source.path), 1.0
    if source.kind == 'qudit':
        vector = np.asarray(source.value, dtype=complex)
        return qudit_to_photon(vector / np.linalg.norm(vector), space,
                               source.path), 1.0
    state = SinglePhotonState.from_terms(space, source.value)
    return state.normalized(), 1.0


def _tallies(dist, shots, seed, experiment):
    if not shots:
        return {}
    return sample_counts(dist, shots, seed, experiment)


class CircuitExperiment(Experiment):
    """
    Generic Fock simulation: sources, elements in order, detection pattern
    and local measurement bases
    """
    name = 'circuit'

    def run(self, netlist, options):
        space = netlist.mode_space()
        if not netlist.sources:
            raise ExecutionError('A circuit needs at least one source')
        photons, probability = [], 1.0
        for source in netlist.sources.values():
            photon, p = _source_photon(source, space)
            photons.append(photon)
            probability *= p
        state = inject_product(photons)
        state = apply_sequence([element_transform(e, space)
                                for e, _ in netlist.elements], state)

        pattern = netlist.detection['pattern']
        if pattern:
            state, kept = post_select(state, DetectionPattern(pattern))
            probability *= kept
        resolution = dict(netlist.detection['basis'])
        if not resolution:
            raise ExecutionError('[detection] basis is required for a '
                                 'circuit run')
        dist = dict(('|'.join(k), p) for k, p in
                    outcome_distribution(state, resolution).items())
        tallies = _tallies(dist, options['shots'], options['seed'],
                           'circuit')
        rows = [(outcome, dist[outcome], tallies.get(outcome, ''))
                for outcome in sorted(dist)]
        return RunResult(self.name, probability, tallies,
                         tables={'distribution': (('outcome', 'probability',
                                                   'count'), rows)})


class ProtocolExperiment(Experiment):
    """
    Abstract protocol on random inputs, checked against the oracle
    """
    name = 'protocol'

    def run(self, netlist, options):
        d, p = options['d'], options['p']
        aux = auxiliary(p, d)
        rng = keyed_generator(options['seed'], 'protocol')
        oracle = cpf_oracle(d)
        worst, branches = 1.0, dict((o, 0.0) for o in BellOutcome.ALL)
        for _ in range(options['states']):
            psi = QuditState.random(d, rng)
            target = oracle.dot(psi.amps)
            for outcome, (state, prob) in run_protocol(psi, aux).items():
                worst = min(worst, aligned_overlap(target, state.amps))
                branches[outcome] += prob / options['states']
        accepted = [BellOutcome.from_name(a)
                    for a in netlist.detection['accepted']]
        dist = dict((BellOutcome.NAMES[o], q) for o, q in branches.items())
        tallies = _tallies(dist, options['shots'], options['seed'],
                           'protocol')
        rows = [(name, dist[name], tallies.get(name, ''))
                for name in BellOutcome.NAMES]
        return RunResult(
            self.name, sum(branches[o] for o in accepted), tallies,
            reports={'protocol': {'d': d, 'p': p,
                                  'states': options['states'],
                                  'min_overlap': worst}},
            tables={'branches': (('outcome', 'probability', 'count'),
                                 rows)})


def _qudit_input(source):
    if source.kind == 'qudit':
        vector = np.asarray(source.value, dtype=complex)
        return vector / np.linalg.norm(vector)
    if source.kind == 'row':
        target = PREPARATION_RECIPES[source.value].target
        return np.asarray(target, dtype=complex)
    raise ExecutionError('Source %s: the d=4 gate takes qudit or row '
                         'sources' % source.id)


class CpfExperiment(Experiment):
    """
    Four-photon d=4 pipeline; photons placed on A1 and A2 are the qudits
    """
    name = 'cpf_d4'

    def run(self, netlist, options):
        readout = netlist.detection['readout']
        inputs = dict((s.path, s) for s in netlist.sources.values()
                      if s.kind in ('qudit', 'row'))
        if 'A1' not in inputs or 'A2' not in inputs:
            raise ExecutionError('cpf_d4 needs qudit sources at A1 and A2')
        if netlist.elements:
            expected = [str(e) for e in pipeline_elements(readout)]
            listed = [str(e) for e, _ in netlist.elements]
            if listed != expected:
                first = next((i for i, (a, b) in enumerate(
                    zip(listed, expected)) if a != b),
                    min(len(listed), len(expected)))
                raise ExecutionError('Element %d does not match the d=4 '
                                     'pipeline' % (first + 1))

        in1 = _qudit_input(inputs['A1'])
        in4 = _qudit_input(inputs['A2'])
        noise = netlist.noise_spec()
        result = run_cpf_d4(
            in1, in4, netlist.detection['accepted'], noise, readout,
            options['shots'], options['seed'],
            ensemble=draw_ensemble(noise, netlist.run['samples']))
        target = cpf_oracle(D).dot(np.kron(in1, in4))
        report = {'fidelity': result.fidelity(target),
                  'probability': result.probability,
                  'postselection': result.postselection,
                  'branches': result.branches}
        if result.state is not None:
            report['output'] = json.loads(result.state.to_json())
        rows = [(name, p, (result.tallies or {}).get(name, ''))
                for name, p in sorted(result.branches.items())]
        return RunResult(self.name, result.probability, result.tallies or {},
                         reports={'gate': report},
                         tables={'branches': (('outcome', 'probability',
                                               'count'), rows)})


class FidelityExperiment(Experiment):
    name = 'fidelity'

    def run(self, netlist, options):
        shots = 0 if options['analytic'] else options['shots']
        report = run_fidelity_experiment(
            netlist.run['basis'], shots, netlist.noise_spec(),
            options['seed'], netlist.detection['accepted'],
            netlist.detection['readout'], samples=netlist.run['samples'])
        tables = {}
        for name in report.matrices:
            tables['%s_matrix' % name] = (
                ('input', 'outcome', 'probability', 'count'),
                list(report.matrix_rows(name)))
        return RunResult(self.name, report.heralding,
                         reports={'fidelity': report.to_dict()},
                         tables=tables)


class SuperpositionExperiment(Experiment):
    name = 'superposition'

    def run(self, netlist, options):
        shots = 0 if options['analytic'] else options['shots']
        rows = superposition_suite(shots, netlist.noise_spec(),
                                   options['seed'],
                                   netlist.detection['accepted'],
                                   netlist.detection['readout'],
                                   samples=netlist.run['samples'])
        table = [(r['row'], r['input'], r['fidelity']) for r in rows]
        return RunResult(self.name, reports={'superposition': rows},
                         tables={'superposition': (('row', 'input',
                                                    'fidelity'), table)})


class LockExperiment(Experiment):
    name = 'lock'

    def run(self, netlist, options):
        params, drift, gains, loop = netlist.lock_models()
        trace = simulate_lock(params, drift, gains, loop['duration'],
                              loop['setpoint'], options['seed'],
                              loop['loop_dt'], loop['initial'])
        report = {'rms_open': trace.rms_open(),
                  'rms_closed': trace.rms_closed(),
                  'diverged': trace.diverged, 'gain': trace.gain,
                  'steps': len(trace.t)}
        return RunResult(self.name, reports={'lock': report},
                         tables={'trace': (trace.columns,
                                           list(trace.rows()))})


class TranscriptExperiment(Experiment):
    name = 'transcript'

    def run(self, netlist, options):
        report = transcript_check(build_hd_beamsplitter(),
                                  netlist.run['fixture'])
        bsm = build_bsm_stage()
        arms = check_stages(bsm.stages, bsm.space, 'bsm')
        report.checked += arms.checked
        report.failures.extend(arms.failures)
        rows = [(f.fixture, f.input, f.stage, f.deviation, f.expected, f.got)
                for f in report.failures]
        first = report.first_divergence
        return RunResult(self.name, reports={'transcript': {
            'ok': report.ok, 'checked': report.checked,
            'first_divergence': first.stage if first else None}},
            tables={'divergences': (('fixture', 'input', 'stage',
                                     'deviation', 'expected', 'got'), rows)})


class Runner(object):

    def __init__(self, output_dir=None):
        self.output_dir = output_dir or settings.output_dir()
        self.handlers = {}
        for handler in (CircuitExperiment, ProtocolExperiment,
                        CpfExperiment, FidelityExperiment,
                        SuperpositionExperiment, LockExperiment,
                        TranscriptExperiment):
            self.register(handler)

    def register(self, handler):
        """
        Registers an experiment handler (class or instance) under its name
        """
        if isinstance(handler, type):
            handler = handler()
        if not handler.name:
            raise ValueError('Experiment handlers need a name')
        self.handlers[handler.name] = handler
        handler.runner = self

    def options(self, netlist, **overrides):
        options = copy.deepcopy(netlist.run)
        for key, value in overrides.items():
            if value is not None:
                options[key] = value
        return options

    def execute(self, netlist, **overrides):
        """
        Runs a validated netlist. ``overrides`` replace [run] settings
        (shots, seed, analytic, experiment).
        """
        if not netlist.ok:
            raise NetlistError(netlist.diagnostics)
        options = self.options(netlist, **overrides)
        name = options['experiment']
        handler = self.handlers.get(name)
        if handler is None:
            raise ExecutionError('Unknown experiment %s (netlist line %d)'
                                 % (name, netlist.line_of('run',
                                                          'experiment')))
        log.info('[%s] Running %s with seed %d'
                 % (log.name.upper(), name, options['seed']))
        try:
            result = handler.run(netlist, options)
        except ExecutionError:
            raise
        except Exception as e:
            log.error('[%s] %s failed: %s' % (log.name.upper(), name, e))
            raise ExecutionError('%s: %s: %s (netlist line %d)'
                                 % (name, e.__class__.__name__, e,
                                    netlist.line_of('run')))
        result.shots = sum(result.tallies.values()) if result.tallies else 0
        result.provenance = {'netlist_sha256': netlist.digest(),
                             'seed': options['seed'],
                             'version': __version__}
        return result

    def dumps(self, result):
        return json.dumps(_clean(result.to_dict()), sort_keys=True,
                          indent=2) + '\n'

    def emit(self, result, format='json', out=None):
        """
        Writes the result, returns the written paths
        """
        out = out or self.output_dir
        written = []
        try:
            if not os.path.isdir(out):
                os.makedirs(out)
            if format == 'json':
                path = os.path.join(out, '%s.json' % result.experiment)
                with open(path, 'w') as f:
                    f.write(self.dumps(result))
                written.append(path)
            elif format == 'csv':
                path = os.path.join(out, '%s_tallies.csv'
                                    % result.experiment)
                self._write_csv(path, ('outcome', 'count'), [
                    (k, result.tallies[k]) for k in sorted(result.tallies,
                                                           key=str)])
                written.append(path)
                for name in sorted(result.tables):
                    header, rows = result.tables[name]
                    path = os.path.join(out, '%s_%s.csv'
                                        % (result.experiment, name))
                    self._write_csv(path, header, rows)
                    written.append(path)
            else:
                raise EmitError('Unknown output format %s' % format)
        except (IOError, OSError) as e:
            log.error('[%s] Could not write %s: %s'
                      % (log.name.upper(), out, e))
            raise EmitError('Could not write results to %s: %s' % (out, e))
        for path in written:
            log.info('[%s] Wrote %s' % (log.name.upper(), path))
        return written

    def _write_csv(self, path, header, rows):
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
