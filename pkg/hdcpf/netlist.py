# -*- coding: utf-8 -*-
"""
Netlist files.

Line-oriented blocks::

    version 1

    [space]
    paths = A,B,C,D
    L = 4

    [sources]
    photon1 = mode A:H:0
    photon2 = row 4@B

    [elements]
    PBS(in=[A,B],out=[C,D])

    [detection]
    pattern = C:1,D:1
    basis = C:pol,D:pol

    [run]
    experiment = circuit
    shots = 1000

``#`` starts a comment. A JSON object with the same block names is
accepted as well. Parsing never raises: problems are collected as
diagnostics with their line and column.
"""
import re
import copy
import json
import hashlib
import logging
from dataclasses import dataclass, field

from .enums import BellOutcome, Readout
from .modes import Mode, ModeSpace
from .elements import parse_element, format_element
from .elements import parse_number, format_number
from .noise import NoiseSpec
from .lock import LockParams, DriftModel, PidGains
from .exceptions import DescriptorError
from .exceptions import UnknownElement
from .exceptions import ValidationError

log = logging.getLogger('hdcpf')

VERSION = 1
BLOCKS = ('space', 'sources', 'elements', 'detection', 'run', 'noise',
          'lock')
SOURCE_KINDS = ('mode', 'row', 'auxiliary', 'qudit', 'state')
RESOLUTIONS = ('pol', 'oam', 'mode')
FORMATS = ('json', 'csv')

_HEADER_RE = re.compile(r'^\[\s*([A-Za-z_]+)\s*\]$')
_ID_RE = re.compile(r'^[A-Za-z_][A-Za-z0-9_]*$')


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str

    def __str__(self):
        return '%d:%d: %s' % (self.line, self.column, self.message)


@dataclass
class Source:
    id: str
    kind: str
    value: object = None
    path: str = None
    line: int = 0

    def text(self):
        if self.kind == 'mode':
            body = 'mode %s' % self.value
        elif self.kind == 'row':
            body = 'row %d' % self.value
        elif self.kind == 'auxiliary':
            body = 'auxiliary'
        elif self.kind == 'qudit':
            body = 'qudit %s' % ','.join(format_number(a)
                                         for a in self.value)
        else:
            body = 'state %s' % ';'.join(
                '%s %s %s' % (mode, format_number(a.real),
                              format_number(a.imag))
                for mode, a in self.value)
        if self.path:
            body += '@%s' % self.path
        return body

    def paths(self):
        if self.kind == 'mode':
            return [self.value.path]
        if self.kind == 'state':
            return sorted(set(mode.path for mode, _ in self.value))
        return [self.path] if self.path else []


# Value parsers raise ValueError with a message fit for a diagnostic
def _int(text):
    value = parse_number(text)
    if value != int(value):
        raise ValueError('expected an integer, got %s' % text)
    return int(value)


def _count(text):
    value = _int(text)
    if value < 0:
        raise ValueError('%d is below 0' % value)
    return value


def _float(text):
    return parse_number(text)


def _bool(text):
    lowered = text.strip().lower()
    if lowered in ('true', 'yes', '1'):
        return True
    if lowered in ('false', 'no', '0'):
        return False
    raise ValueError('expected true or false, got %s' % text)


def _word(text):
    text = text.strip()
    if not _ID_RE.match(text.replace('-', '_')):
        raise ValueError('expected a name, got %r' % text)
    return text


def _choice(choices):
    def parse(text):
        text = text.strip()
        if text not in choices:
            raise ValueError('%r is not one of %s' % (text,
                                                      ', '.join(choices)))
        return text
    return parse


def _words(text):
    return [_word(w) for w in text.split(',') if w.strip()]


def _counts(text):
    counts = {}
    for item in text.split(','):
        path, _, count = item.partition(':')
        if not count:
            raise ValueError('expected path:count, got %r' % item.strip())
        counts[_word(path)] = _int(count)
    return counts


def _resolutions(text):
    result = {}
    for item in text.split(','):
        path, _, resolution = item.partition(':')
        result[_word(path)] = _choice(RESOLUTIONS)(resolution)
    return result


def _outcomes(text):
    names = _words(text)
    for name in names:
        BellOutcome.from_name(name)
    return names


def _message(error):
    if error.args and isinstance(error.args[0], list):
        return '; '.join(error.args[0])
    return str(error)


def _format_value(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (int, float)):
        return format_number(value)
    if isinstance(value, dict):
        return ','.join('%s:%s' % (k, _format_value(v))
                        for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return ','.join(_format_value(v) for v in value)
    return str(value)


# block -> [(key, parser, default)] in canonical order
KEYS = {
    'space': [('paths', _words, []), ('L', _count, 4)],
    'detection': [('pattern', _counts, {}), ('basis', _resolutions, {}),
                  ('accepted', _outcomes, ['PhiPlus']),
                  ('readout', _choice(Readout.NAMES), 'projective')],
    'run': [('experiment', _word, 'circuit'), ('shots', _count, 0),
            ('seed', _int, 0), ('analytic', _bool, True),
            ('format', _choice(FORMATS), 'json'), ('d', _int, 4),
            ('p', _int, 1), ('basis', _words, ['ZX', 'XZ']),
            ('states', _int, 20), ('samples', _int, None),
            ('fixture', _words, ['port_a', 'port_b'])],
    'noise': [(f.name, _float if f.cast is float else _int, f.default)
              for f in NoiseSpec._meta.declared_fields],
    'lock': [(f.name, _float, f.default)
             for f in LockParams._meta.declared_fields] +
            [('drift', _choice(('random-walk', 'sinusoidal', 'step')),
              'random-walk')] +
            [(f.name, _float, f.default)
             for f in DriftModel._meta.declared_fields if f.name != 'kind'] +
            [(f.name, _float, f.default)
             for f in PidGains._meta.declared_fields] +
            [('duration', _float, 1.0), ('setpoint', _float, 0.0),
             ('loop_dt', _float, 1e-4), ('initial', _float, 0.0)],
}


@dataclass
class Netlist:
    version: int = None
    sources: dict = field(default_factory=dict)
    elements: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)
    explicit: dict = field(default_factory=dict)
    positions: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    text: str = ''

    def __post_init__(self):
        for block, keys in KEYS.items():
            self.settings.setdefault(block, dict(
                (key, copy.deepcopy(default)) for key, _, default in keys))
            self.explicit.setdefault(block, [])

    @property
    def ok(self):
        return not self.diagnostics

    @property
    def space(self):
        return self.settings['space']

    @property
    def detection(self):
        return self.settings['detection']

    @property
    def run(self):
        return self.settings['run']

    @property
    def experiment(self):
        return self.run['experiment']

    def declared_paths(self):
        return list(self.space['paths'])

    def mode_space(self):
        return ModeSpace(self.space['paths'], self.space['L'])

    def noise_spec(self):
        if not self.explicit['noise']:
            return None
        return NoiseSpec(**self.settings['noise']).clean()

    def lock_models(self):
        """
        (LockParams, DriftModel, PidGains, loop settings)
        """
        values = self.settings['lock']

        def pick(model):
            return dict((f.name, values[f.name])
                        for f in model._meta.declared_fields
                        if f.name in values)

        params = LockParams(**pick(LockParams)).clean()
        drift = DriftModel(kind=values['drift'], **dict(
            (k, v) for k, v in pick(DriftModel).items() if k != 'kind'))
        gains = PidGains(**pick(PidGains)).clean()
        loop = dict((k, values[k]) for k in ('duration', 'setpoint',
                                             'loop_dt', 'initial'))
        return params, drift.clean(), gains, loop

    def digest(self):
        return hashlib.sha256(self.text.encode('utf-8')).hexdigest()

    def line_of(self, block, key=None):
        return self.positions.get((block, key), 0)


class _Parser(object):

    def __init__(self, text):
        self.netlist = Netlist(text=text)
        self.block = None
        self.seen_blocks = set()

    def error(self, line, column, message):
        self.netlist.diagnostics.append(Diagnostic(line, column, message))

    def parse(self):
        for number, raw in enumerate(self.netlist.text.splitlines(), 1):
            line = raw.split('#', 1)[0].rstrip()
            if not line.strip():
                continue
            indent = len(line) - len(line.lstrip())
            self.line(number, indent, line.strip())
        if self.netlist.version is None:
            self.error(1, 1, 'missing version line')
        self.validate()
        return self.netlist

    def line(self, number, indent, line):
        header = _HEADER_RE.match(line)
        if header:
            name = header.group(1).lower()
            if name not in BLOCKS:
                self.error(number, indent + 1, 'unknown block [%s]' % name)
                self.block = '?'
            elif name in self.seen_blocks:
                self.error(number, indent + 1, 'duplicate block [%s]' % name)
                self.block = '?'
            else:
                self.block = name
                self.seen_blocks.add(name)
                self.netlist.positions[(name, None)] = number
            return

        if self.block is None:
            words = line.split()
            if words[0] != 'version':
                self.error(number, indent + 1, 'expected a version line '
                           'before the first block')
                return
            try:
                if len(words) != 2:
                    raise ValueError('expected "version N"')
                version = _int(words[1])
            except (ValueError, ArithmeticError) as e:
                self.error(number, indent + 1, str(e))
                return
            if version != VERSION:
                self.error(number, indent + 1, 'unsupported version %d'
                           % version)
            self.netlist.version = version
            return
        if self.block == '?':
            return
        if self.block == 'elements':
            self.element(number, indent, line)
            return

        key, eq, value = line.partition('=')
        if not eq:
            self.error(number, indent + 1, 'expected key = value')
            return
        key = key.strip()
        column = indent + line.index('=') + 2 + \
            (len(value) - len(value.lstrip()))
        if self.block == 'sources':
            self.source(number, indent, key, value.strip(), column)
        else:
            self.setting(number, indent, key, value.strip(), column)

    def element(self, number, indent, line):
        try:
            self.netlist.elements.append((parse_element(line), number))
        except UnknownElement as e:
            self.error(number, indent + 1, str(e))
        except DescriptorError as e:
            self.error(number, indent + e.column + 1, str(e))
        except ValidationError as e:
            self.error(number, indent + 1, '; '.join(e.args[0]))

    def setting(self, number, indent, key, value, column):
        keys = dict((k, parser) for k, parser, _ in KEYS[self.block])
        if key not in keys:
            self.error(number, indent + 1, 'unknown key %s in [%s]'
                       % (key, self.block))
            return
        if key in self.netlist.explicit[self.block]:
            self.error(number, indent + 1, 'duplicate key %s' % key)
            return
        if not value:
            self.error(number, column, 'missing value for %s' % key)
            return
        try:
            parsed = keys[key](value)
        except (ValueError, ArithmeticError) as e:
            self.error(number, column, '%s: %s' % (key, e))
            return
        self.netlist.settings[self.block][key] = parsed
        self.netlist.explicit[self.block].append(key)
        self.netlist.positions[(self.block, key)] = number

    def source(self, number, indent, key, value, column):
        if not _ID_RE.match(key):
            self.error(number, indent + 1, 'invalid photon id %r' % key)
            return
        if key in self.netlist.sources:
            self.error(number, indent + 1, 'duplicate photon id %s' % key)
            return
        body, _, path = value.partition('@')
        path = path.strip() or None
        kind, _, arg = body.strip().partition(' ')
        arg = arg.strip()
        try:
            if kind not in SOURCE_KINDS:
                raise ValueError('unknown source kind %r, expected one of %s'
                                 % (kind, ', '.join(SOURCE_KINDS)))
            if kind == 'mode':
                parsed = Mode.parse(arg)
            elif kind == 'row':
                parsed = _int(arg)
            elif kind == 'auxiliary':
                if arg:
                    raise ValueError('auxiliary takes no argument')
                parsed = None
            elif kind == 'qudit':
                parsed = [_float(a) for a in arg.split(',')]
            else:
                parsed = []
                for term in arg.split(';'):
                    mode, re_part, im_part = term.split()
                    parsed.append((Mode.parse(mode),
                                   complex(_float(re_part),
                                           _float(im_part))))
            if kind in ('row', 'auxiliary', 'qudit') and not path:
                raise ValueError('%s sources are placed with @PATH' % kind)
        except (ValueError, ArithmeticError) as e:
            self.error(number, column, str(e))
            return
        self.netlist.sources[key] = Source(key, kind, parsed, path, number)

    def validate(self):
        netlist = self.netlist
        declared = set(netlist.space['paths'])

        def undeclared(paths, line, what):
            for path in paths:
                if path not in declared:
                    self.error(line, 1, 'undeclared path %s in %s'
                               % (path, what))

        for element, line in netlist.elements:
            undeclared(element.paths, line, str(element))
        for source in netlist.sources.values():
            undeclared(source.paths(), source.line, 'source %s' % source.id)
        for block, key in (('detection', 'pattern'), ('detection', 'basis')):
            undeclared(netlist.settings[block][key],
                       netlist.line_of(block, key), key)

        for block, models in (('noise', (NoiseSpec, )),
                              ('lock', (LockParams, DriftModel, PidGains))):
            if not netlist.explicit[block]:
                continue
            values = dict(netlist.settings[block])
            values['kind'] = values.get('drift')
            for model in models:
                names = model._meta.get_declared_field_names()
                try:
                    model(**dict((k, values[k]) for k in names)).clean()
                except ValidationError as e:
                    errors = e.args[0]
                    for name, error in sorted(errors.items()):
                        self.error(netlist.line_of(block, name) or
                                   netlist.line_of(block), 1,
                                   '%s: %s' % (name, _message(error)))


def parse_netlist(text):
    """
    Always returns a Netlist; ``netlist.diagnostics`` lists the problems
    """
    if text.lstrip().startswith('{'):
        try:
            text = from_json(text)
        except (ValueError, TypeError, AttributeError) as e:
            netlist = Netlist(text=text)
            netlist.diagnostics.append(Diagnostic(
                getattr(e, 'lineno', 1), getattr(e, 'colno', 1),
                'invalid JSON netlist: %s' % e))
            return netlist
    netlist = _Parser(text).parse()
    log.debug('[%s] Parsed netlist with %d diagnostics'
              % (log.name.upper(), len(netlist.diagnostics)))
    return netlist


def serialize(netlist):
    """
    Canonical text of a netlist, explicit settings only
    """
    lines = ['version %d' % (netlist.version or VERSION)]
    for block in BLOCKS:
        if block == 'sources':
            body = ['%s = %s' % (s.id, s.text())
                    for s in netlist.sources.values()]
        elif block == 'elements':
            body = [format_element(e) for e, _ in netlist.elements]
        else:
            body = ['%s = %s' % (key, _format_value(
                netlist.settings[block][key]))
                for key, _, _ in KEYS[block]
                if key in netlist.explicit[block]]
        if body:
            lines.extend(['', '[%s]' % block] + body)
    return '\n'.join(lines) + '\n'


def normalize(text):
    """
    Comment and whitespace free form of netlist text
    """
    lines = []
    block = None
    for raw in text.splitlines():
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        header = _HEADER_RE.match(line)
        if header:
            block = header.group(1).lower()
            lines.extend(['', '[%s]' % block])
            continue
        if block is None:
            lines.append(' '.join(line.split()))
        elif block == 'elements':
            lines.append(''.join(line.split()))
        else:
            key, _, value = line.partition('=')
            value = re.sub(r'\s*([,;@:])\s*', r'\1', value.strip())
            lines.append('%s = %s' % (key.strip(), ' '.join(value.split())))
    return '\n'.join(lines) + '\n'


def from_json(text):
    """
    Renders a JSON netlist into the line format
    """
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError('a JSON netlist is an object')
    lines = ['version %s' % data.get('version', '')]
    for block in BLOCKS:
        if block not in data:
            continue
        lines.append('[%s]' % block)
        content = data[block]
        if block == 'elements':
            lines.extend(str(e) for e in content)
        else:
            for key, value in content.items():
                if isinstance(value, bool):
                    value = 'true' if value else 'false'
                elif isinstance(value, dict):
                    value = ','.join('%s:%s' % kv for kv in value.items())
                elif isinstance(value, list):
                    value = ','.join(str(v) for v in value)
                lines.append('%s = %s' % (key, value))
    unknown = set(data) - set(BLOCKS) - {'version'}
    for name in sorted(unknown):
        lines.append('[%s]' % name)
    return '\n'.join(lines) + '\n'


def to_json(netlist):
    data = {'version': netlist.version or VERSION}
    for block in BLOCKS:
        if block == 'sources':
            if netlist.sources:
                data[block] = dict((s.id, s.text())
                                   for s in netlist.sources.values())
        elif block == 'elements':
            if netlist.elements:
                data[block] = [str(e) for e, _ in netlist.elements]
        elif netlist.explicit[block]:
            data[block] = dict((key, _format_value(
                netlist.settings[block][key]))
                for key in netlist.explicit[block])
    return json.dumps(data, sort_keys=True, indent=2)


def load_netlist(path):
    """
    Reads a netlist file; undecodable bytes become a diagnostic at their
    line and column
    """
    with open(path, 'rb') as f:
        raw = f.read()
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as e:
        before = raw[:e.start]
        netlist = Netlist()
        netlist.diagnostics.append(Diagnostic(
            before.count(b'\n') + 1, e.start - (before.rfind(b'\n') + 1) + 1,
            'invalid UTF-8: %s' % e.reason))
        log.warning('[%s] %s is not valid UTF-8' % (log.name.upper(), path))
        return netlist
    return parse_netlist(text)
