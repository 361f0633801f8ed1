# -*- coding: utf-8 -*-
"""
Command-line surface: ``python -m hdcpf <command> --netlist FILE``.

Exit codes: 0 success, 1 diagnostics (netlist, validation or a transcript
divergence), 2 runtime error.
"""
import os
import sys
import logging
import argparse

from termcolor import colored

from . import __version__
from . import settings
from .netlist import load_netlist
from .runner import Runner
from .exceptions import NetlistError
from .exceptions import ExecutionError
from .exceptions import EmitError

log = logging.getLogger('hdcpf')

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_RUNTIME = 2

# command -> (forced experiment, default netlist)
COMMANDS = {
    'simulate': (None, None),
    'fidelity': ('fidelity', 'cpf_d4.netlist'),
    'lock': ('lock', 'lock.netlist'),
    'transcript': ('transcript', 'cpf_d4.netlist'),
    'validate': (None, None),
}


def shipped_netlist(name):
    return os.path.join(settings.DATA_DIR, 'netlists', name)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='hdcpf', description='Heralded high-dimensional CPF gate '
        'simulator')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True
    for name in sorted(COMMANDS):
        sub = commands.add_parser(name)
        default = COMMANDS[name][1]
        sub.add_argument('--netlist', required=default is None,
                         default=default and shipped_netlist(default),
                         help='netlist file (text or JSON)')
        sub.add_argument('--verbose', '-v', action='count', default=0)
        if name == 'validate':
            continue
        sub.add_argument('--shots', type=int)
        sub.add_argument('--seed', type=int)
        sub.add_argument('--out', help='output directory (default '
                         '$HDCPF_OUTPUT_DIR or the working directory)')
        sub.add_argument('--format', choices=('json', 'csv'))
        sub.add_argument('--analytic', dest='analytic', action='store_true',
                         default=None)
        sub.add_argument('--sampled', dest='analytic', action='store_false')
    return parser


def print_diagnostics(path, diagnostics, stream=None):
    stream = stream or sys.stderr
    for d in diagnostics:
        stream.write('%s:%s %s\n' % (path, colored('%d:%d:' % (d.line,
                                                              d.column),
                                                   'red'), d.message))


def configure_logging(verbose):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(message)s')


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        netlist = load_netlist(args.netlist)
    except (IOError, OSError) as e:
        sys.stderr.write('%s %s\n' % (colored('error:', 'red'), e))
        return EXIT_RUNTIME
    if not netlist.ok:
        print_diagnostics(args.netlist, netlist.diagnostics)
        return EXIT_DIAGNOSTICS
    if args.command == 'validate':
        sys.stdout.write('%s %s\n' % (args.netlist, colored('ok', 'green')))
        return EXIT_OK

    runner = Runner(args.out)
    try:
        result = runner.execute(netlist, experiment=COMMANDS[args.command][0],
                                shots=args.shots, seed=args.seed,
                                analytic=args.analytic)
        written = runner.emit(result, args.format or netlist.run['format'])
    except NetlistError as e:
        print_diagnostics(args.netlist, e.diagnostics)
        return EXIT_DIAGNOSTICS
    except (ExecutionError, EmitError) as e:
        sys.stderr.write('%s %s\n' % (colored('error:', 'red'), e))
        return EXIT_RUNTIME
    for path in written:
        sys.stdout.write('%s\n' % path)

    transcript = result.reports.get('transcript')
    if transcript is not None and not transcript['ok']:
        sys.stderr.write('%s transcript diverges at %s\n'
                         % (colored('error:', 'red'),
                            transcript['first_divergence']))
        return EXIT_DIAGNOSTICS
    return EXIT_OK
