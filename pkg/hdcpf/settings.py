# -*- coding: utf-8 -*-
import os


def _setting(name, default, cast=str):
    value = os.environ.get(name, None)
    if value is None or value == '':
        return default
    return cast(value)


DATA_DIR = os.path.join(os.path.dirname(__file__), 'data')

OUTPUT_DIR = _setting('HDCPF_OUTPUT_DIR', os.getcwd())
PRUNE_TOLERANCE = _setting('HDCPF_PRUNE_TOLERANCE', 1e-12, float)
CONVENTIONS = _setting('HDCPF_CONVENTIONS',
                       os.path.join(DATA_DIR, 'conventions.json'))
NOISE_SAMPLES = _setting('HDCPF_NOISE_SAMPLES', 16, int)

# Check tolerances
UNITARY_TOLERANCE = 1e-10
NORM_TOLERANCE = 1e-10
QUDIT_NORM_TOLERANCE = 1e-12

DEFAULT_TRUNCATION = 4


def output_dir():
    """
    Resolved lazily so tests can monkeypatch the environment
    """
    return _setting('HDCPF_OUTPUT_DIR', OUTPUT_DIR)
