# -*- coding: utf-8 -*-
import os

import pytest
from jinja2 import Environment, FileSystemLoader

from hdcpf.netlist import parse_netlist

MOCKS = os.path.join(os.path.dirname(__file__), 'mocks')


def render(name, **context):
    """
    Renders ``mocks/<name>.netlist`` with the given template context
    """
    loader = FileSystemLoader(MOCKS)
    env = Environment(loader=loader, trim_blocks=True)
    template = env.get_template('%s.netlist' % name)
    return template.render(**context)


@pytest.fixture
def netlist_text():
    return render


@pytest.fixture
def netlist():
    def build(name, **context):
        return parse_netlist(render(name, **context))
    return build


@pytest.fixture(autouse=True)
def mock(monkeypatch, tmp_path):
    monkeypatch.setenv('HDCPF_OUTPUT_DIR', str(tmp_path))
