import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ampflow.circuits import cascode_chain_netlist, chain_netlist, mesh9_netlist
from ampflow.compiler import compile_netlist


@pytest.fixture(scope="session")
def chain_model():
    return compile_netlist(chain_netlist())


@pytest.fixture(scope="session")
def mesh_model():
    return compile_netlist(mesh9_netlist())


@pytest.fixture(scope="session")
def cascode_model():
    return compile_netlist(cascode_chain_netlist())
