import shutil

import pytest

from cltlb.smt import SolverConfig

requires_solver = pytest.mark.skipif(
    shutil.which(SolverConfig.from_env().command[0]) is None,
    reason="no SMT solver on PATH (set CLTLB_SOLVER)",
)


@pytest.fixture
def solver():
    return SolverConfig.from_env()
