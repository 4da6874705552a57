"""Test configuration for pytest."""

import sys
from pathlib import Path

import pytest

# Add the src directory to Python path for test imports
src_path = str(Path(__file__).parent.parent / "src")
if src_path not in sys.path:
    sys.path.insert(0, src_path)

from fpcca.models import BlockOperator2, BlockOperator3, CovBlocks  # noqa: E402
from fpcca.oracle import blocks_to_operators  # noqa: E402
from fpcca.simulate import make_rng  # noqa: E402
from fpcca.verify import random_blocks  # noqa: E402


@pytest.fixture
def triple_blocks() -> CovBlocks:
    """Random positive definite covariance of three vectors of sizes 3, 2 and 4."""
    return random_blocks(make_rng(7), (3, 2, 4))


@pytest.fixture
def q3(triple_blocks: CovBlocks) -> BlockOperator3:
    m12, m13, m23 = blocks_to_operators(triple_blocks)
    return BlockOperator3(m12=m12, m13=m13, m23=m23)


@pytest.fixture
def q2(q3: BlockOperator3) -> BlockOperator2:
    return BlockOperator2(m12=q3.m12)
