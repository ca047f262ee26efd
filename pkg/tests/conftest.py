"""Shared pairs for the fixinv test suite."""

import pytest
import torch

from fixinv.models import pair_from_matrices
from helpers import vec


@pytest.fixture
def identity_pair():
    """E = D = I on R^2: for x = D(z) the start E(x) is already a zero of T."""
    eye = torch.eye(2, dtype=torch.float64)
    return pair_from_matrices(eye, eye)


@pytest.fixture
def diag_pair():
    """E = diag(1, 0.5), D = I, so E·D = diag(1, 0.5)."""
    return pair_from_matrices(torch.diag(vec(1.0, 0.5)), torch.eye(2, dtype=torch.float64))
