import pytest

from speckleq import build_basis


@pytest.fixture(scope="session")
def basis_c1():
    """Default Slepian basis (c = 1, 7 modes) shared across tests."""
    return build_basis(1.0, 7, 256)
