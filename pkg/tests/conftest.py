import pytest

from kmkit.exactalg import PrimeField
from kmkit.gcm import (
    CARTAN_A1,
    CARTAN_A2,
    CARTAN_AFFINE_A1,
    CARTAN_B2,
    CARTAN_G2,
    CARTAN_GENERIC_33,
    build_root_datum,
    validate_gcm,
)
from kmkit.kmalg import assemble_g


@pytest.fixture(scope="session")
def a1_datum():
    return build_root_datum(validate_gcm(CARTAN_A1))


@pytest.fixture(scope="session")
def a2_datum():
    return build_root_datum(validate_gcm(CARTAN_A2))


@pytest.fixture(scope="session")
def b2_datum():
    return build_root_datum(validate_gcm(CARTAN_B2))


@pytest.fixture(scope="session")
def g2_datum():
    return build_root_datum(validate_gcm(CARTAN_G2))


@pytest.fixture(scope="session")
def aff_datum():
    return build_root_datum(validate_gcm(CARTAN_AFFINE_A1))


@pytest.fixture(scope="session")
def gen_datum():
    return build_root_datum(validate_gcm(CARTAN_GENERIC_33))


@pytest.fixture(scope="session")
def a1_alg(a1_datum):
    return assemble_g(a1_datum, 1)


@pytest.fixture(scope="session")
def a2_alg(a2_datum):
    # height 3 keeps every bracket of the 8-dimensional algebra in window
    return assemble_g(a2_datum, 3)


@pytest.fixture(scope="session")
def a2_alg_h6(a2_datum):
    return assemble_g(a2_datum, 6)


@pytest.fixture(scope="session")
def g2_alg_h6(g2_datum):
    return assemble_g(g2_datum, 6)


@pytest.fixture(scope="session")
def aff_alg_h4(aff_datum):
    return assemble_g(aff_datum, 4)


@pytest.fixture(scope="session")
def aff_alg_h6(aff_datum):
    return assemble_g(aff_datum, 6)


@pytest.fixture(scope="session")
def F2():
    return PrimeField(2)


@pytest.fixture(scope="session")
def F3():
    return PrimeField(3)


@pytest.fixture(scope="session")
def F5():
    return PrimeField(5)


@pytest.fixture(scope="session")
def F7():
    return PrimeField(7)
