"""Shared fixtures: the reference radio, exponents, environment, and laws."""

import pytest

from aeropower import (
    BreakpointLaws,
    PathlossExponents,
    RadioConfig,
    URBAN,
    watts_from_dbm,
)


@pytest.fixture(scope="session")
def radio():
    """20 dBm transmit power, 10 dBi on both ends, 3.5 GHz carrier."""
    return RadioConfig(tx_power=watts_from_dbm(20.0), tx_gain=10.0,
                       rx_gain=10.0, carrier_freq=3.5e9)


@pytest.fixture(scope="session")
def exponents():
    return PathlossExponents(alpha_los=2.0, alpha_nlos=3.0)


@pytest.fixture(scope="session")
def urban():
    return URBAN


@pytest.fixture(scope="session")
def reference_laws():
    """Published urban height-scaling constants."""
    return BreakpointLaws(mu=0.6, kappa=1.38)
