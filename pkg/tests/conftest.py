"""Shared fixtures"""

import pytest

from export_import import PackageImporter
from field_arith import field
from lattice_theta import ZFLattice


@pytest.fixture(scope="session")
def F():
    return field(5)


@pytest.fixture(scope="session")
def pkg():
    return PackageImporter.load("q5_31a")


@pytest.fixture(scope="session")
def unary(F):
    """Z_F with Q(x) = x^2"""
    return ZFLattice(F, ((F(2),),), "unary")


@pytest.fixture(scope="session")
def binary(F):
    """Z_F^2 with Q(x) = x0^2 + x1^2"""
    return ZFLattice(F, ((F(2), F(0)), (F(0), F(2))), "binary")
