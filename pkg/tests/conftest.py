from __future__ import annotations

import pytest

from htntutor.problems import ProblemSpec, builtin_domains, generate_problem


@pytest.fixture(scope="session")
def domains():
    return {d.name: d for d in builtin_domains()}


@pytest.fixture(scope="session")
def fraction_domain(domains):
    return domains["fractionAddition"]


@pytest.fixture(scope="session")
def log_domain(domains):
    return domains["logReduction"]


@pytest.fixture()
def half_plus_quarter():
    """The worked fraction problem 1/2 + 1/4."""
    return generate_problem(ProblemSpec("fractionAddition",
                                        {"num1": 1, "den1": 2, "num2": 1, "den2": 4}))


@pytest.fixture()
def log_4_8():
    """The worked logarithm problem log2(4) + log2(8)."""
    return generate_problem(ProblemSpec("logReduction", {"base": 2, "arg1": 4, "arg2": 8}))
