"""Shared fixtures: the canonical descriptors used across the suite."""

import random

import pytest

from weylval import OmegaDescriptor


WORKED_JSON = {
    "steps": [{"m": 1, "n": 2, "beta": "1"}, {"m": 1, "n": 4, "beta": "1"}],
    "tail": {
        "kind": "irrational",
        "value": {"q": "0", "k_xi": 1, "k_mu": 0, "scale": "1/8"},
    },
    "alpha_signs": [{"i": 1, "j": 2, "sign": 1}],
}

SINGLE_TERMINAL_JSON = {
    "steps": [{"m": 1, "n": 2, "beta": "4"}],
    "tail": {
        "kind": "irrational",
        "value": {"q": "0", "k_xi": 1, "k_mu": 0, "scale": "1/3"},
    },
}


@pytest.fixture(scope="session")
def worked() -> OmegaDescriptor:
    """Rank-two tower: steps (1,2,1), (1,4,1), irrational tail value xi/8."""
    return OmegaDescriptor.from_json(WORKED_JSON)


@pytest.fixture(scope="session")
def halving() -> OmegaDescriptor:
    """Infinite rule i -> (1, 2^i, 1): 2-divisible rational value group."""
    return OmegaDescriptor.from_json(
        {"steps": [], "tail": {"kind": "rule", "rule": "halving"}}
    )


@pytest.fixture(scope="session")
def constant131() -> OmegaDescriptor:
    """Infinite rule i -> (1, 3^i, 1): non-2-divisible, all heights zero."""
    return OmegaDescriptor.from_json(
        {"steps": [], "tail": {"kind": "rule", "rule": "constant(1,3,1)"}}
    )


@pytest.fixture(scope="session")
def single24() -> OmegaDescriptor:
    """Finite one-step tower (1,2,4): non-2-divisible with a free root sign."""
    return OmegaDescriptor.from_json({"steps": [{"m": 1, "n": 2, "beta": "4"}]})


@pytest.fixture(scope="session")
def single_terminal() -> OmegaDescriptor:
    """One step (1,2,4) plus irrational tail value xi/3: rank two, free sign."""
    return OmegaDescriptor.from_json(SINGLE_TERMINAL_JSON)


@pytest.fixture()
def rng() -> random.Random:
    return random.Random(20240815)
