"""Shared config builders and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from flipq import MetricFieldSpec, ModelConfig, PerturbationSpec, PerturbationTerm


def make_config(
    r_prime=1,
    r_second=1,
    epsilon=0.5,
    domain_radius=0.8,
    metric_field=None,
    terms=(),
) -> ModelConfig:
    return ModelConfig(
        r_prime=r_prime,
        r_second=r_second,
        epsilon=epsilon,
        metric_field=metric_field or MetricFieldSpec.identity(r_prime, r_second),
        perturbation=PerturbationSpec(terms=tuple(terms)),
        domain_radius=domain_radius,
    )


def mixed_quartic_term(coeff=0.1) -> PerturbationTerm:
    return PerturbationTerm(mixed_pow=1, coeff=(coeff,))


def fourier_metric(r_prime, r_second) -> MetricFieldSpec:
    """g' = (2 + cos theta) I, g'' = (1.5 + 0.5 sin theta) I."""
    return MetricFieldSpec.fourier(
        [(0, 2.0 * np.eye(r_prime)), (1, np.eye(r_prime))],
        [(0, 1.5 * np.eye(r_second)), (1, np.zeros((r_second, r_second)), 0.5 * np.eye(r_second))],
    )


@pytest.fixture
def cfg_identity():
    return make_config()


@pytest.fixture
def cfg_wide():
    """Identity metrics with a roomy domain for hand-computed examples."""
    return make_config(epsilon=2.0, domain_radius=3.0)


@pytest.fixture
def cfg_quartic():
    return make_config(epsilon=0.5, domain_radius=0.8, terms=[mixed_quartic_term(0.1)])


@pytest.fixture
def cfg_quartic_wide():
    return make_config(epsilon=2.0, domain_radius=3.0, terms=[mixed_quartic_term(0.1)])


@pytest.fixture
def cfg_fourier_quartic():
    return make_config(
        r_prime=2,
        r_second=1,
        metric_field=fourier_metric(2, 1),
        terms=[mixed_quartic_term(0.1)],
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
