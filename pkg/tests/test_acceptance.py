"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one pass/fail line (visible with -s or in the CLI
`validate` command, which runs the same criteria).
"""

import pytest

from fgnls.validation import ALL_CRITERIA, ValidationContext


@pytest.fixture(scope="session")
def ctx():
    return ValidationContext()


def _check(num, ctx):
    name, fn = ALL_CRITERIA[num]
    ok, detail = fn(ctx)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {name} -- {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def test_criterion_01_genus0_closed_forms(ctx):
    _check(1, ctx)


def test_criterion_02_theta_identities(ctx):
    _check(2, ctx)


def test_criterion_03_background_solves_nls(ctx):
    _check(3, ctx)


def test_criterion_04_lax_and_rhp_consistency(ctx):
    _check(4, ctx)


def test_criterion_05_scattering_unitarity(ctx):
    _check(5, ctx)


def test_criterion_06_delta_contract(ctx):
    _check(6, ctx)


def test_criterion_07_painleve34(ctx):
    _check(7, ctx)


def test_criterion_08_zakharov_manakov_decay(ctx):
    _check(8, ctx)


def test_criterion_09_transition_scaling(ctx):
    _check(9, ctx)


def test_criterion_10_trivial_perturbation(ctx):
    _check(10, ctx)
