"""Scenario catalog: every bundled scenario must pass its own checks.

The catalog is the executable form of the worked examples, so a failure
here means either a regression in the library or a drifted expectation.
run_scenario is cached per process; the expensive infinite-order probe
therefore runs once even though the acceptance suite asks for it again.
"""

import pytest

from ode_growth_lab.catalog import ScenarioReport, list_scenarios, run_scenario

ALL_IDS = [sc.scenario_id for sc in list_scenarios()]


def test_catalog_is_nonempty_and_ids_are_unique():
    assert len(ALL_IDS) >= 24
    assert len(set(ALL_IDS)) == len(ALL_IDS)


def test_ids_are_kebab_case():
    for sid in ALL_IDS:
        assert sid == sid.lower()
        assert " " not in sid
        assert all(part for part in sid.split("-"))


def test_listing_order_is_stable():
    again = [sc.scenario_id for sc in list_scenarios()]
    assert again == ALL_IDS


def test_unknown_scenario_id_raises():
    with pytest.raises(KeyError):
        run_scenario("no-such-scenario")


def test_scenarios_carry_titles_and_citations():
    for sc in list_scenarios():
        assert sc.title.strip()
        assert sc.citation.strip()


def test_run_scenario_is_cached():
    a = run_scenario("airy-growth-exponent")
    b = run_scenario("airy-growth-exponent")
    assert a is b


@pytest.mark.parametrize("scenario_id", ALL_IDS)
def test_scenario_passes(scenario_id):
    report = run_scenario(scenario_id)
    assert isinstance(report, ScenarioReport)
    assert report.scenario_id == scenario_id
    assert report.checks, "scenario must perform at least one check"
    for c in report.checks:
        assert c.name.strip()
    failed = [c.name for c in report.checks if not c.passed]
    assert report.passed, f"failed checks: {failed}"
