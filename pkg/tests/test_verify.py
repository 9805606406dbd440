"""The verification suite must pass fresh and catch injected defects."""

from nshd.verify import FaultInjection, PROPERTY_CHECKS, run_verification


def _by_name(results):
    return {r.name: r for r in results}


def test_fresh_build_all_properties_pass():
    results = run_verification()
    assert len(results) == len(PROPERTY_CHECKS)
    failed = [r.name for r in results if not r.passed]
    assert failed == []


def test_filter_selects_subset():
    results = run_verification(name_filter="leray")
    names = {r.name for r in results}
    assert names == {"leray_idempotent", "leray_divergence_free",
                     "derivative_leray_commute"}


def test_dissipation_sign_flip_breaks_energy_monotonicity():
    results = _by_name(
        run_verification(faults=FaultInjection(dissipation_sign_flip=True))
    )
    assert not results["energy_monotonic"].passed
    # structural properties are untouched by the broken dissipation
    assert results["parseval"].passed
    assert results["transform_roundtrip"].passed
    assert results["max_norm_moment_bound"].passed


def test_dealias_off_degrades_energy_balance_only():
    results = _by_name(run_verification(faults=FaultInjection(dealias_off=True)))
    # transforms are untouched
    assert results["parseval"].passed
    assert results["transform_roundtrip"].passed
    # aliasing wrecks the conservation-law properties, and verify names them
    assert not results["energy_identity"].passed
    assert not results["inviscid_energy_conservation"].passed
    # exact decay does not involve the quadratic term at all
    assert results["exact_linear_decay"].passed


def test_property_crash_reports_failure(monkeypatch):
    import nshd.verify as v

    def boom(faults):
        raise RuntimeError("synthetic")

    monkeypatch.setitem(v.PROPERTY_CHECKS, "parseval", boom)
    results = _by_name(run_verification(name_filter="parseval"))
    assert not results["parseval"].passed
    assert "synthetic" in results["parseval"].detail
