from bs_spectra import verify


def test_suite_passes_and_is_deterministic():
    first = verify.run_suite(seed=3)
    assert first, "empty suite"
    failed = [r for r in first if not r.passed]
    assert not failed, failed
    again = verify.run_suite(seed=3)
    assert [(r.name, r.value) for r in first] == [(r.name, r.value) for r in again]


def test_every_group_contributes():
    names = {g for g, _ in verify.SUITE}
    assert {"lorentzian", "hs_trace", "resolvent", "counterexample", "sobolev"} <= names


def test_crashing_check_is_reported(monkeypatch):
    def boom(rng):
        raise RuntimeError("boom")
    monkeypatch.setattr(verify, "SUITE", [("boom", boom)])
    (res,) = verify.run_suite()
    assert not res.passed and "boom" in res.note
