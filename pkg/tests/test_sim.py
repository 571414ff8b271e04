import csv
import io
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cvinfer import errors, mslr, sim


def small(**kw):
    base = dict(family="normal", n=(4, 4, 4), location=(20.0, 10.0, 10.0), tau=0.1, reps=30,
                gpv_draws=400, master_seed=3, methods=("MSLR", "SLR", "GV1", "GV2", "GV3"))
    base.update(kw)
    return sim.SimScenario(**base)


def test_builtin_grid():
    scs = sim.builtin_scenarios()
    assert len(scs) == 216
    assert len({(s.family, s.n, s.tau) for s in scs}) == 216
    row = [s for s in scs if s.n == (4, 4, 5, 5, 6)]
    assert row and all(s.location == (50.0, 40.0, 30.0, 20.0, 10.0) for s in row)
    t1 = sim.builtin_scenarios(tables={"table1"})
    assert len(t1) == 36 and {s.k for s in t1} == {3} and {s.family for s in t1} == {"normal"}


def test_scenario_validation():
    with pytest.raises(sim.ScenarioError):
        small(family="gamma")
    with pytest.raises(sim.ScenarioError):
        small(n=(4, 1, 4))
    with pytest.raises(sim.ScenarioError):
        small(tau=1.5)
    with pytest.raises(sim.ScenarioError):
        small(methods=("XYZ",))
    assert issubclass(sim.ScenarioError, errors.DataError)


def test_generation_is_deterministic():
    sc = small()
    a, b = sim.generate_replication(sc, 5), sim.generate_replication(sc, 5)
    for x, y in zip(a.raw, b.raw):
        assert np.array_equal(x, y)
    c = sim.generate_replication(sc, 6)
    assert not np.array_equal(a.raw[0], c.raw[0])
    # the seed changes the data, the method list does not
    assert np.array_equal(sim.generate_replication(sc.with_(methods=("SLR",)), 5).raw[0], a.raw[0])
    assert not np.array_equal(sim.generate_replication(sc.with_(master_seed=4), 5).raw[0],
                              a.raw[0])


def test_weibull_generation_has_requested_cv():
    sc = small(family="weibull", tau=0.2, n=(10 ** 6,) * 3)
    data = sim.generate_replication(sc, 0)
    for x in data.raw:
        assert abs(x.std() / x.mean() - 0.2) < 1e-3


def test_replication_matches_direct_calls():
    sc = small()
    out, redraws = sim.run_replication(sc, 2)
    data = sim.generate_replication(sc, 2)
    ci = mslr.ci_mslr(data, 0.95)
    assert out["MSLR"] == (ci.lower, ci.upper)
    assert redraws == 0


def test_tally_by_hand():
    sc = small(tau=0.1, methods=("MSLR",))
    outcomes = [({"MSLR": (0.05, 0.15)}, 0), ({"MSLR": (0.11, 0.2)}, 1), ({"MSLR": None}, 0),
                ({"MSLR": (0.0, 0.1)}, 0)]
    st = sim._tally(sc, outcomes).stats["MSLR"]
    assert st.used == 3 and st.failures == 1
    assert_allclose(st.coverage, 2 / 3)
    assert_allclose(st.expected_length, (0.1 + 0.09 + 0.1) / 3)
    assert sim._tally(sc, outcomes).redraws == 1


def test_failures_are_counted(monkeypatch):
    real = mslr.ci_mslr

    def sometimes(data, level, fit):
        if data.raw[0][0] > 20:
            raise errors.BracketingFailed("forced", searched=(0.0, 1.0))
        return real(data, level, fit)

    monkeypatch.setattr(mslr, "ci_mslr", sometimes)
    sc = small(methods=("MSLR", "SLR"))
    res = sim.run_study(sc)
    expected = sum(sim.generate_replication(sc, r).raw[0][0] > 20 for r in range(sc.reps))
    assert 0 < expected < sc.reps
    assert res.stats["MSLR"].failures == expected
    assert res.stats["MSLR"].used == sc.reps - expected
    assert res.stats["SLR"].failures == 0


def test_parallel_determinism():
    scs = [small(), small(family="weibull", tau=0.3)]
    one = sim.emit_table([(s, sim.run_study(s, threads=1)) for s in scs])
    eight = sim.emit_table([(s, sim.run_study(s, threads=8)) for s in scs])
    assert one.encode() == eight.encode()


def test_csv_output():
    assert sim.emit_table([]) == ",".join(sim.CSV_COLUMNS) + "\n"
    sc = small(methods=("MSLR", "GV2"), reps=5)
    text = sim.emit_table([(sc, sim.run_study(sc))])
    lines = text.splitlines()
    assert len(lines) == 3
    assert lines[1].startswith('normal,3,"4,4,4",0.1,MSLR,')
    row = next(csv.reader([lines[2]]))
    assert row[2] == "4,4,4" and row[4] == "GV2"


def test_markdown_layout():
    sc1, sc2 = small(reps=4), small(reps=4, n=(4, 5, 6))
    md = sim.emit_table([(s, sim.run_study(s)) for s in (sc1, sc2)], "markdown")
    kinds = [("CP" if "| CP |" in l else "EL") for l in md.splitlines()
             if "| CP |" in l or "| EL |" in l]
    assert kinds == ["CP", "EL", "CP", "EL"]
    assert "| 4,4,4 | CP |" in md and "| 4,5,6 | CP |" in md


def test_scenario_json_roundtrip(tmp_path):
    scs = [small(), small(family="weibull", tau=0.35)]
    p = tmp_path / "s.json"
    p.write_text(sim.dump_scenarios(scs))
    back = sim.load_scenarios(p)
    assert back == scs
    doc = {"schema_version": 1, "defaults": {"reps": 7, "location": [1, 2]},
           "scenarios": [{"family": "normal", "n": [3, 3], "tau": 0.2}]}
    (sc,) = sim.load_scenarios(io.StringIO(json.dumps(doc)))
    assert sc.reps == 7 and sc.location == (1.0, 2.0)


@pytest.mark.parametrize("doc", [
    "not json",
    json.dumps([1, 2]),
    json.dumps({"schema_version": 2, "scenarios": []}),
    json.dumps({"schema_version": 1, "scenarios": [{"family": "normal"}]}),
    json.dumps({"schema_version": 1, "scenarios": [{"family": "normal", "n": [3], "location": [1],
                                                    "tau": 0.1, "colour": "red"}]}),
])
def test_scenario_schema_errors(doc):
    with pytest.raises(sim.ScenarioError):
        sim.load_scenarios(io.StringIO(doc))
