"""Tests for the plandiv command line."""

import json
import logging
import shutil

import pytest

from plandiv.cli import expand_plan_paths, main, parse_weights

from tests.conftest import fixture_path

DEPOTS = ["--domain", str(fixture_path("depots", "domain.pddl")),
          "--problem", str(fixture_path("depots", "pfile1.pddl"))]
ROVER = ["--domain", str(fixture_path("rover", "domain.pddl")),
         "--problem", str(fixture_path("rover", "problem.pddl"))]
SYMMETRIC = ["--domain", str(fixture_path("logistics", "domain.pddl")),
             "--problem", str(fixture_path("logistics", "symmetric.pddl"))]
ROVER_PLANS = str(fixture_path("rover", "plans"))
SYMMETRIC_PLANS = str(fixture_path("logistics", "plans"))


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def run(capsys, *argv):
    status = main(list(argv))
    captured = capsys.readouterr()
    return status, captured.out, captured.err


def test_identical_plans_score(tmp_path, capsys):
    source = fixture_path("depots", "plans", "truck1-tour.plan")
    for name in ("a.plan", "b.plan"):
        shutil.copy(source, tmp_path / name)
    status, out, _ = run(capsys, "score", *DEPOTS, "--plans", str(tmp_path), "--metrics", "a")
    assert status == 0
    report = json.loads(out)
    assert report["schema"] == 1
    assert report["plans"] == ["a", "b"]
    assert report["metrics"]["actions"]["matrix"] == [[1, 1], [1, 1]]
    assert "timings_ms" not in report["metrics"]["actions"]
    assert report["diversity"] == {"average": 0.0}


def test_invalid_plan_names_file_and_step(capsys):
    status, out, err = run(capsys, "score", *DEPOTS, "--plans", str(fixture_path("depots", "plans")))
    assert status == 1
    assert out == ""
    assert "broken.plan" in err
    assert "step 2" in err


def test_rover_metrics_with_timing(capsys):
    status, out, _ = run(capsys, "score", *ROVER, "--plans", ROVER_PLANS, "--metrics", "flex,sgo", "--timing")
    assert status == 0
    report = json.loads(out)
    assert list(report["metrics"]) == ["flex", "sgo"]
    assert report["metrics"]["sgo"]["matrix"] == [[1, 0.5], [0.5, 1]]
    # 7 and 6 partial-order blocks, 4 of them shared
    assert report["metrics"]["flex"]["matrix"][0][1] == pytest.approx(0.444444)
    assert report["metrics"]["flex"]["matrix"][1][0] == pytest.approx(0.444444)
    timings = report["metrics"]["flex"]["timings_ms"]
    assert len(timings) == 2 and all(value >= 0 for row in timings for value in row)


def test_weighted_aggregate(capsys):
    status, out, _ = run(capsys, "score", *SYMMETRIC, "--plans", SYMMETRIC_PLANS,
                         "--weights", "sgo=0.5", "actions=0.5", "--select-k", "2")
    assert status == 0
    report = json.loads(out)
    assert list(report["metrics"]) == ["sgo", "actions", "aggregate"]
    assert report["metrics"]["aggregate"]["weights"] == {"sgo": 0.5, "actions": 0.5}
    # labels sort as p1-first, truck-a, truck-b
    assert report["plans"] == ["p1-first", "truck-a", "truck-b"]
    assert report["metrics"]["aggregate"]["matrix"][1][2] == pytest.approx(0.666667)
    assert report["selection"]["metric"] == "aggregate"
    assert report["selection"]["k"] == 2


def test_csv_score(tmp_path, capsys):
    status, out, _ = run(capsys, "score", *ROVER, "--plans", ROVER_PLANS, "--metrics", "sgo", "--format", "csv")
    assert status == 0
    assert out.startswith(
        "# metric: sgo\n"
        "plan,rover-a,rover-b\n"
        "rover-a,1.000000,0.500000\n"
        "rover-b,0.500000,1.000000\n"
    )
    assert "# diversity: average\n0.500000\n" in out


def test_output_is_byte_stable(capsys):
    argv = ["score", *SYMMETRIC, "--plans", SYMMETRIC_PLANS, "--metrics", "actions", "states", "causal", "uniqueness"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv, "--workers", "3")
    assert first == second


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out" / "report.json"
    status, out, _ = run(capsys, "score", *ROVER, "--plans", ROVER_PLANS, "--output", str(target))
    assert status == 0
    assert out == ""
    assert json.loads(target.read_text())["plans"] == ["rover-a", "rover-b"]


def test_select(capsys):
    status, out, _ = run(capsys, "select", *SYMMETRIC, "--plans", SYMMETRIC_PLANS, "--metrics", "sgo", "-k", "2")
    assert status == 0
    report = json.loads(out)
    assert report["selection"]["selected"] == ["p1-first", "truck-a"]
    assert report["selection"]["score"] == pytest.approx(0.333333)
    assert report["metrics"]["sgo"]["matrix"][1][2] == 1


def test_select_all_and_one(capsys):
    _, out, _ = run(capsys, "select", *SYMMETRIC, "--plans", SYMMETRIC_PLANS, "--metrics", "sgo", "-k", "3")
    assert sorted(json.loads(out)["selection"]["selected"]) == ["p1-first", "truck-a", "truck-b"]
    _, out, _ = run(capsys, "select", *SYMMETRIC, "--plans", SYMMETRIC_PLANS, "--metrics", "sgo", "-k", "1")
    assert json.loads(out)["selection"]["selected"] == ["p1-first"]


def test_select_k_out_of_range(capsys):
    status, _, err = run(capsys, "select", *SYMMETRIC, "--plans", SYMMETRIC_PLANS, "-k", "4")
    assert status == 1
    assert "k must be between 1 and 3" in err
    status, _, _ = run(capsys, "select", *SYMMETRIC, "--plans", SYMMETRIC_PLANS, "-k", "0")
    assert status == 2


def test_select_needs_one_metric_or_weights(capsys):
    status, _, err = run(capsys, "select", *SYMMETRIC, "--plans", SYMMETRIC_PLANS, "--metrics", "sgo", "actions", "-k", "2")
    assert status == 2
    assert "--weights" in err
    status, out, _ = run(capsys, "select", *SYMMETRIC, "--plans", SYMMETRIC_PLANS, "--metrics", "sgo", "actions",
                         "--weights", "sgo=1", "actions=1", "-k", "2")
    assert status == 0
    assert json.loads(out)["selection"]["metric"] == "aggregate"


def test_trace(capsys):
    status, out, _ = run(capsys, "trace", *ROVER, "--plans", ROVER_PLANS)
    assert status == 0
    report = json.loads(out)
    assert report["traces"] == {"rover-a": "XXBXXXXAXC", "rover-b": "XXXCBXXXXA"}
    assert report["alphabet"]["C"] == "(have-image rover0 obj0)"


def test_trace_csv(capsys):
    _, out, _ = run(capsys, "trace", *ROVER, "--plans", ROVER_PLANS, "--format", "csv")
    assert out.startswith("# A = (communicated-soil)\n")
    assert "rover-a,XXBXXXXAXC\n" in out


def test_empty_plan_trace(tmp_path, capsys):
    problem = tmp_path / "already-on.pddl"
    problem.write_text("(define (problem already-on) (:domain switches)\n"
                       "  (:objects s1 s2 - switch) (:init (on s2)) (:goal (and (on s2))))\n")
    (tmp_path / "empty.plan").write_text("; cost = 0 (unit cost)\n")
    status, out, _ = run(capsys, "trace", "--domain", str(fixture_path("switches", "domain.pddl")),
                         "--problem", str(problem), "--plans", str(tmp_path / "empty.plan"))
    assert status == 0
    assert json.loads(out)["traces"] == {"empty": ""}


def test_validate(capsys):
    status, out, err = run(capsys, "validate", *DEPOTS, "--plans", str(fixture_path("depots", "plans")))
    assert status == 1
    report = json.loads(out)
    assert report["valid"] is False
    assert report["plans"]["broken"]["failing_step"] == 2
    assert report["plans"]["truck1-tour"]["valid"] is True
    assert "error: broken: step 2: load(hoist0,crate1,truck1,depot0)" in err


def test_validate_all_valid(capsys):
    status, out, err = run(capsys, "validate", *ROVER, "--plans", ROVER_PLANS)
    assert status == 0
    assert json.loads(out)["valid"] is True
    assert "error" not in err


def test_compare(capsys):
    status, out, _ = run(capsys, "compare", *ROVER, "--plans", ROVER_PLANS)
    assert status == 0
    rows = json.loads(out)["rows"]
    assert {row["metric"] for row in rows} == {"actions", "states", "causal", "uniqueness", "flex", "sgo"}
    similarities = [row["similarity"] for row in rows]
    assert similarities == sorted(similarities, reverse=True)
    sgo = next(row for row in rows if row["metric"] == "sgo")
    assert sgo["exact"] == "1/2"


def test_compare_needs_two_plans(capsys):
    status, _, err = run(capsys, "compare", *SYMMETRIC, "--plans", SYMMETRIC_PLANS)
    assert status == 1
    assert "exactly 2 plans" in err


def test_usage_errors(capsys):
    status, _, err = run(capsys, "score", *ROVER, "--plans", ROVER_PLANS, "--metrics", "landmarks")
    assert status == 2
    assert "landmarks" in err
    status, _, err = run(capsys, "score", *ROVER, "--plans", ROVER_PLANS, "--metrics", "sgo", "--weights", "actions=1")
    assert status == 2
    assert "not requested" in err
    status, _, _ = run(capsys, "score", *ROVER, "--plans", ROVER_PLANS, "--weights", "sgo")
    assert status == 2
    for weight in ("sgo=nan", "sgo=inf"):
        status, _, err = run(capsys, "score", *ROVER, "--plans", ROVER_PLANS, "--metrics", "sgo", "--weights", weight)
        assert status == 2
        assert "finite" in err
    with pytest.raises(SystemExit) as info:
        main(["score", "--plans", ROVER_PLANS])
    assert info.value.code == 2


def test_missing_file(capsys):
    status, _, err = run(capsys, "score", "--domain", "missing.pddl", "--problem", "missing.pddl",
                         "--plans", ROVER_PLANS)
    assert status == 1
    assert "missing.pddl" in err


def test_parse_helpers(tmp_path):
    assert parse_weights(["sgo=0.5,flex=1", "actions=2"]) == {"sgo": 0.5, "flex": 1.0, "actions": 2.0}
    assert parse_weights(None) is None
    with pytest.raises(ValueError):
        parse_weights(["sgo=high"])
    for name in ("b.plan", "a.plan", ".hidden"):
        (tmp_path / name).write_text("")
    paths = expand_plan_paths([str(tmp_path), str(tmp_path / "*.plan")])
    assert [path.name for path in paths] == ["a.plan", "b.plan"]
