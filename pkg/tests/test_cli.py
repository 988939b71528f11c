import json

import pytest

from devmux.cli import cli_main

GOOD_LAYOUT = """
<Layout>
  <TextView id="B"/>
  <Button id="A" layout_centeredBelow="B" onClick="onBuy"/>
</Layout>
"""

BAD_LAYOUT = '<Layout><Button id="A"/></Layout>'


def write_sources(root, count, prefix="f"):
    for i in range(count):
        (root / f"{prefix}{i:03d}.java").write_text(
            f"class C{i} {{ void run{i}() {{ helper{i % 7}(); }} void helper{i % 7}() {{ }} }}"
        )


class TestRoute:
    def test_low_cpu_good_prints_edge(self, capsys):
        code = cli_main(
            ["route", "--complexity", "low", "--device", "cpu", "--network", "good", "--battery", "ok"]
        )
        out = capsys.readouterr().out.splitlines()
        assert code == 0
        assert out[0] == "edge"
        assert out[1].startswith("latency_ms=300.0")

    def test_high_cpu_good_prints_cloud(self, capsys):
        code = cli_main(
            ["route", "--complexity", "high", "--device", "cpu", "--network", "good", "--battery", "ok"]
        )
        out = capsys.readouterr().out.splitlines()
        assert code == 0
        assert out[0] == "cloud"
        assert "latency_ms=3000.0" in out[1]

    def test_offline_prints_edge(self, capsys):
        code = cli_main(
            ["route", "--complexity", "high", "--device", "gpu", "--network", "offline", "--battery", "ok"]
        )
        assert code == 0
        assert capsys.readouterr().out.splitlines()[0] == "edge"

    def test_bad_enum_is_usage_error(self, capsys):
        code = cli_main(
            ["route", "--complexity", "huge", "--device", "cpu", "--network", "good", "--battery", "ok"]
        )
        capsys.readouterr()
        assert code == 2

    def test_policy_file_round_trip(self, tmp_path, capsys):
        policy_path = tmp_path / "policy.json"
        args = ["route", "--complexity", "low", "--device", "cpu", "--network", "good",
                "--battery", "ok", "--policy", str(policy_path)]
        assert cli_main(args) == 0
        assert policy_path.exists()
        first = capsys.readouterr().out
        assert cli_main(args) == 0  # second run loads the saved policy
        assert capsys.readouterr().out == first


class TestDescribeLayout:
    def test_clean_layout_exit_zero(self, tmp_path, capsys):
        path = tmp_path / "layout.xml"
        path.write_text(GOOD_LAYOUT)
        code = cli_main(["describe-layout", str(path)])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["statements"] == ["Button A is centered below TextView B"]
        assert payload["findings"] == []

    def test_findings_exit_one(self, tmp_path, capsys):
        path = tmp_path / "layout.xml"
        path.write_text(BAD_LAYOUT)
        code = cli_main(["describe-layout", str(path)])
        payload = json.loads(capsys.readouterr().out)
        assert code == 1
        assert payload["findings"][0]["kind"] == "missing_click_handler"

    def test_parse_error_exit_two(self, tmp_path, capsys):
        path = tmp_path / "layout.xml"
        path.write_text("<Layout><oops</Layout>")
        code = cli_main(["describe-layout", str(path)])
        capsys.readouterr()
        assert code == 2

    def test_missing_file_exit_three(self, capsys):
        code = cli_main(["describe-layout", "no-such-file.xml"])
        capsys.readouterr()
        assert code == 3


class TestIndexAndQuery:
    def test_index_under_cap(self, tmp_path, capsys):
        src = tmp_path / "src"
        src.mkdir()
        write_sources(src, 20)
        out = tmp_path / "index.bin"
        code = cli_main(["index", str(src), "--out", str(out)])
        captured = capsys.readouterr()
        payload = json.loads(captured.out)
        assert code == 0
        assert payload["indexed"] == 20
        assert payload["skipped_over_cap"] == 0
        assert out.exists()

    def test_index_default_cap_500_warns_and_lists(self, tmp_path, capsys):
        src = tmp_path / "src"
        src.mkdir()
        write_sources(src, 600)
        out = tmp_path / "index.bin"
        code = cli_main(["index", str(src), "--out", str(out)])
        captured = capsys.readouterr()
        payload = json.loads(captured.out)
        assert code == 1  # degraded: files were skipped
        assert payload["indexed"] == 500
        assert payload["skipped_over_cap"] == 100
        assert "file cap 500 reached; skipped 100 files" in captured.err
        assert "f599.java" in captured.err

    def test_index_parse_failure_warns(self, tmp_path, capsys):
        src = tmp_path / "src"
        src.mkdir()
        write_sources(src, 3)
        (src / "broken.java").write_text("class { {")
        out = tmp_path / "index.bin"
        code = cli_main(["index", str(src), "--out", str(out)])
        captured = capsys.readouterr()
        payload = json.loads(captured.out)
        assert code == 1
        assert payload["parse_failures"] == 1
        assert payload["indexed"] == 3
        assert "broken.java" in captured.err

    def test_query_returns_fused_bundle(self, tmp_path, capsys):
        src = tmp_path / "src"
        src.mkdir()
        write_sources(src, 12)
        (src / "special.java").write_text(
            "class PaymentGateway { void charge() { validate(); } void validate() { } }"
        )
        out = tmp_path / "index.bin"
        assert cli_main(["index", str(src), "--out", str(out)]) == 0
        capsys.readouterr()

        code = cli_main(
            ["query", "PaymentGateway charge validate", "--index", str(out),
             "--top-k", "5", "--budget", "2048", "--source-root", str(src)]
        )
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["entries"]
        assert payload["entries"][0]["text"].startswith("special.java")
        assert payload["total_tokens"] <= 2048
        weights = [e["weight"] for e in payload["entries"]]
        assert weights == sorted(weights, reverse=True)
        assert all(e["source"] == "code_context" for e in payload["entries"])

    def test_query_missing_index_exit_three(self, capsys):
        code = cli_main(["query", "anything", "--index", "missing.bin"])
        capsys.readouterr()
        assert code == 3


class TestSimulateAndCompare:
    def test_simulate_byte_identical_reports(self, tmp_path, capsys):
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        assert cli_main(["simulate", "--seed", "42", "--n-tasks", "300", "--out", str(out_a)]) == 0
        assert cli_main(["simulate", "--seed", "42", "--n-tasks", "300", "--out", str(out_b)]) == 0
        capsys.readouterr()
        assert out_a.read_bytes() == out_b.read_bytes()
        payload = json.loads(out_a.read_text())
        assert payload["policy"] == "mdp"
        assert payload["metrics"]["n_tasks"] == 300

    def test_simulate_events_log(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        events = tmp_path / "events.jsonl"
        code = cli_main(
            ["simulate", "--seed", "7", "--n-tasks", "50", "--out", str(out), "--events", str(events)]
        )
        capsys.readouterr()
        assert code == 0
        lines = events.read_text().strip().splitlines()
        assert len(lines) == 50
        assert json.loads(lines[0])["task_id"] == 0

    def test_compare_writes_json_and_csv(self, tmp_path, capsys):
        out = tmp_path / "comparison.json"
        csv_path = tmp_path / "comparison.csv"
        code = cli_main(
            ["compare", "--seed", "42", "--out", str(out), "--csv", str(csv_path)]
        )
        capsys.readouterr()
        assert code == 0
        payload = json.loads(out.read_text())
        assert set(payload["reports"]) == {"all_cloud", "all_edge", "threshold", "mdp"}
        assert payload["baseline"] == "all_cloud"
        assert payload["deltas"]["all_cloud"]["cloud_call_fraction"] == 0.0
        rows = csv_path.read_text().strip().splitlines()
        assert len(rows) == 5  # header + one row per policy

    def test_config_file_drives_simulation(self, tmp_path, capsys):
        config = tmp_path / "config.yaml"
        config.write_text("simulate:\n  n_tasks: 25\n  seed: 3\n  policy: all_edge\n")
        out = tmp_path / "report.json"
        code = cli_main(["simulate", "--config", str(config), "--out", str(out)])
        capsys.readouterr()
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["policy"] == "all_edge"
        assert payload["n_tasks"] == 25
        assert payload["metrics"]["cloud_call_fraction"] == 0.0

    def test_bad_config_exit_two(self, tmp_path, capsys):
        config = tmp_path / "config.yaml"
        config.write_text("router:\n  w_latencee: 1\n")
        code = cli_main(["simulate", "--config", str(config), "--out", str(tmp_path / "r.json")])
        capsys.readouterr()
        assert code == 2

    def test_missing_config_exit_three(self, tmp_path, capsys):
        code = cli_main(["simulate", "--config", str(tmp_path / "nope.yaml")])
        capsys.readouterr()
        assert code == 3


def test_usage_error_exit_two(capsys):
    assert cli_main(["route"]) == 2
    capsys.readouterr()


def test_unknown_command_exit_two(capsys):
    assert cli_main(["frobnicate"]) == 2
    capsys.readouterr()
