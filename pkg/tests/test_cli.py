import json
import os
import signal
import socket
import subprocess
import sys

import pytest

from conftest import minimal_doc_text
from flatpack.cli import main
from flatpack.model import serialize_model, load_bundled


def run_main(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestValidate:
    def test_bundled_block_path(self, capsys, tmp_path):
        path = tmp_path / "block.furn.json"
        path.write_text(serialize_model(load_bundled("block")))
        code, out, _ = run_main(["validate", str(path)], capsys)
        assert code == 0
        assert "ok" in out

    def test_non_involutive_fixture(self, capsys, tmp_path):
        doc = json.loads(minimal_doc_text())
        doc["parts"][1]["connectors"][0]["mate"] = "a.nothere"
        path = tmp_path / "bad.furn.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run_main(["validate", str(path)], capsys)
        assert code == 1
        assert "non-involutive" in out or "unknown-mate" in out

    def test_missing_file_exit_2(self, capsys):
        code, _, err = run_main(["validate", "/no/such/file.furn.json"], capsys)
        assert code == 2

    def test_parse_error_exit_1(self, capsys, tmp_path):
        path = tmp_path / "broken.furn.json"
        path.write_text("{nope")
        code, out, _ = run_main(["validate", str(path)], capsys)
        assert code == 1
        assert "syntax" in out

    def test_json_output(self, capsys, tmp_path):
        path = tmp_path / "block.furn.json"
        path.write_text(serialize_model(load_bundled("block")))
        code, out, _ = run_main(["validate", str(path), "--json"], capsys)
        doc = json.loads(out)
        assert doc["ok"] is True and doc["errors"] == []


class TestRun:
    def test_oracle_block_five_episodes(self, capsys):
        code, out, _ = run_main(
            ["run", "--model", "block", "--policy", "oracle", "--episodes", "5", "--seed", "0"],
            capsys,
        )
        assert code == 0
        assert "success_rate=1.0" in out
        assert out.count("seed=") == 5

    def test_random_policy_reports_rate(self, capsys):
        code, out, _ = run_main(
            ["run", "--model", "block", "--policy", "random", "--episodes", "2", "--seed", "0"],
            capsys,
        )
        assert code == 0
        assert "success_rate=" in out

    def test_zero_episodes_exit_2(self, capsys):
        code, _, err = run_main(["run", "--model", "block", "--episodes", "0"], capsys)
        assert code == 2

    def test_json_schema(self, capsys):
        code, out, _ = run_main(
            ["run", "--model", "block", "--episodes", "2", "--seed", "3", "--json"], capsys
        )
        doc = json.loads(out)
        assert doc["success_rate"] == 1.0
        assert [e["seed"] for e in doc["episodes"]] == [3, 4]
        assert all(set(e) == {"seed", "success", "steps", "return"} for e in doc["episodes"])

    def test_record_then_replay(self, capsys, tmp_path):
        rec = str(tmp_path / "out")
        code, _, _ = run_main(
            ["run", "--model", "block", "--episodes", "2", "--seed", "7", "--record", rec], capsys
        )
        assert code == 0
        files = sorted(os.listdir(rec))
        assert files == ["block_seed7.traj.jsonl", "block_seed8.traj.jsonl"]
        for f in files:
            code, out, _ = run_main(["replay", os.path.join(rec, f)], capsys)
            assert code == 0 and "replay ok" in out

    def test_unknown_model_exit_1(self, capsys):
        code, _, err = run_main(["run", "--model", "ghost", "--episodes", "1"], capsys)
        assert code == 1


class TestReplay:
    def test_missing_file_exit_2(self, capsys):
        code, _, _ = run_main(["replay", "/no/such/file"], capsys)
        assert code == 2

    def test_corrupted_digest_exit_1(self, capsys, tmp_path):
        rec = str(tmp_path / "rec")
        run_main(["run", "--model", "block", "--episodes", "1", "--seed", "1",
                  "--record", rec], capsys)
        path = os.path.join(rec, "block_seed1.traj.jsonl")
        lines = open(path).read().splitlines()
        step = json.loads(lines[3])
        step["digest"] = ("f" if step["digest"][0] != "f" else "0") + step["digest"][1:]
        lines[3] = json.dumps(step)
        open(path, "w").write("\n".join(lines) + "\n")
        code, out, _ = run_main(["replay", path], capsys)
        assert code == 1
        assert "diverged at step 2" in out

    def test_truncated_file_exit_1(self, capsys, tmp_path):
        rec = str(tmp_path / "rec")
        run_main(["run", "--model", "block", "--episodes", "1", "--seed", "1",
                  "--record", rec], capsys)
        path = os.path.join(rec, "block_seed1.traj.jsonl")
        raw = open(path).read()
        open(path, "w").write(raw[: len(raw) // 2].rsplit("\n", 1)[0][:-8])
        code, out, _ = run_main(["replay", path], capsys)
        assert code == 1
        assert "cannot replay" in out

    def test_json_output(self, capsys, tmp_path):
        rec = str(tmp_path / "rec")
        run_main(["run", "--model", "block", "--episodes", "1", "--seed", "2",
                  "--record", rec], capsys)
        code, out, _ = run_main(
            ["replay", os.path.join(rec, "block_seed2.traj.jsonl"), "--json"], capsys
        )
        assert code == 0
        assert json.loads(out) == {"ok": True, "divergence": None}


class TestServe:
    def test_port_zero_prints_assigned_port(self, tmp_path):
        proc = subprocess.Popen(
            [sys.executable, "-m", "flatpack.cli", "serve", "--port", "0", "--json"],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        try:
            line = proc.stdout.readline()
            info = json.loads(line)
            assert info["port"] > 0
            # The advertised port accepts connections.
            with socket.create_connection(("127.0.0.1", info["port"]), timeout=5):
                pass
        finally:
            proc.send_signal(signal.SIGINT)
            proc.wait(timeout=10)

    def test_occupied_port_exit_1(self):
        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        try:
            proc = subprocess.run(
                [sys.executable, "-m", "flatpack.cli", "serve", "--port", str(port)],
                capture_output=True,
                text=True,
                timeout=30,
            )
            assert proc.returncode == 1
            assert "cannot bind" in proc.stderr
        finally:
            blocker.close()

    def test_ui_dir_missing_index(self, capsys, tmp_path):
        code, _, err = run_main(["serve", "--ui", str(tmp_path), "--port", "0"], capsys)
        assert code == 1
        assert "index.html" in err


class TestUsage:
    def test_no_subcommand_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_bad_policy_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--model", "block", "--policy", "psychic"])
        assert exc.value.code == 2
