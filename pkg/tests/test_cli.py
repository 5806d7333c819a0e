from __future__ import annotations

import io
import json

import pytest

from conftest import FIXTURE_DOCUMENT
from factlab.cli import main
from factlab.response import evaluate_response
from factlab.pipeline import load_pipeline_config_file
from helpers import gold_record, question_record, write_csv, write_factbench_manifest, write_factqa_manifest


def run_cli(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- check -------------------------------------------------------


def test_check_text_outputs_report(capsys, offline_config_path):
    code, out, err = run_cli(
        capsys,
        "check",
        "--text",
        FIXTURE_DOCUMENT,
        "--config",
        str(offline_config_path),
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["credibility"] == pytest.approx(0.5)
    assert payload["overall"] == "false"


def test_check_rejects_both_text_and_file(capsys, offline_config_path, tmp_path):
    doc = tmp_path / "doc.txt"
    doc.write_text("Some text.", encoding="utf-8")
    with pytest.raises(SystemExit) as excinfo:
        main(
            [
                "check",
                "--text",
                "x",
                "--file",
                str(doc),
                "--config",
                str(offline_config_path),
            ]
        )
    assert excinfo.value.code == 2


def test_check_requires_a_source(capsys, offline_config_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["check", "--config", str(offline_config_path)])
    assert excinfo.value.code == 2


def test_check_missing_config_exits_2(capsys):
    code, _, err = run_cli(
        capsys, "check", "--text", "x", "--config", "/nope/missing.yaml"
    )
    assert code == 2
    assert "error:" in err


def test_check_file_input(capsys, offline_config_path, tmp_path):
    doc = tmp_path / "doc.txt"
    doc.write_text(FIXTURE_DOCUMENT, encoding="utf-8")
    code, out, _ = run_cli(
        capsys, "check", "--file", str(doc), "--config", str(offline_config_path)
    )
    assert code == 0
    assert json.loads(out)["overall"] == "false"


def test_check_solver_failure_exits_1(
    capsys, fixture_dir, corpus_path, web_cache_dir, decomposer_responses_path
):
    from conftest import make_combo_config

    missing = fixture_dir / "empty_responses.json"
    missing.write_text("{}", encoding="utf-8")
    yaml_text = make_combo_config(
        "rule_splitter",
        "bm25_retriever",
        "llm_verifier",
        corpus_path,
        web_cache_dir,
        decomposer_responses_path,
        missing,
    )
    config_path = fixture_dir / "exploding_cli.yaml"
    config_path.write_text(yaml_text, encoding="utf-8")
    code, out, err = run_cli(
        capsys, "check", "--text", FIXTURE_DOCUMENT, "--config", str(config_path)
    )
    assert code == 1
    assert "llm_verifier" in err


def test_check_start_step_with_piped_claims(
    capsys, monkeypatch, offline_config_path
):
    config = load_pipeline_config_file(offline_config_path)
    full = evaluate_response(FIXTURE_DOCUMENT, config)
    claims_json = json.dumps([c.claim.to_dict() for c in full.claims])
    monkeypatch.setattr("sys.stdin", io.StringIO(claims_json))
    code, out, _ = run_cli(
        capsys,
        "check",
        "--text",
        FIXTURE_DOCUMENT,
        "--config",
        str(offline_config_path),
        "--start-step",
        "retriever",
    )
    assert code == 0
    payload = json.loads(out)
    full_labels = [c.verdict.label.value for c in full.claims]
    piped_labels = [c["verdict"]["label"] for c in payload["claims"]]
    assert piped_labels == full_labels
    assert payload["credibility"] == pytest.approx(full.credibility)


def test_check_pretty_goes_to_stderr(capsys, offline_config_path):
    code, out, err = run_cli(
        capsys,
        "check",
        "--text",
        FIXTURE_DOCUMENT,
        "--config",
        str(offline_config_path),
        "--pretty",
    )
    assert code == 0
    json.loads(out)  # stdout stays pure JSON
    assert "overall" in err


# --- llm-eval -------------------------------------------------------


@pytest.fixture
def llm_eval_files(tmp_path, offline_config_path, fixture_dir):
    records = [
        question_record("s1", "snowballing", gold_answer="yes"),
        question_record("f1", "freshqa"),
        question_record("q1", "factoolqa"),
    ]
    manifest = write_factqa_manifest(tmp_path / "factqa.jsonl", records)
    responses = write_csv(
        tmp_path / "responses.csv",
        ["question_id", "response"],
        [["s1", "Yes."], ["f1", "some answer"], ["q1", FIXTURE_DOCUMENT]],
    )
    judge = tmp_path / "judge.json"
    judge.write_text(json.dumps({"default": "correct"}), encoding="utf-8")
    return manifest, responses, judge


def test_llm_eval_writes_report(capsys, tmp_path, llm_eval_files, offline_config_path):
    manifest, responses, judge = llm_eval_files
    out_path = tmp_path / "report.json"
    code, out, err = run_cli(
        capsys,
        "llm-eval",
        "--model",
        "fixture-model",
        "--input",
        str(responses),
        "--manifest",
        str(manifest),
        "--out",
        str(out_path),
        "--checker-config",
        str(offline_config_path),
        "--judge",
        f"mock:{judge}",
        "--no-timing",
        "--pretty",
    )
    assert code == 0
    payload = json.loads(out)
    assert len(payload["subsets"]) == 7
    assert payload["subsets"]["snowballing"]["accuracy"] == 1.0
    assert payload["subsets"]["freshqa"]["accuracy"] == 1.0
    assert payload["subsets"]["factoolqa"]["accuracy"] == 0.5
    # --out content is byte-identical to stdout
    assert out_path.read_text(encoding="utf-8") == out
    assert "fixture-model" in err


def test_llm_eval_rerun_is_byte_identical(
    capsys, tmp_path, llm_eval_files, offline_config_path
):
    manifest, responses, judge = llm_eval_files
    argv = [
        "llm-eval",
        "--model",
        "m",
        "--input",
        str(responses),
        "--manifest",
        str(manifest),
        "--checker-config",
        str(offline_config_path),
        "--judge",
        f"mock:{judge}",
        "--no-timing",
    ]
    code1, out1, _ = run_cli(capsys, *argv)
    code2, out2, _ = run_cli(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2


def test_llm_eval_missing_manifest_exits_2(capsys, tmp_path):
    responses = write_csv(
        tmp_path / "r.csv", ["question_id", "response"], [["x", "y"]]
    )
    code, _, err = run_cli(
        capsys,
        "llm-eval",
        "--model",
        "m",
        "--input",
        str(responses),
        "--manifest",
        str(tmp_path / "missing.jsonl"),
    )
    assert code == 2
    assert "error:" in err


def test_llm_eval_nothing_evaluable_exits_1(capsys, tmp_path):
    records = [question_record("f1", "freshqa")]
    manifest = write_factqa_manifest(tmp_path / "m.jsonl", records)
    responses = write_csv(
        tmp_path / "r.csv", ["question_id", "response"], [["f1", "answer"]]
    )
    code, _, err = run_cli(
        capsys,
        "llm-eval",
        "--model",
        "m",
        "--input",
        str(responses),
        "--manifest",
        str(manifest),
    )
    assert code == 1


# --- checker-eval -------------------------------------------------------


@pytest.fixture
def checker_files(tmp_path):
    gold = write_factbench_manifest(
        tmp_path / "gold.jsonl",
        [
            gold_record("g1", "factool-qa", "true"),
            gold_record("g2", "factool-qa", "true"),
            gold_record("g3", "factool-qa", "false"),
            gold_record("g4", "factool-qa", "false"),
        ],
    )
    return gold


def test_checker_eval_perfect(capsys, tmp_path, checker_files):
    verdicts = write_csv(
        tmp_path / "v.csv",
        ["claim_id", "verdict"],
        [["g1", "true"], ["g2", "true"], ["g3", "false"], ["g4", "false"]],
    )
    code, out, _ = run_cli(
        capsys,
        "checker-eval",
        "--input",
        str(verdicts),
        "--gold",
        str(checker_files),
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["accuracy"] == 1.0
    assert payload["true"]["f1"] == 1.0
    assert payload["false"]["f1"] == 1.0


def test_checker_eval_hand_fixture(capsys, tmp_path, checker_files):
    verdicts = write_csv(
        tmp_path / "v.csv",
        ["claim_id", "verdict"],
        [["g1", "true"], ["g2", "false"], ["g3", "false"], ["g4", "false"]],
    )
    code, out, _ = run_cli(
        capsys,
        "checker-eval",
        "--input",
        str(verdicts),
        "--gold",
        str(checker_files),
        "--pretty",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["true"]["precision"] == pytest.approx(1.0)
    assert payload["true"]["recall"] == pytest.approx(0.5)
    assert payload["true"]["f1"] == pytest.approx(2 / 3)
    assert payload["false"]["precision"] == pytest.approx(2 / 3)
    assert payload["false"]["recall"] == pytest.approx(1.0)
    assert payload["false"]["f1"] == pytest.approx(0.8)
    assert payload["accuracy"] == pytest.approx(0.75)


def test_checker_eval_bad_token_exits_2(capsys, tmp_path, checker_files):
    verdicts = write_csv(
        tmp_path / "v.csv",
        ["claim_id", "verdict"],
        [["g1", "true"], ["g2", "true"], ["g3", "maybe"]],
    )
    code, _, err = run_cli(
        capsys,
        "checker-eval",
        "--input",
        str(verdicts),
        "--gold",
        str(checker_files),
    )
    assert code == 2
    assert "row 3" in err


# --- solvers -------------------------------------------------------


def test_solvers_listing(capsys):
    code, out, _ = run_cli(capsys, "solvers")
    assert code == 0
    payload = json.loads(out)
    assert "rule_splitter" in payload["claim_processor"]
    assert "nli_verifier" in payload["verifier"]
