import json

import numpy as np
import pytest

from polygauss import specio, spectral
from polygauss.cli import main
from polygauss.gaussian import GaussianTriple
from polygauss.entangle import Bipartition, entangled_fixture
from polygauss.families import caldeira_kernel, kappa_gamma_kernel
from polygauss.kernels import PolyGaussianKernel
from polygauss.pipeline import PipelineConfig, run_pipeline, verify_certificate
from polygauss.specio import SpecError, parse_kernel_spec, serialize_kernel_spec


def _write_spec(tmp_path, kernel, partition=None, name="spec.json"):
    doc = serialize_kernel_spec(kernel, partition)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_spec_round_trip(tmp_path):
    kernel = kappa_gamma_kernel(3.0, 10.0)
    doc = serialize_kernel_spec(kernel, Bipartition(1, ()) if False else None)
    parsed = parse_kernel_spec(json.dumps(doc))
    doc2 = serialize_kernel_spec(parsed.kernel())
    assert doc == doc2
    assert parsed.checksum == specio.spec_checksum(doc2)


def test_spec_round_trip_with_partition(tmp_path):
    kernel = PolyGaussianKernel.pure_gaussian(entangled_fixture())
    doc = serialize_kernel_spec(kernel, Bipartition(2, (1,)))
    parsed = parse_kernel_spec(json.dumps(doc))
    assert parsed.partition is not None and parsed.partition.part1 == (1,)
    assert serialize_kernel_spec(parsed.kernel(), parsed.partition) == doc


def test_spec_errors_name_the_field():
    with pytest.raises(SpecError, match="'n'"):
        parse_kernel_spec({"a": [1.0]})
    with pytest.raises(SpecError, match="'a'"):
        parse_kernel_spec({"n": 1, "a": [1.0, 2.0], "b": [0.0], "c": [1.0], "poly": []})
    with pytest.raises(SpecError, match="positive definite"):
        parse_kernel_spec(
            {"n": 1, "a": [-1.0], "b": [0.0], "c": [1.0],
             "poly": [{"exponents": [0, 0], "coeff": [1.0, 0.0]}]}
        )
    with pytest.raises(SpecError, match="line 1"):
        parse_kernel_spec("{broken")
    with pytest.raises(SpecError, match="partition"):
        parse_kernel_spec(
            {"n": 2, "a": [1, 0, 0, 1], "b": [0, 0, 0, 0], "c": [0.5, 0, 0, 0.5],
             "poly": [{"exponents": [0, 0, 0, 0], "coeff": [1.0, 0.0]}],
             "partition": {"part1": [3]}}
        )


def test_pipeline_certificates_reverify(tmp_path):
    # Odd-degree certificate.
    doc = {
        "n": 1, "a": [1.0], "b": [0.0], "c": [0.5],
        "poly": [{"exponents": [1, 0], "coeff": [1.0, 0.0]},
                  {"exponents": [0, 1], "coeff": [1.0, 0.0]}],
    }
    spec = parse_kernel_spec(doc)
    report = run_pipeline(spec)
    assert report.not_psd and report.certificate_stage == "odd_degree_gate"
    assert verify_certificate(spec, report.certificate)

    # Gaussian-gate certificate.
    doc = {
        "n": 1, "a": [1.0], "b": [0.0], "c": [2.0],
        "poly": [{"exponents": [0, 0], "coeff": [1.0, 0.0]}],
    }
    spec = parse_kernel_spec(doc)
    report = run_pipeline(spec)
    assert report.not_psd and report.certificate_stage == "gaussian_gate"
    assert verify_certificate(spec, report.certificate)

    # Self-adjointness certificate.
    doc = {
        "n": 1, "a": [1.0], "b": [0.0], "c": [0.5],
        "poly": [{"exponents": [1, 0], "coeff": [1.0, 0.0]},
                  {"exponents": [0, 1], "coeff": [2.0, 0.0]}],
    }
    spec = parse_kernel_spec(doc)
    report = run_pipeline(spec)
    assert report.not_psd and report.certificate_stage == "self_adjoint"
    assert verify_certificate(spec, report.certificate)


def test_pipeline_mercer_or_ek_certificate_reverifies():
    spec = parse_kernel_spec(serialize_kernel_spec(kappa_gamma_kernel(7.0)))
    report = run_pipeline(spec, PipelineConfig(kmax=3))
    assert report.not_psd
    assert report.certificate_stage in ("mercer_search", "ek_sweep")
    assert verify_certificate(spec, report.certificate)
    # The serialized (JSON round-tripped) certificate re-verifies too.
    round_tripped = json.loads(json.dumps(report.to_dict()))
    assert verify_certificate(spec, round_tripped["certificate"])


def test_pipeline_ek_stage_fires_when_mercer_disabled():
    spec = parse_kernel_spec(serialize_kernel_spec(kappa_gamma_kernel(7.0)))
    report = run_pipeline(spec, PipelineConfig(kmax=3, trials=0))
    assert report.certificate_stage == "ek_sweep"
    assert report.certificate["k"] == 3
    assert verify_certificate(spec, report.certificate)


def test_pipeline_delta_stage_sharpens(tmp_path):
    # gamma = 5 lies between the shifted threshold (~4.35) and the direct
    # one (~6.1): only the shifted sweep can certify it at kmax = 3.
    spec = parse_kernel_spec(serialize_kernel_spec(kappa_gamma_kernel(5.0)))
    report = run_pipeline(spec, PipelineConfig(kmax=3, trials=0, deltas=(50.0,)))
    assert report.not_psd and report.certificate_stage == "delta_sweep(delta=50)"
    assert verify_certificate(spec, report.certificate)


def test_pipeline_undecided_on_positive_kernel():
    spec = parse_kernel_spec(serialize_kernel_spec(kappa_gamma_kernel(1.0)))
    report = run_pipeline(spec, PipelineConfig(kmax=4, trials=40, deltas=(10.0,)))
    assert not report.not_psd
    assert "undecided" in report.verdict
    names = [s.name for s in report.stages]
    assert names[:4] == ["self_adjoint", "odd_degree_gate", "gaussian_gate", "mercer_search"]


def test_cli_check_exit_codes(tmp_path):
    bad = _write_spec(tmp_path, kappa_gamma_kernel(7.0), name="bad.json")
    good = _write_spec(tmp_path, kappa_gamma_kernel(1.0), name="good.json")
    assert main(["check", str(bad), "--kmax", "3", "--out", str(tmp_path / "r1.json")]) == 1
    assert main(["check", str(good), "--kmax", "3", "--trials", "40",
                 "--deltas", "10", "--out", str(tmp_path / "r2.json")]) == 0
    assert main(["check", str(tmp_path / "missing.json")]) == 2
    report = json.loads((tmp_path / "r1.json").read_text())
    assert report["verdict"] == "not_psd"


def test_cli_determinism(tmp_path, capsys):
    spec = _write_spec(tmp_path, kappa_gamma_kernel(7.0))
    assert main(["check", str(spec), "--seed", "5", "--kmax", "3"]) == 1
    out1 = capsys.readouterr().out
    assert main(["check", str(spec), "--seed", "5", "--kmax", "3"]) == 1
    out2 = capsys.readouterr().out
    r1, r2 = json.loads(out1), json.loads(out2)
    for r in (r1, r2):
        for s in r["stages"]:
            s.pop("elapsed_s")
    assert r1 == r2


def test_cli_gauss(tmp_path):
    pos = _write_spec(tmp_path, PolyGaussianKernel.pure_gaussian(
        GaussianTriple.from_scalars(1.5, 1.0)), name="pos.json")
    neg = _write_spec(tmp_path, PolyGaussianKernel.pure_gaussian(
        GaussianTriple.from_scalars(1.0, 2.0)), name="neg.json")
    assert main(["gauss", str(pos), "--out", str(tmp_path / "g1.json")]) == 0
    assert main(["gauss", str(neg), "--out", str(tmp_path / "g2.json")]) == 1
    doc = json.loads((tmp_path / "g2.json").read_text())
    assert abs(doc["mu_max"] - np.sqrt(2.0)) < 1e-9


def test_cli_preorder(tmp_path, capsys):
    a = _write_spec(tmp_path, kappa_gamma_kernel(1.0, 0.0), name="a.json")
    b = _write_spec(tmp_path, kappa_gamma_kernel(1.0, 50.0), name="b.json")
    assert main(["preorder", str(a), str(b)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["relation"] == "equivalent" and doc["equiv_formula"] is True


def test_cli_zscan_csv(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["zscan", "--k", "3", "--deltas", "0,10", "--format", "csv",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "k,delta,gamma_root,bracket_lo,bracket_hi"
    rows = [line.split(",") for line in lines[1:]]
    assert abs(float(rows[0][2]) - 6.10781) < 1e-3
    assert abs(float(rows[1][2]) - 4.43150) < 1e-3


def test_cli_npt(tmp_path):
    ent = _write_spec(
        tmp_path,
        PolyGaussianKernel.pure_gaussian(entangled_fixture()),
        Bipartition(2, (0,)),
        name="ent.json",
    )
    assert main(["npt", str(ent), "--out", str(tmp_path / "npt.json")]) == 1
    doc = json.loads((tmp_path / "npt.json").read_text())
    assert doc["verdict"] == "npt_certified"
    no_part = _write_spec(tmp_path, kappa_gamma_kernel(1.0), name="nopart.json")
    assert main(["npt", str(no_part)]) == 2


def test_cli_fixture_round_trip(tmp_path, capsys):
    for name in ("caldeira-n0", "caldeira-n1", "caldeira-n2"):
        out = tmp_path / f"{name}.json"
        assert main(["fixture", name, "--beta", "1.3", "--out", str(out)]) == 0
        parsed = parse_kernel_spec(out)
        assert abs(spectral.moment(parsed.kernel(), 1) - 1.0) < 1e-9
    assert main(["fixture", "kappa-gamma-delta", "--gamma", "2.0", "--delta", "5.0",
                 "--out", str(tmp_path / "kg.json")]) == 0
    parsed = parse_kernel_spec(tmp_path / "kg.json")
    assert abs(spectral.moment(parsed.kernel(), 1) - 1.0) < 1e-9


def test_cli_check_positive_pure_gaussian(tmp_path):
    k = PolyGaussianKernel.pure_gaussian(GaussianTriple.from_scalars(1.5, 1.0))
    spec = _write_spec(tmp_path, k, name="pure.json")
    out = tmp_path / "pure_report.json"
    assert main(["check", str(spec), "--trials", "40", "--deltas", "10", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "undecided"
    gate = next(s for s in doc["stages"] if s["name"] == "gaussian_gate")
    assert gate["status"] == "passed" and abs(gate["mu_max"] - np.sqrt(2 / 3)) < 1e-9


def test_cli_internal_consistency_exit_code(tmp_path, monkeypatch, capsys):
    # A fixture whose self-check trace comes out wrong must exit with code 3.
    import polygauss.cli as cli_mod

    monkeypatch.setattr(cli_mod.spectral, "moment", lambda *a, **k: 2.0)
    assert main(["fixture", "caldeira-n0"]) == 3
    assert "consistency" in capsys.readouterr().err


def test_fixture_caldeira_passes_odd_gate_and_pipeline():
    k = caldeira_kernel(1, 1.0)
    assert k.poly.degree() == 2
    spec = parse_kernel_spec(serialize_kernel_spec(k))
    report = run_pipeline(spec, PipelineConfig(kmax=3, trials=30, deltas=(10.0,)))
    assert not report.not_psd  # eigenstate projections are positive operators
