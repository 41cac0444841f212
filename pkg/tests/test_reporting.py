import io
import json

import numpy as np
import pytest
from rich.console import Console

import opsys.config as config
import opsys.reporting as reporting
from opsys.datamodels import ClaimRecord, OutputFormat, Report, RunConfig
from opsys.datamodels import matrix_to_witness


def generated_report(seed: int) -> Report:
    rng = np.random.default_rng(seed)
    anchors = sorted(config.CLAIM_ANCHORS)
    claims = []
    for k in range(int(rng.integers(0, 6))):
        witness = None
        if rng.random() < 0.5:
            size = int(rng.integers(1, 4))
            M = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
            witness = matrix_to_witness(M)
        claims.append(
            ClaimRecord(
                id=f"claim.{k}",
                anchor=anchors[int(rng.integers(len(anchors)))],
                n=int(rng.integers(1, 65)),
                status=["pass", "fail", "inconclusive"][int(rng.integers(3))],
                residual=float(rng.exponential()) if rng.random() < 0.8 else None,
                witness=witness,
                detail=None if rng.random() < 0.5 else f"detail {k}",
            )
        )
    run_config = RunConfig(command="suite", n=[1, 2], seed=seed)
    return Report(config=run_config, claims=claims, duration_seconds=rng.random())


@pytest.fixture
def report():
    return Report(
        config=RunConfig(command="certify", n=[4, 17], which="phi"),
        claims=[
            ClaimRecord(
                id="certify.phi",
                anchor="phi.unextendible",
                n=4,
                status="inconclusive",
                residual=0.0,
            ),
            ClaimRecord(
                id="certify.phi",
                anchor="phi.unextendible",
                n=17,
                status="pass",
                residual=0.0,
                witness=matrix_to_witness(np.eye(2)),
                detail="contradiction (margin 0.0625)",
            ),
        ],
        duration_seconds=0.25,
    )


class TestJson:
    def test_parse_inverts_serialize(self):
        for seed in range(100):
            original = generated_report(seed)
            text = reporting.serialize_report(original)
            assert reporting.parse_report(text) == original

    def test_claims_key(self, report):
        data = json.loads(reporting.serialize_report(report))
        assert [claim["n"] for claim in data["claims"]] == [4, 17]
        assert data["claims"][1]["witness"] == [[[1.0, 0.0], [0.0, 0.0]], [
            [0.0, 0.0],
            [1.0, 0.0],
        ]]
        assert data["config"]["which"] == "phi"


class TestCsv:
    def test_scalar_columns_only(self, report):
        frame = reporting.claims_frame(report)
        assert list(frame.columns) == reporting.CSV_COLUMNS
        assert len(frame) == 2

    def test_render_csv(self, report):
        lines = reporting.render(report, OutputFormat.CSV).splitlines()
        assert lines[0] == "id,anchor,n,status,residual"
        assert lines[1].startswith("certify.phi,phi.unextendible,4,inconclusive")
        assert "witness" not in lines[0]

    def test_empty_report(self):
        report = Report(config=RunConfig(command="suite", n=[1]))
        assert reporting.render_csv(report).strip() == "id,anchor,n,status,residual"


class TestText:
    def test_no_string_rendering_for_text(self, report):
        with pytest.raises(ValueError, match="No string rendering"):
            reporting.render(report, OutputFormat.TEXT)

    def test_print_report(self, report):
        buffer = io.StringIO()
        reporting.print_report(report, Console(file=buffer, width=160))
        text = buffer.getvalue()
        assert "certify.phi" in text
        assert "1 passed" in text
        assert "0 failed" in text
        assert "1 inconclusive" in text


class TestWriteReport:
    @pytest.mark.parametrize("output", list(OutputFormat))
    def test_writes_each_format(self, report, tmp_path, output):
        path = reporting.write_report(report, tmp_path / "out" / "report", output)
        text = path.read_text(encoding="utf-8")
        if output is OutputFormat.JSON:
            assert reporting.parse_report(text) == report
        elif output is OutputFormat.CSV:
            assert text.startswith("id,anchor,n,status,residual")
        else:
            assert "passed" in text
