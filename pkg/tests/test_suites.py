import logging
from unittest.mock import MagicMock

import pytest

import opsys.config as config
from opsys.certificates import Outcome
from opsys.datamodels import RunConfig
from opsys.suites import VerificationManager, expected_outcome


def make_manager(command="suite", n=(2,), **overrides) -> VerificationManager:
    options = {"trials": 5, "restarts": 2, "seed": 3}
    options.update(overrides)
    run_config = RunConfig(command=command, n=list(n), **options)
    return VerificationManager(run_config, console=MagicMock())


def statuses(claims) -> dict[str, str]:
    return {claim.id: claim.status for claim in claims}


class TestVerifyLemma:
    @pytest.mark.parametrize(
        "field, ids",
        [
            ("real", {"lemma.s", "lemma.r"}),
            ("complex", {"lemma.s_prime", "lemma.t"}),
            ("both", {"lemma.s", "lemma.s_prime", "lemma.t", "lemma.r"}),
        ],
    )
    def test_claims_per_field(self, field, ids):
        manager = make_manager("verify lemma", field=field, trials=20)
        claims = manager.verify_lemma(2)
        assert set(statuses(claims)) == ids
        assert all(claim.status == "pass" for claim in claims)
        assert all(claim.witness is None for claim in claims)


class TestVerifyMaps:
    def test_all_claims_pass(self):
        claims = make_manager("verify maps").verify_maps(2)
        result = statuses(claims)
        assert set(result.values()) == {"pass"}
        assert "maps.phi.structure" in result
        assert "maps.psi-transpose.positive" in result
        assert "maps.psi-transpose.contractive-on-positives" not in result
        assert [claim.id for claim in claims] == sorted(result)

    def test_blockwise_transpose_violation_carries_witness(self):
        claims = make_manager("verify maps").verify_maps(2)
        (claim,) = [c for c in claims if c.id == "maps.psi-transpose.positive"]
        assert claim.witness is not None
        assert claim.residual < 0

    def test_transpose_witness_detail(self):
        claims = make_manager("verify maps").verify_maps(5)
        (claim,) = [c for c in claims if c.id == "maps.transpose-witness"]
        assert claim.status == "pass"
        assert "not completely contractive" in claim.detail

    def test_phi_compression_claim(self):
        claims = make_manager("verify maps", trials=10).verify_maps(6)
        (claim,) = [c for c in claims if c.id == "maps.phi.compression"]
        assert claim.status == "pass"
        assert claim.anchor == "phi.norm"
        assert claim.residual <= 1e-10
        assert claim.detail == "compressed to spans of dimension <= 4"


def test_verify_swapbc():
    claims = make_manager("verify swapbc").verify_swapbc(3)
    assert statuses(claims) == {
        "swapbc.char-poly": "pass",
        "swapbc.singular-values": "pass",
    }


class TestVerifyKs:
    def test_small_size_includes_phi_candidate(self):
        result = statuses(make_manager("verify ks").verify_ks(2))
        assert "ks.phi-candidate" in result
        assert set(result.values()) == {"pass"}

    def test_large_size_skips_phi_candidate(self):
        result = statuses(make_manager("verify ks").verify_ks(5))
        assert "ks.phi-candidate" not in result
        assert len(result) == 4


class TestNorm:
    def test_isometry_attains_one(self):
        (claim,) = make_manager("norm", map="gamma").norm("gamma", 2)
        assert claim.id == "norm.gamma"
        assert claim.status == "pass"
        assert claim.witness is not None

    def test_upsilon_prime_adds_bound_claim(self):
        claims = make_manager("norm", map="upsilon-prime", restarts=1).norm(
            "upsilon-prime", 2
        )
        assert [claim.id for claim in claims] == [
            "norm.upsilon-prime",
            "norm.upsilon-prime.bound",
        ]
        assert claims[1].status == "pass"

    def test_upsilon_prime_search_reaches_the_norm(self):
        manager = make_manager(
            "norm", map="upsilon-prime", restarts=config.DEFAULT_RESTARTS
        )
        (claim, _) = manager.norm("upsilon-prime", 2)
        assert claim.status == "pass"
        assert claim.residual <= config.TOL_UPSILON_PRIME_NORM
        assert "closed-form witness 1.1547005384" in claim.detail


class TestCertify:
    @pytest.mark.parametrize(
        "which, n, status",
        [
            ("phi", 4, "inconclusive"),
            ("phi", 17, "pass"),
            ("upsilon", 1, "pass"),
            ("upsilon", 3, "pass"),
            ("gamma", 1, "pass"),
        ],
    )
    def test_status(self, which, n, status):
        (claim, *_) = make_manager("certify", which=which).certify(which, n)
        assert claim.id == f"certify.{which}"
        assert claim.anchor == f"{which}.unextendible"
        assert claim.status == status

    def test_gamma_reports_final_witness(self):
        claims = make_manager("certify", which="gamma").certify("gamma", 3)
        assert statuses(claims) == {
            "certify.gamma": "pass",
            "certify.gamma.final-witness": "pass",
        }
        assert claims[1].anchor == "psi-transpose.not-positive"
        assert "margin" in claims[0].detail


@pytest.mark.parametrize(
    "which, n, outcome",
    [
        ("phi", 16, Outcome.INCONCLUSIVE),
        ("phi", 17, Outcome.CONTRADICTION),
        ("upsilon", 1, Outcome.EXTENSION_EXHIBITED),
        ("gamma", 2, Outcome.CONTRADICTION),
    ],
)
def test_expected_outcome(which, n, outcome):
    assert expected_outcome(which, n) is outcome


class TestWorkItems:
    def test_suite_order_and_skips(self):
        labels = [label for label, _ in make_manager(n=(1, 4, 17)).work_items()]
        assert len(labels) == 25
        assert labels[0] == "verify lemma n=1"
        assert labels[7] == "verify ks n=4"
        assert labels[8] == "norm phi n=1"
        assert labels[-1] == "certify gamma n=17"
        assert "verify lemma n=17" not in labels
        assert "norm gamma n=17" not in labels

    def test_single_command(self):
        manager = make_manager("certify", n=(2, 3), which="upsilon")
        labels = [label for label, _ in manager.work_items()]
        assert labels == ["certify upsilon n=2", "certify upsilon n=3"]

        manager = make_manager("verify swapbc", n=(2,))
        assert [label for label, _ in manager.work_items()] == ["verify swapbc n=2"]


class TestRun:
    def test_reports_progress_and_is_deterministic(self):
        done = []
        first = make_manager("verify swapbc", n=(2, 3)).run(on_done=done.append)
        second = make_manager("verify swapbc", n=(2, 3)).run()
        assert done == ["verify swapbc n=2", "verify swapbc n=3"]
        assert first.claims == second.claims
        assert first.config.command == "verify swapbc"
        assert first.exit_code == 0

    def test_explicit_items(self):
        manager = make_manager("certify", n=(17,), which="phi")
        report = manager.run(items=manager.work_items()[:0])
        assert report.claims == []


class TestLogging:
    def test_debug_mirrors_to_console(self):
        manager = make_manager()
        manager.debug = True
        manager._log("hello", level="warning")
        manager.console.log.assert_called_once_with("hello")

    def test_quiet_by_default(self):
        manager = make_manager()
        manager._log("hello")
        manager.console.log.assert_not_called()

    def test_failed_claim_is_logged(self, caplog):
        manager = make_manager()
        with caplog.at_level(logging.WARNING, logger="opsys"):
            manager._claim("x.y", "gamma.positive", 2, "fail", detail="broken")
        assert "x.y (n=2) failed: broken" in caplog.text
