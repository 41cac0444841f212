import logging
import time
from collections.abc import Callable

import numpy as np
from rich.console import Console

import opsys.config as config
from opsys.certificates import (
    Outcome,
    Verdict,
    certify_gamma_unextendible,
    certify_phi_unextendible,
    certify_upsilon_unextendible,
    chi_forcing_check,
)
from opsys.datamodels import ClaimRecord, Command, Report, RunConfig, matrix_to_witness
from opsys.linalg import hermitian_part, is_psd, operator_norm
from opsys.maps import (
    POSITIVE_MAPS,
    MapId,
    MapKind,
    apply,
    check_kadison_schwarz,
    check_positivity_preserving,
    check_restriction,
    check_structural,
    estimate_map_norm,
    kadison_schwarz_displays,
    phi_compression_check,
    russo_dye_check,
    swap_bc_char_poly_check,
    swap_bc_singular_check,
    transpose_cb_witness,
    upsilon_prime_bound_check,
)
from opsys.systems import (
    SystemId,
    SystemKind,
    boundary_margin,
    element,
    embed,
    is_positive_by_criterion,
    random_element,
    random_positive_element,
    random_self_adjoint_element,
)
from opsys.utils import rng_stream

WorkItem = tuple[str, Callable[[], list[ClaimRecord]]]

SYSTEMS_BY_FIELD = {
    "real": (SystemKind.S, SystemKind.R),
    "complex": (SystemKind.S_PRIME, SystemKind.T),
    "both": (SystemKind.S, SystemKind.S_PRIME, SystemKind.T, SystemKind.R),
}

CRITERION_ANCHORS = {
    SystemKind.S: "block-positivity.scalar-corners",
    SystemKind.S_PRIME: "block-positivity.scalar-corners",
    SystemKind.T: "block-positivity.scalar-tail",
    SystemKind.R: "block-positivity.scalar-tail",
}

STRUCTURE_ANCHORS = {
    MapKind.PHI: "phi.definition",
    MapKind.UPSILON: "upsilon.structure",
    MapKind.UPSILON_PRIME: "upsilon-prime.positive",
    MapKind.GAMMA: "gamma.involution",
    MapKind.PSI_TRANSPOSE: "kadison-schwarz.forcing",
    MapKind.PSI_REAL_EXT: "real-restriction.extendible",
}

POSITIVITY_ANCHORS = {
    MapKind.PHI: "phi.positive",
    MapKind.UPSILON: "upsilon.positive",
    MapKind.UPSILON_PRIME: "upsilon-prime.positive",
    MapKind.GAMMA: "gamma.positive",
    MapKind.PSI_TRANSPOSE: "psi-transpose.not-positive",
    MapKind.PSI_REAL_EXT: "real-restriction.extendible",
}

NORM_ANCHORS = {
    MapKind.PHI: "phi.norm",
    MapKind.UPSILON: "upsilon.norm",
    MapKind.UPSILON_PRIME: "upsilon-prime.norm",
    MapKind.GAMMA: "gamma.isometry",
}


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def expected_outcome(which: str, n: int) -> Outcome:
    if which == "phi":
        if n > config.PHI_THRESHOLD:
            return Outcome.CONTRADICTION
        return Outcome.INCONCLUSIVE
    if n > config.UPSILON_THRESHOLD:
        return Outcome.CONTRADICTION
    return Outcome.EXTENSION_EXHIBITED


class VerificationManager:
    def __init__(
        self,
        run_config: RunConfig,
        console: Console | None = None,
        debug: bool = False,
    ):
        self.config = run_config
        self.console = console or Console()
        self.debug = debug
        self.logger = logging.getLogger("opsys")

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def trials(self) -> int:
        return self.config.trials

    def _claim(
        self,
        claim_id: str,
        anchor: str,
        n: int,
        status: str,
        residual: float | None = None,
        witness: np.ndarray | None = None,
        detail: str | None = None,
    ) -> ClaimRecord:
        if status == "fail":
            self._log(f"{claim_id} (n={n}) failed: {detail}", level="warning")
        return ClaimRecord(
            id=claim_id,
            anchor=anchor,
            n=n,
            status=status,
            residual=None if residual is None else float(residual),
            witness=None if witness is None else matrix_to_witness(witness),
            detail=detail,
        )

    def verify_lemma(self, n: int) -> list[ClaimRecord]:
        """Closed-form criterion against the eigen-oracle on balanced samples."""
        tol = self.config.tol_psd
        claims = []
        for kind in SYSTEMS_BY_FIELD[self.config.field]:
            system = SystemId(kind, n)
            disagreements, near_boundary, worst = 0, 0, 0.0
            witness = None

            for trial in range(self.trials):
                samples = (
                    random_self_adjoint_element(system, (self.seed, n, trial, 0)),
                    random_positive_element(system, (self.seed, n, trial, 1)),
                )
                for e in samples:
                    criterion = is_positive_by_criterion(e, tol)
                    oracle = is_psd(embed(e), tol).psd
                    if criterion == oracle:
                        continue
                    margin = boundary_margin(e)
                    if margin <= config.BOUNDARY_MARGIN:
                        near_boundary += 1
                        self._log(
                            f"{system}: criterion and oracle disagree within "
                            f"{margin:.2e} of the boundary",
                            level="warning",
                        )
                        continue
                    disagreements += 1
                    worst = max(worst, margin)
                    witness = embed(e)

            claims.append(
                self._claim(
                    f"lemma.{system.kind.name.lower()}",
                    CRITERION_ANCHORS[kind],
                    n,
                    _status(disagreements == 0),
                    residual=worst,
                    witness=witness,
                    detail=(
                        f"{disagreements} disagreements in {2 * self.trials} samples, "
                        f"{near_boundary} near the boundary"
                    ),
                )
            )
        return claims

    def _phi_square_residual(self, n: int) -> float:
        """Phi_n twice scales the off-diagonal blocks by 1/16."""
        m = MapId(MapKind.PHI, n)
        scale = config.PHI_OFF_DIAGONAL_SCALE**2
        worst = 0.0
        for trial in range(self.trials):
            e = random_element(m.domain, (self.seed, n, trial, 2))
            p = e.params
            expected = element(m.domain, a=p.a, d=p.d, B=scale * p.B, C=scale * p.C)
            twice = apply(m, apply(m, e))
            worst = max(worst, float(np.max(np.abs(embed(twice) - embed(expected)))))
        return worst

    def verify_maps(self, n: int) -> list[ClaimRecord]:
        tol = self.config.tol_identity
        claims = []
        for kind in MapKind:
            m = MapId(kind, n)
            report = check_structural(m, self.trials, self.seed, tol)
            flags = {
                "unital": report.unital,
                "involution": report.involution,
                "self_adjoint": report.self_adjoint,
                "linear": report.linear,
            }
            expected = {**flags, "unital": True, "self_adjoint": True, "linear": True}
            expected["involution"] = kind is not MapKind.PHI
            checked = [key for key in flags if expected[key]]
            residual = max(report.residuals[key] for key in checked)
            if kind is MapKind.PHI:
                residual = max(residual, self._phi_square_residual(n))
            claims.append(
                self._claim(
                    f"maps.{kind}.structure",
                    STRUCTURE_ANCHORS[kind],
                    n,
                    _status(flags == expected and residual <= tol),
                    residual=residual,
                    detail=", ".join(f"{key}={value}" for key, value in flags.items()),
                )
            )

            positivity = check_positivity_preserving(
                m, self.trials, self.seed, self.config.tol_psd
            )
            expect_violation = kind is MapKind.PSI_TRANSPOSE and n >= 2
            found = positivity.violation_count > 0
            witness = positivity.violations[0].input if found else None
            claims.append(
                self._claim(
                    f"maps.{kind}.positive",
                    POSITIVITY_ANCHORS[kind],
                    n,
                    _status(found == expect_violation),
                    residual=positivity.min_output_eigenvalue,
                    witness=witness,
                    detail=(
                        f"{positivity.violation_count} violations in "
                        f"{positivity.trials} positive inputs"
                    ),
                )
            )

            if kind in POSITIVE_MAPS:
                excess = russo_dye_check(m, self.trials, self.seed)
                claims.append(
                    self._claim(
                        f"maps.{kind}.contractive-on-positives",
                        "norm-at-identity",
                        n,
                        _status(excess <= tol),
                        residual=max(excess, 0.0),
                    )
                )

        claims += self._isometry_claims(n)
        claims += self._restriction_claims(n)

        value = transpose_cb_witness(n)
        contractive = value <= 1.0
        claims.append(
            self._claim(
                "maps.transpose-witness",
                "phi.complete-contractivity",
                n,
                _status(abs(value - n / 4) <= config.TOL_DISPLAY),
                residual=abs(value - n / 4),
                detail=f"value {value:.6f}; "
                + ("contractive" if contractive else "not completely contractive"),
            )
        )

        compression = phi_compression_check(n, self.trials, self.seed)
        residual = max(
            compression.form_gap, compression.form_excess, compression.norm_growth
        )
        claims.append(
            self._claim(
                "maps.phi.compression",
                "phi.norm",
                n,
                _status(residual <= tol and compression.largest_k <= 4),
                residual=max(residual, 0.0),
                detail=f"compressed to spans of dimension <= {compression.largest_k}",
            )
        )
        return sorted(claims, key=lambda claim: claim.id)

    def _isometry_claims(self, n: int) -> list[ClaimRecord]:
        tol = self.config.tol_identity
        gamma = MapId(MapKind.GAMMA, n)
        upsilon = MapId(MapKind.UPSILON, n)
        gamma_gap, upsilon_gap = 0.0, 0.0
        for trial in range(self.trials):
            e = random_element(gamma.domain, (self.seed, n, trial, 3))
            gamma_gap = max(
                gamma_gap,
                abs(operator_norm(embed(apply(gamma, e))) - operator_norm(embed(e))),
            )
            s = random_self_adjoint_element(upsilon.domain, (self.seed, n, trial, 4))
            upsilon_gap = max(
                upsilon_gap,
                abs(operator_norm(embed(apply(upsilon, s))) - operator_norm(embed(s))),
            )
        return [
            self._claim(
                "maps.gamma.isometry",
                "gamma.isometry",
                n,
                _status(gamma_gap <= tol),
                residual=gamma_gap,
            ),
            self._claim(
                "maps.upsilon.isometry-self-adjoint",
                "upsilon.norm",
                n,
                _status(upsilon_gap <= tol),
                residual=upsilon_gap,
            ),
        ]

    def _restriction_claims(self, n: int) -> list[ClaimRecord]:
        tol = self.config.tol_identity
        transpose_gap = check_restriction(
            MapId(MapKind.PSI_TRANSPOSE, n),
            MapId(MapKind.UPSILON, n),
            self.trials,
            self.seed,
        )
        real_gap = check_restriction(
            MapId(MapKind.PSI_REAL_EXT, n),
            MapId(MapKind.GAMMA, n),
            self.trials,
            self.seed,
            system=SystemId(SystemKind.R, n),
        )
        return [
            self._claim(
                "maps.psi-transpose.restricts-to-upsilon",
                "gamma.unextendible",
                n,
                _status(transpose_gap <= tol),
                residual=transpose_gap,
            ),
            self._claim(
                "maps.psi-real-ext.restricts-to-gamma",
                "real-restriction.extendible",
                n,
                _status(real_gap <= tol),
                residual=real_gap,
            ),
        ]

    def verify_swapbc(self, n: int) -> list[ClaimRecord]:
        deviation = swap_bc_singular_check(n, self.trials, self.seed)
        char_poly = swap_bc_char_poly_check(n, self.trials, self.seed)
        return [
            self._claim(
                "swapbc.char-poly",
                "swap-bc.singular-values",
                n,
                _status(char_poly <= config.TOL_CHAR_POLY),
                residual=char_poly,
                detail="relative deviation of p_M, p_N and the direct determinant",
            ),
            self._claim(
                "swapbc.singular-values",
                "swap-bc.singular-values",
                n,
                _status(deviation <= config.TOL_SINGULAR_VALUES),
                residual=deviation,
            ),
        ]

    def _random_hermitian(
        self, n: int, trial: int
    ) -> tuple[np.ndarray, complex, float]:
        rng = rng_stream(self.seed, n, trial, 5)
        G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        c = complex(rng.normal(), rng.normal())
        return hermitian_part(G) / np.sqrt(n), c, float(rng.normal())

    def verify_ks(self, n: int) -> list[ClaimRecord]:
        tol = self.config.tol_identity
        display_residual = 0.0
        transpose_defect = 0.0
        phi_defect = 0.0
        phi = MapId(MapKind.PHI, n)
        psi = MapId(MapKind.PSI_TRANSPOSE, n)
        tail = SystemId(SystemKind.T, n)

        for trial in range(self.trials):
            A, c, d = self._random_hermitian(n, trial)
            display_residual = max(
                display_residual, kadison_schwarz_displays(A, c, d).residual
            )

            M = embed(random_self_adjoint_element(tail, (self.seed, n, trial, 6)))
            result = check_kadison_schwarz(psi, M, tol)
            transpose_defect = max(transpose_defect, -result.defect_eigenvalue)

            if n <= config.PHI_POSITIVE_EXTENSION_MAX_N:
                sample = random_element(phi.domain, (self.seed, n, trial, 7))
                H = hermitian_part(embed(sample))
                result = check_kadison_schwarz(phi, H, tol)
                phi_defect = max(phi_defect, -result.defect_eigenvalue)

        gamma_identity = check_kadison_schwarz(
            MapId(MapKind.GAMMA, n), np.eye(2 * n, dtype=np.complex128), tol
        )
        chi = chi_forcing_check(n, self.trials, self.seed)

        claims = [
            self._claim(
                "ks.chi-squeeze",
                "kadison-schwarz.forcing",
                n,
                _status(chi <= config.TOL_CHI),
                residual=chi,
            ),
            self._claim(
                "ks.displays",
                "kadison-schwarz.forcing",
                n,
                _status(display_residual <= config.TOL_DISPLAY),
                residual=display_residual,
            ),
            self._claim(
                "ks.identity",
                "kadison-schwarz.forcing",
                n,
                _status(gamma_identity.holds),
                residual=abs(gamma_identity.defect_eigenvalue),
            ),
            self._claim(
                "ks.psi-transpose",
                "kadison-schwarz.forcing",
                n,
                _status(transpose_defect <= tol),
                residual=max(transpose_defect, 0.0),
            ),
        ]
        if n <= config.PHI_POSITIVE_EXTENSION_MAX_N:
            claims.append(
                self._claim(
                    "ks.phi-candidate",
                    "kadison-schwarz.forcing",
                    n,
                    _status(phi_defect <= tol),
                    residual=max(phi_defect, 0.0),
                    detail="trace-compression extension of Phi_n",
                )
            )
        return sorted(claims, key=lambda claim: claim.id)

    def norm(self, map_name: str, n: int) -> list[ClaimRecord]:
        kind = MapKind(map_name)
        m = MapId(kind, n)
        estimate = estimate_map_norm(m, self.config.restarts, self.seed)

        expected, tol = 1.0, config.TOL_NORM
        if kind is MapKind.UPSILON_PRIME and n >= 2:
            expected, tol = config.UPSILON_PRIME_NORM, config.TOL_UPSILON_PRIME_NORM
        gap = abs(estimate.lower_bound - expected)
        bounded = estimate.max_sampled <= expected + self.config.tol_identity
        detail = (
            f"lower bound {estimate.lower_bound:.10f} "
            f"({estimate.strategy}, {estimate.evaluations} evaluations)"
        )
        if estimate.known_lower_bound is not None:
            detail += f"; closed-form witness {estimate.known_lower_bound:.10f}"

        claims = [
            self._claim(
                f"norm.{kind}",
                NORM_ANCHORS[kind],
                n,
                _status(gap <= tol and bounded),
                residual=gap,
                witness=estimate.witness,
                detail=detail,
            )
        ]
        if kind is MapKind.UPSILON_PRIME and n >= 2:
            slack = upsilon_prime_bound_check(n, self.trials, self.seed)
            claims.append(
                self._claim(
                    f"norm.{kind}.bound",
                    NORM_ANCHORS[kind],
                    n,
                    _status(slack >= -self.config.tol_identity),
                    residual=max(-slack, 0.0),
                    detail=f"smallest slack {slack:.3e}",
                )
            )
        return claims

    def _verdict(self, which: str, n: int) -> Verdict:
        if which == "phi":
            return certify_phi_unextendible(n)
        if which == "upsilon":
            return certify_upsilon_unextendible(n)
        return certify_gamma_unextendible(n, self.seed, self.trials)

    def certify(self, which: str, n: int) -> list[ClaimRecord]:
        verdict = self._verdict(which, n)
        expected = expected_outcome(which, n)
        ok = verdict.outcome is expected and verdict.verified
        if verdict.outcome is Outcome.CONTRADICTION:
            ok = ok and verdict.margin >= config.CONTRADICTION_MARGIN

        status = _status(ok)
        if ok and verdict.outcome is Outcome.INCONCLUSIVE:
            status = "inconclusive"

        detail = str(verdict.outcome)
        if verdict.margin is not None:
            detail += f" (margin {verdict.margin:.6g})"
        if verdict.notes:
            detail += "; " + "; ".join(verdict.notes)

        claims = [
            self._claim(
                f"certify.{which}",
                f"{which}.unextendible",
                n,
                status,
                residual=verdict.max_residual,
                witness=verdict.witnesses[-1][1] if verdict.witnesses else None,
                detail=detail,
            )
        ]
        if which == "gamma" and verdict.inequality is not None:
            min_eig = -verdict.inequality.violation
            claims.append(
                self._claim(
                    "certify.gamma.final-witness",
                    "psi-transpose.not-positive",
                    n,
                    _status(abs(min_eig + 1.0) <= config.TOL_DISPLAY),
                    residual=abs(min_eig + 1.0),
                    witness=verdict.witnesses[0][1],
                    detail=f"output min eigenvalue {min_eig:.12f}",
                )
            )
        return claims

    def work_items(self) -> list[WorkItem]:
        """(label, thunk) pairs in report order: command, then n."""
        command = self.config.command
        sizes = self.config.n
        items: list[WorkItem] = []

        def add(label: str, func, *args):
            items.append((label, lambda: func(*args)))

        if command is Command.SUITE:
            small = [n for n in sizes if n <= config.SUITE_SAMPLING_MAX_N]
            for step, func in (
                ("lemma", self.verify_lemma),
                ("maps", self.verify_maps),
                ("swapbc", self.verify_swapbc),
                ("ks", self.verify_ks),
            ):
                for n in small:
                    add(f"verify {step} n={n}", func, n)
            for map_name in config.MAP_CHOICES:
                for n in sizes:
                    if n <= config.SUITE_NORM_MAX_N:
                        add(f"norm {map_name} n={n}", self.norm, map_name, n)
            for which in config.CERTIFICATE_CHOICES:
                for n in sizes:
                    add(f"certify {which} n={n}", self.certify, which, n)
            return items

        dispatch = {
            Command.VERIFY_LEMMA: self.verify_lemma,
            Command.VERIFY_MAPS: self.verify_maps,
            Command.VERIFY_SWAPBC: self.verify_swapbc,
            Command.VERIFY_KS: self.verify_ks,
        }
        for n in sizes:
            if command is Command.NORM:
                add(f"norm {self.config.map} n={n}", self.norm, self.config.map, n)
            elif command is Command.CERTIFY:
                add(
                    f"certify {self.config.which} n={n}",
                    self.certify,
                    self.config.which,
                    n,
                )
            else:
                add(f"{command} n={n}", dispatch[command], n)
        return items

    def run(
        self,
        items: list[WorkItem] | None = None,
        on_done: Callable[[str], None] | None = None,
    ) -> Report:
        """Run the work items in order; ``on_done`` receives each finished label."""
        start = time.perf_counter()
        claims: list[ClaimRecord] = []
        for label, work in items if items is not None else self.work_items():
            self._log(f"Running {label}")
            claims += work()
            if on_done is not None:
                on_done(label)
        duration = time.perf_counter() - start
        self._log(f"Finished {len(claims)} claims in {duration:.2f}s")
        return Report(config=self.config, claims=claims, duration_seconds=duration)

    def _log(self, message: str | object, level: str = "info", **kwargs):
        msg_str = str(message)
        if level.lower() == "error":
            self.logger.error(msg_str)
        elif level.lower() == "warning":
            self.logger.warning(msg_str)
        else:
            self.logger.info(msg_str)

        if self.debug:
            self.console.log(message, **kwargs)
