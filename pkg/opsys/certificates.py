"""Non-extendibility certificates for Phi_n, Upsilon_n and Gamma_n.

Each certificate replays its argument as a list of ``ProofStep`` values, every
step carrying the numerical residual that confirms it. The final comparison of
the Schur certificates is an integer comparison on n, so the thresholds never
depend on a tolerance.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from opsys._compat import StrEnum

import numpy as np
import scipy.linalg as la

import opsys.config as config
from opsys.errors import DimensionMismatch, DomainViolation
from opsys.linalg import (
    Field,
    adjoint,
    block2x2,
    hermitian_eigenvalues,
    identity,
    is_psd,
    matrix_unit,
    require_square,
)
from opsys.maps import (
    MapId,
    MapKind,
    apply,
    blockwise_transpose,
    check_restriction,
    kadison_schwarz_displays,
    transpose_cb_witness,
)
from opsys.systems import (
    SystemId,
    SystemKind,
    canonical_witness,
    element,
    embed,
    full_positive_sample,
)
from opsys.utils import rng_stream

logger = logging.getLogger("opsys")


class Outcome(StrEnum):
    CONTRADICTION = "contradiction"
    INCONCLUSIVE = "inconclusive"
    EXTENSION_EXHIBITED = "extension-exhibited"


@dataclass(frozen=True)
class ProofStep:
    label: str
    residual: float
    tolerance: float = config.TOL_NARRATIVE

    @property
    def verified(self) -> bool:
        return self.residual <= self.tolerance


@dataclass(frozen=True, eq=False)
class Inequality:
    """The claim ``lhs >= rhs`` a contradiction refutes."""

    lhs_label: str
    lhs: np.ndarray
    rhs_label: str
    rhs: np.ndarray

    @property
    def violation(self) -> float:
        """-lambda_min(lhs - rhs); positive when the claim fails."""
        return -float(hermitian_eigenvalues(self.lhs - self.rhs)[0])


@dataclass(frozen=True, eq=False)
class Verdict:
    outcome: Outcome
    threshold_used: int | None
    witnesses: list[tuple[str, np.ndarray]]
    narrative: list[ProofStep]
    inequality: Inequality | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def margin(self) -> float | None:
        return None if self.inequality is None else self.inequality.violation

    @property
    def max_residual(self) -> float:
        return max((step.residual for step in self.narrative), default=0.0)

    @property
    def verified(self) -> bool:
        return all(step.verified for step in self.narrative)


def _max_abs(X: np.ndarray) -> float:
    return float(np.max(np.abs(X))) if X.size else 0.0


def _psd_defect(M: np.ndarray) -> float:
    return max(0.0, -is_psd(M).min_eigenvalue)


def _close(outcome: Outcome, narrative: list[ProofStep], **kwargs) -> Verdict:
    """Build the verdict, demoting a contradiction whose steps did not verify."""
    failed = [step.label for step in narrative if not step.verified]
    notes = list(kwargs.pop("notes", []))
    if failed and outcome is Outcome.CONTRADICTION:
        logger.warning(f"Unverified proof steps: {failed}")
        notes.append(f"unverified steps: {', '.join(failed)}")
        outcome = Outcome.INCONCLUSIVE
    return Verdict(outcome=outcome, narrative=narrative, notes=notes, **kwargs)


@dataclass(frozen=True)
class SchurReport:
    block_psd: bool
    complement_psd: bool
    block_min_eigenvalue: float
    complement_min_eigenvalue: float

    @property
    def agree(self) -> bool:
        return self.block_psd == self.complement_psd


def schur_implication(P, X, tol: float = config.TOL_PSD) -> SchurReport:
    """(P, X*; X, I) >= 0 against P - X*X >= 0, both decided by the eigen-oracle."""
    P = require_square(P, "P")
    X = require_square(X, "X")
    if P.shape != X.shape:
        raise DimensionMismatch(f"P is {P.shape} but X is {X.shape}")

    dtype = np.result_type(P, X, np.float64)
    P, X = P.astype(dtype), X.astype(dtype)
    block = block2x2(P, adjoint(X), X, np.eye(P.shape[0], dtype=dtype))
    block_check = is_psd(block, tol)
    complement_check = is_psd(P - adjoint(X) @ X, tol)
    return SchurReport(
        block_check.psd,
        complement_check.psd,
        block_check.min_eigenvalue,
        complement_check.min_eigenvalue,
    )


def _scalar_corner_part(kind: MapKind, n: int, i: int, j: int):
    """System part of (E_ii, E_ij; E_ji, I) for the map's domain."""
    E_ij = matrix_unit(n, i, j)
    E_ji = matrix_unit(n, j, i)
    if kind is MapKind.PHI:
        return element(SystemId(SystemKind.A, n), a=0, d=1, B=E_ij, C=E_ji)
    return element(SystemId(SystemKind.S, n), a=0, b=1, C=E_ij)


def _schur_certificate(kind: MapKind, n: int, scale: float, threshold: int) -> Verdict:
    """Shared argument for Phi_n (scale 1/4) and Upsilon_n (scale 1).

    A positive extension sends (E_ii, E_ij; E_ji, I) to (P_i, s E_ji; s E_ij, I)
    with P_i >= 0 and sum_i P_i = I, and positivity of that image forces
    P_i >= s^2 E_jj. Summing over i gives I >= n s^2 E_jj.
    """
    m = MapId(kind, n)
    field = m.field
    j = 1
    zero = np.zeros((n, n), dtype=field.dtype)
    eye = identity(n, field)
    E_jj = matrix_unit(n, j, j)

    corner = block2x2(eye, zero, zero, zero)
    diagonal_sum = sum(matrix_unit(n, i, i) for i in range(1, n + 1))
    corner_residual = max(
        _max_abs(apply(m, corner) - corner), _max_abs(diagonal_sum - eye)
    )

    positivity, decomposition, off_diagonal, products = 0.0, 0.0, 0.0, 0.0
    for i in range(1, n + 1):
        E_ii = matrix_unit(n, i, i, field)
        E_ij = matrix_unit(n, i, j, field)
        E_ji = matrix_unit(n, j, i, field)
        Q = block2x2(E_ii, E_ij, E_ji, eye)
        positivity = max(positivity, _psd_defect(Q))

        part = embed(_scalar_corner_part(kind, n, i, j))
        split = Q - block2x2(E_ii, zero, zero, zero) - part
        decomposition = max(decomposition, _max_abs(split))

        expected = block2x2(zero, scale * E_ji, scale * E_ij, eye)
        off_diagonal = max(off_diagonal, _max_abs(apply(m, part) - expected))

        X = scale * E_ij
        products = max(products, _max_abs(adjoint(X) @ X - scale**2 * E_jj))

    X = scale * matrix_unit(n, 1, j)
    boundary = schur_implication(scale**2 * E_jj, X)
    perturbed = schur_implication(scale**2 * E_jj - 1e-3 * np.eye(n), X)
    schur_agrees = boundary.agree and perturbed.agree and boundary.block_psd

    narrative = [
        ProofStep("corner (I, 0; 0, 0) is fixed and sum_i E_ii = I", corner_residual),
        ProofStep(f"(E_ii, E_i{j}; E_{j}i, I) >= 0 for every i", positivity),
        ProofStep("each matrix is a corner plus a system element", decomposition),
        ProofStep(f"system part maps to {scale:g} E_{j}i off-diagonal", off_diagonal),
        ProofStep(f"X*X = {scale**2:g} E_{j}{j} for X = {scale:g} E_i{j}", products),
        ProofStep("Schur complement decides positivity", 0.0 if schur_agrees else 1.0),
    ]

    lower = (n / threshold) * E_jj
    label = f"{n}/{threshold} E_{j}{j}"
    inequality = Inequality("sum_i P_i = I", np.eye(n), label, lower)
    witnesses = [(inequality.lhs_label, inequality.lhs), (inequality.rhs_label, lower)]

    if n > threshold:
        return _close(
            Outcome.CONTRADICTION,
            narrative,
            threshold_used=threshold,
            witnesses=witnesses,
            inequality=inequality,
        )

    notes = [f"n = {n} <= {threshold}: the summed constraint stays below I"]
    return _close(
        Outcome.INCONCLUSIVE,
        narrative,
        threshold_used=threshold,
        witnesses=witnesses,
        notes=notes,
    )


def certify_phi_unextendible(n: int) -> Verdict:
    verdict = _schur_certificate(
        MapKind.PHI, n, config.PHI_OFF_DIAGONAL_SCALE, config.PHI_THRESHOLD
    )
    if n <= config.PHI_POSITIVE_EXTENSION_MAX_N:
        # B -> B^t/4 is completely contractive here, so Phi_n extends
        verdict.narrative.append(
            ProofStep(
                "||(id (x) t/4)(W)|| <= 1 at level n",
                max(0.0, transpose_cb_witness(n) - 1.0),
            )
        )
        verdict.notes.append(
            f"Phi_{n} is completely positive for n <= "
            f"{config.PHI_POSITIVE_EXTENSION_MAX_N} and therefore extends"
        )
    elif n <= config.PHI_THRESHOLD:
        verdict.notes.append(
            f"extendibility of Phi_n is not decided for "
            f"{config.PHI_POSITIVE_EXTENSION_MAX_N} < n <= {config.PHI_THRESHOLD}"
        )
    logger.info(f"Phi_{n} certificate: {verdict.outcome}")
    return verdict


def _identity_on_basis(m: MapId) -> float:
    """Largest gap between m and the identity over the domain's matrix units."""
    worst = 0.0
    for row in range(m.dim):
        for col in range(m.dim):
            E = np.zeros((m.dim, m.dim), dtype=m.field.dtype)
            E[row, col] = 1
            E = E + E.T if m.kind is MapKind.UPSILON else E
            worst = max(worst, _max_abs(apply(m, E) - E))
    return worst


def certify_upsilon_unextendible(n: int) -> Verdict:
    if n == 1:
        m = MapId(MapKind.UPSILON, 1)
        step = ProofStep("Upsilon_1 is the identity on S_1", _identity_on_basis(m))
        narrative = [step]
        return _close(
            Outcome.EXTENSION_EXHIBITED,
            narrative,
            threshold_used=config.UPSILON_THRESHOLD,
            witnesses=[("extension: identity on M_2(R)", identity(2))],
        )

    verdict = _schur_certificate(
        MapKind.UPSILON, n, 1.0, config.UPSILON_THRESHOLD
    )
    logger.info(f"Upsilon_{n} certificate: {verdict.outcome}")
    return verdict


def _squeeze_sample(n: int, rng_seed: int, trial: int) -> np.ndarray:
    """0 <= D <= I with exact 0 and 1 eigenvalues on some trials."""
    if trial == 0:
        return np.eye(n, dtype=np.complex128)
    if trial == 1:
        return matrix_unit(n, 1, 1, Field.COMPLEX)

    rng = rng_stream(rng_seed, trial)
    G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    U, _ = np.linalg.qr(G)
    spectrum = rng.uniform(0.05, 1.0, size=n)
    if trial % 3 == 0:
        spectrum[rng.integers(n)] = 0.0
    if trial % 5 == 0:
        spectrum[rng.integers(n)] = 1.0
    return U @ np.diag(spectrum) @ adjoint(U)


def _forced_lower_bound(S: np.ndarray) -> np.ndarray:
    """Smallest X with (S, S; S, X) >= 0, namely S S^+ S on range(S)."""
    pseudo = la.pinvh(S, atol=config.RANGE_CUTOFF)
    return S @ pseudo @ S


def chi_forcing_check(n: int, trials: int, rng_seed: int) -> float:
    """Max residual of the squeeze D^t <= chi(D) <= I - (I - D)^t.

    Positivity of the extension's images of (D, D; D, D) and of the same
    matrix built from I - D bounds the lower-right block from both sides.
    The bounds meet at D^t, so chi(D) = D^t is forced.
    """
    worst = 0.0
    eye = np.eye(n)
    for trial in range(trials):
        D = _squeeze_sample(n, rng_seed, trial)
        Dt = D.T
        complement_t = (eye - D).T

        lower = _forced_lower_bound(Dt)
        upper = eye - _forced_lower_bound(complement_t)
        block_defect = _psd_defect(block2x2(Dt, Dt, Dt, lower))

        residual = max(_max_abs(upper - lower), _max_abs(lower - Dt), block_defect)
        worst = max(worst, residual)

    logger.info(f"chi squeeze for n={n}: max residual {worst:.3e} over {trials} trials")
    return worst


def _self_adjoint_spanning_set(n: int) -> list[np.ndarray]:
    span = []
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            E_ij = matrix_unit(n, i, j, Field.COMPLEX)
            if i == j:
                span.append(E_ij)
                continue
            E_ji = E_ij.T
            span.append(E_ij + E_ji)
            span.append(1j * (E_ij - E_ji))
    return span


def _forced_lower_left(H: np.ndarray) -> np.ndarray:
    """(0, 0; H^t, 0) recombined from the forced values at c = 1 and c = i."""
    at_one = kadison_schwarz_displays(H, 1, 0.0).forced_lower
    at_i = kadison_schwarz_displays(H, 1j, 0.0).forced_lower
    return (at_one - 1j * at_i) / 2


def kadison_schwarz_squeeze(A, c: complex, d: float) -> tuple[np.ndarray, float]:
    """Forced value of Psi(0, cbar A; cA, 0) for any positive extension Psi.

    The inequality at M = (A, cbar I; cI, dI) bounds Psi(X) from below, and at
    the same M with c replaced by -c it bounds Psi(-X) from below, so
    lower <= Psi(X) <= upper. Returns the lower bound and the width of the
    squeeze, which is zero when the value is forced.
    """
    plus = kadison_schwarz_displays(A, c, d)
    minus = kadison_schwarz_displays(A, -c, d)
    lower = plus.forced_lower
    upper = -minus.forced_lower
    width = max(_max_abs(upper - lower), _psd_defect(upper - lower))
    return lower, width


def forcing_gap(candidate: Callable[[np.ndarray], np.ndarray], n: int) -> float:
    """Largest gap between a candidate extension and the forced off-diagonal values."""
    worst = 0.0
    for A in _self_adjoint_spanning_set(n):
        for c in (1, 1j):
            displays = kadison_schwarz_displays(A, c, 0.0)
            value = candidate(displays.off_diagonal)
            worst = max(worst, _max_abs(value - displays.forced_lower))
    return worst


def certify_gamma_unextendible(
    n: int,
    rng_seed: int = config.DEFAULT_SEED,
    trials: int = 20,
    candidate: Callable[[np.ndarray], np.ndarray] = blockwise_transpose,
) -> Verdict:
    """Kadison-Schwarz forcing: any positive extension of Gamma_n is the
    blockwise transpose, which is not positive.

    ``candidate`` is the extension checked against the forced values and
    evaluated on the final input.

    The Kadison-Schwarz inequality for positive unital maps of norm one is
    taken as a premise; the steps verify its algebraic consequences.
    """
    if n == 1:
        m = MapId(MapKind.GAMMA, 1)
        step = ProofStep("Gamma_1 is the identity on T_1 = M_2", _identity_on_basis(m))
        narrative = [step]
        return _close(
            Outcome.EXTENSION_EXHIBITED,
            narrative,
            threshold_used=None,
            witnesses=[("extension: identity on M_2(C)", identity(2, Field.COMPLEX))],
        )

    narrative: list[ProofStep] = []
    display_residual, squeeze_width = 0.0, 0.0
    for A in _self_adjoint_spanning_set(n):
        for c in (1, 1j):
            for d in (0.0, 1.0):
                displays = kadison_schwarz_displays(A, c, d)
                display_residual = max(display_residual, displays.residual)
                _, width = kadison_schwarz_squeeze(A, c, d)
                squeeze_width = max(squeeze_width, width)
    narrative += [
        ProofStep("M^2, Psi(M^2), Psi(M)^2 match their formulas", display_residual),
        ProofStep(
            "c and -c squeeze Psi(0, cbar A; cA, 0) to (0, cbar A^t; cA^t, 0)",
            squeeze_width,
        ),
        ProofStep(
            "the candidate meets the forced off-diagonal values",
            forcing_gap(candidate, n),
        ),
    ]

    off_diagonal = 0.0
    for trial in range(trials):
        rng = rng_stream(rng_seed, trial)
        C = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        H1, H2 = (C + adjoint(C)) / 2, (C - adjoint(C)) / 2j
        forced = _forced_lower_left(H1) + 1j * _forced_lower_left(H2)
        zero = np.zeros((n, n), dtype=np.complex128)
        target = block2x2(zero, zero, C.T, zero)
        off_diagonal = max(off_diagonal, _max_abs(forced - target))
    narrative.append(
        ProofStep("C = H1 + i H2 forces Psi(0, 0; C, 0) = (0, 0; C^t, 0)", off_diagonal)
    )

    gamma = MapId(MapKind.GAMMA, n)
    psi = MapId(MapKind.PSI_TRANSPOSE, n)
    narrative += [
        ProofStep(
            "upper-left block is fixed: Psi agrees with Gamma_n on T_n",
            check_restriction(psi, gamma, trials, rng_seed),
        ),
        ProofStep("chi(D) = D^t is forced", chi_forcing_check(n, trials, rng_seed)),
    ]

    P = canonical_witness(n, Field.COMPLEX)
    image = candidate(P)
    narrative.append(ProofStep("final input is positive", _psd_defect(P)))

    upsilon = MapId(MapKind.UPSILON, n)
    narrative.append(
        ProofStep(
            "the forced candidate restricts to Upsilon_n on S_n",
            check_restriction(psi, upsilon, trials, rng_seed),
        )
    )
    notes = [
        "premise: Kadison-Schwarz holds for positive unital maps of norm one",
        "the only candidate extension is the blockwise transpose",
    ]
    if certify_upsilon_unextendible(n).outcome is Outcome.CONTRADICTION:
        notes.append("alternate route: the restriction Upsilon_n does not extend")

    inequality = Inequality("Psi(v v*)", image, "0", np.zeros_like(image))
    verdict = _close(
        Outcome.CONTRADICTION,
        narrative,
        threshold_used=None,
        witnesses=[("v v*, v = e_1 (+) e_2", P), ("Psi(v v*)", image)],
        inequality=inequality,
        notes=notes,
    )
    logger.info(f"Gamma_{n} certificate: {verdict.outcome}")
    return verdict


@dataclass(frozen=True, eq=False)
class LinearMapTable:
    """A linear map on M_2n stored as its images of the matrix units.

    ``images[r, s]`` is the image of the unit with a 1 in entry (r, s).
    """

    n: int
    field: Field
    images: np.ndarray

    def __post_init__(self):
        dim = 2 * self.n
        if self.images.shape != (dim, dim, dim, dim):
            raise DimensionMismatch(
                f"Expected images of shape {(dim,) * 4}, got {self.images.shape}"
            )

    @classmethod
    def from_callable(
        cls, n: int, field: Field, func: Callable[[np.ndarray], np.ndarray]
    ) -> "LinearMapTable":
        dim = 2 * n
        dtype = np.complex128 if field is Field.COMPLEX else np.float64
        images = np.zeros((dim, dim, dim, dim), dtype=dtype)
        for r in range(dim):
            for s in range(dim):
                E = np.zeros((dim, dim), dtype=field.dtype)
                E[r, s] = 1
                images[r, s] = func(E)
        return cls(n, field, images)

    @classmethod
    def from_map(cls, m: MapId) -> "LinearMapTable":
        if m.domain is not None:
            raise DomainViolation(f"{m} is not defined on the full algebra")
        return cls.from_callable(m.n, m.field, lambda M: apply(m, M))

    def __call__(self, M) -> np.ndarray:
        M = require_square(M)
        return np.einsum("rs,rskl->kl", M, self.images)


@dataclass(frozen=True, eq=False)
class FalsificationResult:
    """``found`` False is NoViolationFound: evidence, never a proof of positivity."""

    found: bool
    trials_run: int
    trial: int | None = None
    input: np.ndarray | None = None
    output: np.ndarray | None = None
    min_eigenvalue: float | None = None


def falsify_extension(
    candidate: LinearMapTable,
    trials: int,
    rng_seed: int,
    tol: float = config.TOL_PSD,
) -> FalsificationResult:
    """Search seeded positive inputs for one the candidate maps outside the cone."""
    for trial in range(trials):
        P = full_positive_sample(candidate.n, candidate.field, rng_seed, trial)
        output = candidate(P)
        check = is_psd(output, tol)
        if not check.psd:
            logger.warning(
                f"Candidate is not positive: trial {trial} gives min eigenvalue "
                f"{check.min_eigenvalue:.3e}"
            )
            return FalsificationResult(
                True, trial + 1, trial, P, output, check.min_eigenvalue
            )

    logger.info(f"No violation in {trials} trials")
    return FalsificationResult(False, trials)
