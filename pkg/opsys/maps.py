import logging
import math
from dataclasses import dataclass, field
from opsys._compat import StrEnum

import numpy as np
import scipy.linalg as la
from scipy.optimize import minimize

import opsys.config as config
from opsys.errors import (
    DimensionMismatch,
    DomainViolation,
    FieldMismatch,
    NotHermitian,
    PreconditionViolated,
)
from opsys.linalg import (
    Field,
    adjoint,
    as_field,
    asymmetry,
    block2x2,
    char_poly_block_eval,
    char_poly_direct,
    compress_to_span,
    identity,
    is_psd,
    operator_norm,
    require_square,
    singular_values,
    split_blocks,
)
from opsys.systems import (
    SystemElement,
    SystemId,
    SystemKind,
    contains,
    element,
    element_from_parameters,
    element_parameters,
    embed,
    extract,
    full_positive_sample,
    parameter_count,
    random_element,
    random_positive_element,
)
from opsys.utils import Seed, rng_stream

logger = logging.getLogger("opsys")


class MapKind(StrEnum):
    PHI = "phi"
    UPSILON = "upsilon"
    UPSILON_PRIME = "upsilon-prime"
    GAMMA = "gamma"
    PSI_TRANSPOSE = "psi-transpose"
    PSI_REAL_EXT = "psi-real-ext"


DOMAIN_OF_KIND = {
    MapKind.PHI: SystemKind.A,
    MapKind.UPSILON: SystemKind.S,
    MapKind.UPSILON_PRIME: SystemKind.S_PRIME,
    MapKind.GAMMA: SystemKind.T,
    MapKind.PSI_TRANSPOSE: None,
    MapKind.PSI_REAL_EXT: None,
}

MAP_FIELD = {
    MapKind.PHI: Field.COMPLEX,
    MapKind.UPSILON: Field.REAL,
    MapKind.UPSILON_PRIME: Field.COMPLEX,
    MapKind.GAMMA: Field.COMPLEX,
    MapKind.PSI_TRANSPOSE: Field.COMPLEX,
    MapKind.PSI_REAL_EXT: Field.REAL,
}

POSITIVE_MAPS = (
    MapKind.PHI,
    MapKind.UPSILON,
    MapKind.UPSILON_PRIME,
    MapKind.GAMMA,
    MapKind.PSI_REAL_EXT,
)


@dataclass(frozen=True)
class MapId:
    kind: MapKind
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", MapKind(self.kind))
        if self.n < 1:
            raise DimensionMismatch(f"Map size must be positive, got n={self.n}")

    @property
    def field(self) -> Field:
        return MAP_FIELD[self.kind]

    @property
    def domain(self) -> SystemId | None:
        kind = DOMAIN_OF_KIND[self.kind]
        return None if kind is None else SystemId(kind, self.n)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def __str__(self) -> str:
        return f"{self.kind}[n={self.n}]"


def partial_transpose(X, dims: tuple[int, int]) -> np.ndarray:
    """Transpose the second tensor factor of X acting on F^d1 (x) F^d2."""
    d1, d2 = dims
    X = require_square(X)
    if X.shape[0] != d1 * d2:
        raise DimensionMismatch(f"Expected dimension {d1 * d2}, got {X.shape[0]}")
    return X.reshape(d1, d2, d1, d2).transpose(0, 3, 2, 1).reshape(d1 * d2, d1 * d2)


def blockwise_transpose(M) -> np.ndarray:
    """(A, B; C, D) -> (A^t, B^t; C^t, D^t)."""
    M = require_square(M)
    return partial_transpose(M, (2, M.shape[0] // 2))


def corner_transpose(M) -> np.ndarray:
    """(A, B; C, D) -> (A^t, B; C, D)."""
    A, B, C, D = split_blocks(M)
    return np.block([[A.T, B], [C, D]])


def phi_extension_candidate(M) -> np.ndarray:
    """Unital extension of Phi_n to M_2n.

    Diagonal blocks go to their normalized trace times I_n and off-diagonal
    blocks to a quarter of their transpose. Positive when n <= 4.
    """
    A, B, C, D = split_blocks(M)
    n = A.shape[0]
    eye = np.eye(n, dtype=np.result_type(M, np.float64))
    scale = config.PHI_OFF_DIAGONAL_SCALE
    return np.block(
        [
            [np.trace(A) / n * eye, scale * B.T],
            [scale * C.T, np.trace(D) / n * eye],
        ]
    )


def _apply_element(m: MapId, e: SystemElement) -> SystemElement:
    p = e.params
    match m.kind:
        case MapKind.PHI:
            scale = config.PHI_OFF_DIAGONAL_SCALE
            return element(e.system, a=p.a, d=p.d, B=scale * p.B.T, C=scale * p.C.T)
        case MapKind.UPSILON | MapKind.UPSILON_PRIME:
            return element(e.system, a=p.a, b=p.b, C=p.C.T)
        case MapKind.GAMMA:
            return element(e.system, A=p.A.T, b=p.b, c=p.c, d=p.d)
    raise DomainViolation(f"{m} has no system domain")


def _apply_full(m: MapId, M: np.ndarray) -> np.ndarray:
    if m.kind is MapKind.PSI_TRANSPOSE:
        return blockwise_transpose(M)
    return corner_transpose(M)


def apply(m: MapId, x: SystemElement | np.ndarray) -> SystemElement | np.ndarray:
    """Apply a map to a domain element (returns an element) or a matrix."""
    domain = m.domain

    if isinstance(x, SystemElement):
        if domain is None:
            return apply(m, embed(x))
        if x.system != domain:
            raise DomainViolation(f"{m} acts on {domain}, got an element of {x.system}")
        return _apply_element(m, x)

    M = require_square(x)
    if M.shape != (m.dim, m.dim):
        raise DimensionMismatch(f"{m} acts on {m.dim}x{m.dim}, got {M.shape}")

    if domain is None:
        if m.field is Field.REAL:
            try:
                M = as_field(M, Field.REAL)
            except FieldMismatch as e:
                raise DomainViolation(f"{m} acts on real matrices") from e
        return _apply_full(m, M)

    if not contains(domain, M):
        raise DomainViolation(f"Matrix does not lie in {domain}, the domain of {m}")
    return embed(_apply_element(m, extract(domain, M)))


def _random_scalar(rng: np.random.Generator, field: Field):
    if field is Field.REAL:
        return rng.normal()
    return complex(rng.normal(), rng.normal())


def random_domain_matrix(m: MapId, rng_seed: Seed) -> np.ndarray:
    if m.domain is not None:
        return embed(random_element(m.domain, rng_seed))
    rng = rng_stream(rng_seed)
    shape = (m.dim, m.dim)
    if m.field is Field.REAL:
        return rng.normal(size=shape)
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def _max_abs(X: np.ndarray) -> float:
    return float(np.max(np.abs(X))) if X.size else 0.0


@dataclass(frozen=True)
class StructuralReport:
    unital: bool
    involution: bool
    self_adjoint: bool
    linear: bool
    residuals: dict[str, float] = field(default_factory=dict)


def check_structural(
    m: MapId, trials: int, rng_seed: int, tol: float = config.TOL_IDENTITY
) -> StructuralReport:
    """Unitality, involution, self-adjointness and linearity on random inputs.

    Self-adjointness compares m(M*) with m(M)*, which is m(M^t) = m(M)^t on
    real domains.
    """
    eye = identity(m.dim, m.field)
    residuals = {
        "unital": _max_abs(apply(m, eye) - eye),
        "involution": _max_abs(apply(m, apply(m, eye)) - eye),
        "self_adjoint": 0.0,
        "linear": 0.0,
    }

    for trial in range(trials):
        M1 = random_domain_matrix(m, (rng_seed, trial, 0))
        M2 = random_domain_matrix(m, (rng_seed, trial, 1))
        rng = rng_stream(rng_seed, trial, 2)
        alpha, beta = _random_scalar(rng, m.field), _random_scalar(rng, m.field)

        image = apply(m, M1)
        residuals["involution"] = max(
            residuals["involution"], _max_abs(apply(m, image) - M1)
        )
        residuals["self_adjoint"] = max(
            residuals["self_adjoint"], _max_abs(apply(m, adjoint(M1)) - adjoint(image))
        )
        combined = apply(m, alpha * M1 + beta * M2)
        residuals["linear"] = max(
            residuals["linear"],
            _max_abs(combined - alpha * image - beta * apply(m, M2)),
        )

    flags = {key: value <= tol for key, value in residuals.items()}
    logger.info(f"Structural check for {m}: {flags}")
    return StructuralReport(residuals=residuals, **flags)


@dataclass(frozen=True, eq=False)
class Violation:
    trial: int
    input: np.ndarray
    output: np.ndarray
    min_eigenvalue: float


@dataclass(frozen=True, eq=False)
class PositivityReport:
    trials: int
    violation_count: int
    violations: list[Violation]
    min_output_eigenvalue: float


def positive_domain_sample(m: MapId, rng_seed: int, trial: int) -> np.ndarray:
    """Trial ``trial`` of the positive inputs for ``m``."""
    if m.domain is not None:
        zero_corner = trial % 7 == 6
        return embed(random_positive_element(m.domain, (rng_seed, trial), zero_corner))
    return full_positive_sample(m.n, m.field, rng_seed, trial)


def check_positivity_preserving(
    m: MapId, trials: int, rng_seed: int, tol: float = config.TOL_PSD
) -> PositivityReport:
    violations: list[Violation] = []
    count = 0
    min_eig = math.inf

    for trial in range(trials):
        P = positive_domain_sample(m, rng_seed, trial)
        image = apply(m, P)
        check = is_psd(image, tol)
        min_eig = min(min_eig, check.min_eigenvalue)
        if check.psd:
            continue
        count += 1
        if len(violations) < config.MAX_RECORDED_VIOLATIONS:
            logger.warning(
                f"{m} maps a positive input to min eigenvalue "
                f"{check.min_eigenvalue:.3e} (trial {trial})"
            )
            violations.append(Violation(trial, P, image, check.min_eigenvalue))

    logger.info(
        f"Positivity check for {m}: {count} violations in {trials} trials, "
        f"min output eigenvalue {min_eig:.3e}"
    )
    return PositivityReport(trials, count, violations, min_eig)


def russo_dye_check(m: MapId, trials: int, rng_seed: int) -> float:
    """Largest ||m(P)|| - ||P|| over positive samples; <= 0 for positive unital maps."""
    worst = -math.inf
    for trial in range(trials):
        P = positive_domain_sample(m, rng_seed, trial)
        worst = max(worst, operator_norm(apply(m, P)) - operator_norm(P))
    return worst


class NormStrategy(StrEnum):
    SAMPLING = "sampling"
    CLOSED_FORM = "closed-form"
    WITNESS_ONLY = "witness-only"


@dataclass(frozen=True, eq=False)
class NormEstimate:
    lower_bound: float
    witness: np.ndarray
    upper_bound: float | None
    strategy: NormStrategy
    raw_input: np.ndarray
    raw_norm: float
    evaluations: int
    # largest ratio seen over every evaluation
    max_sampled: float
    # ratio attained by a closed-form witness, reported next to the search
    known_lower_bound: float | None = None


def upsilon_prime_witness(n: int) -> np.ndarray:
    """(I, C; C^t, 0) with C = E_11 + i E_21, padded from n = 2 to any n >= 2.

    Its norm is sqrt(3) and its image under Upsilon'_n has norm 2.
    """
    if n < 2:
        raise DimensionMismatch(f"The witness needs n >= 2, got n={n}")
    C = np.zeros((n, n), dtype=np.complex128)
    C[0, 0] = 1
    C[1, 0] = 1j
    return embed(element(SystemId(SystemKind.S_PRIME, n), a=1, b=0, C=C))


def _matrix_parameters(M: np.ndarray, field: Field) -> np.ndarray:
    if field is Field.REAL:
        return np.ravel(M.real).copy()
    return np.concatenate([np.ravel(M.real), np.ravel(M.imag)])


def _parameters_of(m: MapId, M: np.ndarray) -> np.ndarray:
    if m.domain is None:
        return _matrix_parameters(M, m.field)
    return element_parameters(extract(m.domain, M))


def _parameter_total(m: MapId) -> int:
    if m.domain is not None:
        return parameter_count(m.domain)
    per_entry = 2 if m.field is Field.COMPLEX else 1
    return per_entry * m.dim * m.dim


def _evaluate(m: MapId, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Input matrix and its image for a raw parameter vector."""
    if m.domain is not None:
        e = element_from_parameters(m.domain, x)
        return embed(e), embed(_apply_element(m, e))
    shape = (m.dim, m.dim)
    if m.field is Field.REAL:
        M = x.reshape(shape)
    else:
        half = x.size // 2
        M = x[:half].reshape(shape) + 1j * x[half:].reshape(shape)
    return M, _apply_full(m, M)


def _parameter_basis(m: MapId) -> tuple[np.ndarray, np.ndarray]:
    """Inputs and images of the unit parameter vectors, stacked along axis 0.

    Both depend linearly on the parameters, so M(x) = sum_k x_k inputs[k].
    """
    pairs = [_evaluate(m, unit) for unit in np.eye(_parameter_total(m))]
    inputs = np.stack([M for M, _ in pairs]).astype(np.complex128)
    images = np.stack([image for _, image in pairs]).astype(np.complex128)
    return inputs, images


def _gram(basis: np.ndarray) -> np.ndarray:
    flat = basis.reshape(basis.shape[0], -1)
    return np.real(flat.conj() @ flat.T)


def _frobenius_maximizer(inputs: np.ndarray, images: np.ndarray) -> np.ndarray:
    """Parameters maximizing ||m(M)||_F / ||M||_F: a generalized eigenvector."""
    _, vectors = la.eigh(_gram(images), _gram(inputs))
    return vectors[:, -1]


def _log_schatten(
    basis: np.ndarray, x: np.ndarray, order: float
) -> tuple[float, np.ndarray, float]:
    """log ||A||_order and its gradient in x for A = sum_k x_k basis[k].

    Also returns the top singular value of A. Order inf gives the operator norm
    with the gradient of the leading singular pair.
    """
    A = np.tensordot(x, basis, axes=1)
    U, sigma, Vh = la.svd(A, full_matrices=False)
    top = float(sigma[0])
    if top <= config.NORM_FLOOR:
        return math.log(config.NORM_FLOOR), np.zeros(x.size), top

    scaled = sigma / top
    if math.isinf(order):
        weights = np.zeros_like(scaled)
        weights[0] = 1.0
        total = 1.0
    else:
        weights = scaled ** (order - 1)
        total = float(np.sum(weights * scaled))
    G = (U * weights) @ Vh
    gradient = np.real(np.einsum("kab,ab->k", basis, G.conj())) / (top * total)
    return math.log(top) + math.log(total) / order, gradient, top


def _starting_points(
    m: MapId, inputs: np.ndarray, images: np.ndarray, restarts: int, rng_seed: int
) -> list[np.ndarray]:
    """The identity, the Frobenius-ratio maximizer, then random domain points."""
    starts = [
        _parameters_of(m, identity(m.dim, m.field)),
        _frobenius_maximizer(inputs, images),
    ][:restarts]
    for restart in range(len(starts), restarts):
        M = random_domain_matrix(m, (rng_seed, restart))
        starts.append(_parameters_of(m, M))
    return starts


def estimate_map_norm(
    m: MapId,
    restarts: int = config.DEFAULT_RESTARTS,
    rng_seed: int = config.DEFAULT_SEED,
    iterations: int = config.DEFAULT_ITERATIONS,
) -> NormEstimate:
    """Multi-start maximization of ||m(M)|| / ||M|| by smoothed gradient ascent.

    Each restart runs BFGS on log ||M||_p - log ||m(M)||_p while the Schatten
    order p climbs through ``config.NORM_SMOOTHING_ORDERS``; ``iterations``
    caps every stage. The ratio is scale invariant, so iterates are rescaled to
    unit length between stages. Every evaluation also records the ratio of
    operator norms, and the best one seen is the reported lower bound.
    """
    if restarts < 1:
        raise ValueError(f"restarts must be at least 1, got {restarts}")

    inputs, images = _parameter_basis(m)
    best = {"value": -math.inf, "x": None}
    evaluations = 0

    def objective(x: np.ndarray, order: float) -> tuple[float, np.ndarray]:
        nonlocal evaluations
        evaluations += 1
        log_in, grad_in, top_in = _log_schatten(inputs, x, order)
        log_out, grad_out, top_out = _log_schatten(images, x, order)
        if top_in > config.NORM_FLOOR and top_out / top_in > best["value"]:
            best["value"] = top_out / top_in
            best["x"] = np.array(x, copy=True)
        return log_in - log_out, grad_in - grad_out

    for x0 in _starting_points(m, inputs, images, restarts, rng_seed):
        x = x0 / np.linalg.norm(x0)
        for order in config.NORM_SMOOTHING_ORDERS:
            result = minimize(
                objective,
                x,
                args=(order,),
                jac=True,
                method="BFGS",
                options={"maxiter": iterations, "gtol": config.CONVERGENCE_TOL},
            )
            x = result.x / np.linalg.norm(result.x)

    raw, _ = _evaluate(m, best["x"])
    raw_norm = operator_norm(raw)
    witness = raw / raw_norm
    lower = operator_norm(apply(m, witness))

    upper, strategy, known = None, NormStrategy.SAMPLING, None
    if m.kind is MapKind.UPSILON_PRIME:
        upper, strategy = config.UPSILON_PRIME_NORM, NormStrategy.CLOSED_FORM
        if m.n >= 2:
            W = upsilon_prime_witness(m.n)
            known = operator_norm(apply(m, W)) / operator_norm(W)

    logger.info(
        f"Norm estimate for {m}: {lower:.12f} after {evaluations} evaluations "
        f"({restarts} restarts)"
    )
    return NormEstimate(
        lower,
        witness,
        upper,
        strategy,
        raw,
        raw_norm,
        evaluations,
        best["value"],
        known,
    )


def upsilon_prime_bound(a: complex, b: complex, C) -> float:
    """Closed-form bound on ||Upsilon'_n(M)|| for M = (aI, C; C^t, bI), ||M|| <= 1.

    Majorizes M by the 2 x 2 matrix (|a|, ||C||; ||C||, |b|); the value never
    exceeds 2/sqrt(3) on the unit ball.
    """
    C = np.asarray(C, dtype=np.complex128)
    n = C.shape[0]
    M = embed(element(SystemId(SystemKind.S_PRIME, n), a=a, b=b, C=C))
    norm = operator_norm(M)
    if norm > 1 + config.TOL_IDENTITY:
        raise PreconditionViolated(f"Element norm {norm:.12f} exceeds 1")

    low, high = sorted((abs(a), abs(b)))
    c_norm = operator_norm(C)
    return (low + high + math.sqrt((high - low) ** 2 + 4 * c_norm**2)) / 2


def upsilon_prime_bound_check(n: int, trials: int, rng_seed: int) -> float:
    """Smallest slack bound - ||Upsilon'_n(e)|| over random e with ||e|| <= 1."""
    system = SystemId(SystemKind.S_PRIME, n)
    m = MapId(MapKind.UPSILON_PRIME, n)
    worst = math.inf
    for trial in range(trials):
        sample = random_element(system, (rng_seed, trial))
        p = sample.params
        k = rng_stream(rng_seed, trial, 1).uniform(0.5, 1.0) / operator_norm(
            embed(sample)
        )
        e = element(system, a=k * p.a, b=k * p.b, C=k * p.C)
        image_norm = operator_norm(embed(apply(m, e)))
        worst = min(worst, upsilon_prime_bound(k * p.a, k * p.b, k * p.C) - image_norm)
    return worst


@dataclass(frozen=True)
class KadisonSchwarzResult:
    holds: bool
    defect_eigenvalue: float
    rule: str


SQUARE_RULES = {
    MapKind.PHI: ("trace-compression candidate", phi_extension_candidate),
    MapKind.UPSILON: ("blockwise transpose candidate", blockwise_transpose),
    MapKind.UPSILON_PRIME: ("blockwise transpose candidate", blockwise_transpose),
    MapKind.GAMMA: ("blockwise transpose candidate", blockwise_transpose),
}


def check_kadison_schwarz(
    m: MapId, x: SystemElement | np.ndarray, tol: float = config.TOL_IDENTITY
) -> KadisonSchwarzResult:
    """Test m(M^2) >= m(M)^2 for self-adjoint M.

    When M^2 leaves the domain, m(M^2) is evaluated with the map's extension
    candidate, so the result is about that candidate, not every extension.
    """
    M = embed(x) if isinstance(x, SystemElement) else require_square(x)
    defect = asymmetry(M)
    if defect > tol:
        raise NotHermitian(f"Kadison-Schwarz needs a self-adjoint input ({defect:.3e})")

    image = apply(m, M)
    square = M @ M
    domain = m.domain
    if domain is None:
        rule, value = "map", apply(m, square)
    elif contains(domain, square):
        rule, value = "domain", apply(m, square)
    elif m.kind in SQUARE_RULES:
        rule, candidate = SQUARE_RULES[m.kind]
        value = candidate(square)
    else:
        raise DomainViolation(f"No evaluation rule for squares under {m}")

    check = is_psd(value - image @ image, tol)
    return KadisonSchwarzResult(check.psd, check.min_eigenvalue, rule)


@dataclass(frozen=True, eq=False)
class KadisonSchwarzDisplays:
    square: np.ndarray
    image_of_square: np.ndarray
    square_of_image: np.ndarray
    # M^2 = domain_part + off_diagonal with domain_part in T_n
    domain_part: np.ndarray
    off_diagonal: np.ndarray
    # Gamma_n(M)^2 - Gamma_n(domain_part); any positive extension Psi of Gamma_n
    # has Psi(off_diagonal) >= forced_lower
    forced_lower: np.ndarray
    residual: float


def kadison_schwarz_displays(A, c: complex, d: float) -> KadisonSchwarzDisplays:
    """M^2, Psi(M^2) and Psi(M)^2 for M = (A, conj(c) I; cI, dI), A Hermitian.

    Each matrix is computed twice, by multiplication with the blockwise
    transpose Psi and by its closed-form blocks; ``residual`` is the largest
    entrywise gap. ``forced_lower`` uses only Gamma_n: the inequality
    Psi(M^2) >= Psi(M)^2 for an extension Psi reads
    Psi(off_diagonal) >= Gamma_n(M)^2 - Gamma_n(domain_part), and the closed
    form of that bound is (0, cbar A^t; cA^t, 0).
    """
    A = np.asarray(A, dtype=np.complex128)
    if asymmetry(A) > config.TOL_IDENTITY:
        raise NotHermitian("A must be Hermitian")
    n = A.shape[0]
    c, d = complex(c), float(d)
    cbar = c.conjugate()
    eye = np.eye(n, dtype=np.complex128)
    zero = np.zeros_like(eye)
    At = A.T
    abs_c2 = abs(c) ** 2

    M = block2x2(A, cbar * eye, c * eye, d * eye)
    square = M @ M
    image_of_square = blockwise_transpose(square)
    image = blockwise_transpose(M)
    square_of_image = image @ image

    corner = (abs_c2 + d**2) * eye
    square_f = block2x2(
        A @ A + abs_c2 * eye, cbar * (A + d * eye), c * (A + d * eye), corner
    )
    off_diagonal_t = block2x2(zero, cbar * At, c * At, zero)
    image_of_square_f = (
        block2x2(At @ At + abs_c2 * eye, cbar * d * eye, c * d * eye, corner)
        + off_diagonal_t
    )
    square_of_image_f = block2x2(
        At @ At + abs_c2 * eye,
        cbar * (At + d * eye),
        c * (At + d * eye),
        corner,
    )

    TL, _, _, BR = split_blocks(square)
    domain_part = block2x2(TL, cbar * d * eye, c * d * eye, BR)
    off_diagonal = square - domain_part
    gamma = MapId(MapKind.GAMMA, n)
    gamma_image = apply(gamma, M)
    forced_lower = gamma_image @ gamma_image - apply(gamma, domain_part)

    residual = max(
        _max_abs(square - square_f),
        _max_abs(image_of_square - image_of_square_f),
        _max_abs(square_of_image - square_of_image_f),
        _max_abs(forced_lower - off_diagonal_t),
    )
    return KadisonSchwarzDisplays(
        square,
        image_of_square,
        square_of_image,
        domain_part,
        off_diagonal,
        forced_lower,
        residual,
    )


def _swap_bc_sample(n: int, rng: np.random.Generator):
    A = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2 * n)
    b, c, d = (complex(rng.normal(), rng.normal()) for _ in range(3))
    return A, b, c, d


def swap_bc_singular_check(n: int, trials: int, rng_seed: int) -> float:
    """Max l-infinity gap between the singular values of (A, bI; cI, dI) and
    (A, cI; bI, dI) over random draws."""
    eye = np.eye(n, dtype=np.complex128)
    worst = 0.0
    for trial in range(trials):
        A, b, c, d = _swap_bc_sample(n, rng_stream(rng_seed, trial))
        M = block2x2(A, b * eye, c * eye, d * eye)
        N = block2x2(A, c * eye, b * eye, d * eye)
        gap = float(np.max(np.abs(singular_values(M) - singular_values(N))))
        worst = max(worst, gap)
    return worst


def swap_bc_char_poly_check(
    n: int, trials: int, rng_seed: int, points: int = 20
) -> float:
    """Max relative gap of p_M(lam) against p_N(lam) and the direct determinant."""
    worst = 0.0
    for trial in range(trials):
        rng = rng_stream(rng_seed, trial)
        A, b, c, d = _swap_bc_sample(n, rng)
        for lam in rng.uniform(-2.0, 6.0, size=points):
            p_m = char_poly_block_eval(A, b, c, d, lam)
            p_n = char_poly_block_eval(A, c, b, d, lam)
            direct = char_poly_direct(A, b, c, d, lam)
            scale = max(abs(direct), 1e-300)
            worst = max(worst, abs(p_m - p_n) / scale, abs(p_m - direct) / scale)
    return worst


def transpose_cb_witness(n: int) -> float:
    """||(id (x) t/4)(W)|| for the swap W = sum E_ij (x) E_ji, which equals n/4."""
    if n < 1:
        raise DimensionMismatch(f"n must be positive, got {n}")
    W = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            W[i * n + j, j * n + i] = 1.0
    return config.PHI_OFF_DIAGONAL_SCALE * operator_norm(partial_transpose(W, (n, n)))


@dataclass(frozen=True)
class CompressionReport:
    # largest |<Phi_n(M)x, y> - <Phi_k(R')xi, eta>| over the trials
    form_gap: float
    # largest |<Phi_n(M)x, y>| - ||Phi_k(R')||
    form_excess: float
    # largest ||Phi_k(R')|| - ||M||
    norm_growth: float
    largest_k: int


def _unit_vector(rng: np.random.Generator, size: int) -> np.ndarray:
    v = rng.normal(size=size) + 1j * rng.normal(size=size)
    return v / np.linalg.norm(v)


def phi_compression_check(n: int, trials: int, rng_seed: int) -> CompressionReport:
    """Replays ||Phi_n|| = 1 by compression to span{x1, x2, y1, y2}.

    For unit vectors x = x1 (+) x2, y = y1 (+) y2 and M in A_n, the form
    <Phi_n(M)x, y> equals the form of Phi_k(R') on the coordinates of x and y
    in the span. Since k <= 4, Phi_k(R') is no larger than R', so the form is
    bounded by ||M||.
    """
    m = MapId(MapKind.PHI, n)
    form_gap, form_excess, norm_growth, largest_k = 0.0, -math.inf, -math.inf, 0
    for trial in range(trials):
        rng = rng_stream(rng_seed, n, trial)
        M = embed(random_element(m.domain, (rng_seed, n, trial)))
        x, y = _unit_vector(rng, 2 * n), _unit_vector(rng, 2 * n)
        R, V = compress_to_span(M, x[:n], x[n:], y[:n], y[n:])
        frame = la.block_diag(V.matrix, V.matrix)
        xi, eta = adjoint(frame) @ x, adjoint(frame) @ y

        form = np.vdot(y, apply(m, M) @ x)
        compressed = apply(MapId(MapKind.PHI, V.k), R)
        bound = operator_norm(compressed)
        form_gap = max(form_gap, abs(form - np.vdot(eta, compressed @ xi)))
        form_excess = max(form_excess, abs(form) - bound)
        norm_growth = max(norm_growth, bound - operator_norm(M))
        largest_k = max(largest_k, V.k)
    return CompressionReport(form_gap, form_excess, norm_growth, largest_k)


def check_restriction(
    extension: MapId,
    target: MapId,
    trials: int,
    rng_seed: int,
    system: SystemId | None = None,
) -> float:
    """Largest entrywise gap between ``extension`` and ``target`` on ``system``."""
    system = system or target.domain
    worst = 0.0
    for trial in range(trials):
        M = embed(random_element(system, (rng_seed, trial)))
        gap = _max_abs(apply(extension, M) - apply(target, M))
        worst = max(worst, gap)
    return worst
