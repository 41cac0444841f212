"""The operator systems A_n, S_n, S'_n, T_n and R_n inside M_2(M_n).

Every element is stored by its parameters and realized as a 2n x 2n matrix
with ``embed``:

    A_n          (aI, B; C, dI)       a, d, B, C complex
    S_n, S'_n    (aI, C; C^t, bI)     real (S_n) or complex (S'_n)
    T_n, R_n     (A, bI; cI, dI)      complex (T_n) or real (R_n)
"""

import logging
import math
from dataclasses import dataclass, fields
from opsys._compat import StrEnum

import numpy as np

import opsys.config as config
from opsys.errors import DimensionMismatch, DomainViolation, FieldMismatch
from opsys.linalg import (
    Field,
    adjoint,
    as_field,
    asymmetry,
    block2x2,
    hermitian_part,
    is_psd,
    operator_norm,
    require_square,
    split_blocks,
)
from opsys.utils import Seed, rng_stream, supports

logger = logging.getLogger("opsys")


class SystemKind(StrEnum):
    A = "A"
    S = "S"
    S_PRIME = "S'"
    T = "T"
    R = "R"


FIELD_OF_KIND = {
    SystemKind.A: Field.COMPLEX,
    SystemKind.S: Field.REAL,
    SystemKind.S_PRIME: Field.COMPLEX,
    SystemKind.T: Field.COMPLEX,
    SystemKind.R: Field.REAL,
}


@dataclass(frozen=True)
class SystemId:
    kind: SystemKind
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", SystemKind(self.kind))
        if self.n < 1:
            raise DimensionMismatch(f"System size must be positive, got n={self.n}")

    @property
    def field(self) -> Field:
        return FIELD_OF_KIND[self.kind]

    @property
    def dim(self) -> int:
        return 2 * self.n

    def __str__(self) -> str:
        return f"{self.kind}_{self.n}"


@dataclass(frozen=True, eq=False)
class ScalarCornerParams:
    """(aI, B; C, dI), the parameters of A_n."""

    a: complex
    d: complex
    B: np.ndarray
    C: np.ndarray


@dataclass(frozen=True, eq=False)
class TransposePairParams:
    """(aI, C; C^t, bI), the parameters of S_n and S'_n."""

    a: complex
    b: complex
    C: np.ndarray


@dataclass(frozen=True, eq=False)
class ScalarTailParams:
    """(A, bI; cI, dI), the parameters of T_n and R_n."""

    A: np.ndarray
    b: complex
    c: complex
    d: complex


Params = ScalarCornerParams | TransposePairParams | ScalarTailParams

PARAMS_OF_KIND = {
    SystemKind.A: ScalarCornerParams,
    SystemKind.S: TransposePairParams,
    SystemKind.S_PRIME: TransposePairParams,
    SystemKind.T: ScalarTailParams,
    SystemKind.R: ScalarTailParams,
}


def _coerce_scalar(value, field: Field, name: str):
    value = complex(value)
    if field is Field.REAL:
        if value.imag != 0:
            raise FieldMismatch(f"Parameter {name} must be real, got {value}")
        return float(value.real)
    return value


def _coerce_block(value, field: Field, n: int, name: str) -> np.ndarray:
    block = require_square(value, name)
    if block.shape != (n, n):
        raise DimensionMismatch(f"Block {name} must be {n}x{n}, got {block.shape}")
    try:
        return as_field(block, field)
    except FieldMismatch as e:
        raise FieldMismatch(f"Block {name} must be real") from e


@dataclass(frozen=True, eq=False)
class SystemElement:
    system: SystemId
    params: Params

    def __post_init__(self):
        expected = PARAMS_OF_KIND[self.system.kind]
        if not isinstance(self.params, expected):
            raise DomainViolation(
                f"{self.system} takes {expected.__name__}, "
                f"got {type(self.params).__name__}"
            )
        field, n = self.system.field, self.system.n
        coerced = {}
        for f in fields(self.params):
            value = getattr(self.params, f.name)
            if f.name.isupper():
                coerced[f.name] = _coerce_block(value, field, n, f.name)
            else:
                coerced[f.name] = _coerce_scalar(value, field, f.name)
        object.__setattr__(self, "params", expected(**coerced))

    @property
    def kind(self) -> SystemKind:
        return self.system.kind

    def __eq__(self, other) -> bool:
        if not isinstance(other, SystemElement):
            return NotImplemented
        return self.system == other.system and np.array_equal(
            embed(self), embed(other)
        )

    __hash__ = None


def element(system: SystemId, **params) -> SystemElement:
    """Build an element from keyword parameters, e.g. element(s, a=1, b=1, C=C)."""
    return SystemElement(system, PARAMS_OF_KIND[system.kind](**params))


def embed(e: SystemElement) -> np.ndarray:
    n, field = e.system.n, e.system.field
    eye = np.eye(n, dtype=field.dtype)
    p = e.params
    match e.kind:
        case SystemKind.A:
            return block2x2(p.a * eye, p.B, p.C, p.d * eye)
        case SystemKind.S | SystemKind.S_PRIME:
            return block2x2(p.a * eye, p.C, p.C.T, p.b * eye)
        case SystemKind.T | SystemKind.R:
            return block2x2(p.A, p.b * eye, p.c * eye, p.d * eye)


def _require_carrier(s: SystemId, M) -> np.ndarray:
    M = require_square(M)
    if M.shape != (s.dim, s.dim):
        raise DimensionMismatch(f"{s} lives in {s.dim}x{s.dim}, got {M.shape}")
    return M


def _scalar_defect(X: np.ndarray, value) -> float:
    return float(np.max(np.abs(X - value * np.eye(X.shape[0]))))


def contains(s: SystemId, M, tol: float = config.TOL_MEMBERSHIP) -> bool:
    M = _require_carrier(s, M)
    if s.field is Field.REAL and np.iscomplexobj(M) and np.max(np.abs(M.imag)) > tol:
        return False

    A, B, C, D = split_blocks(M)
    match s.kind:
        case SystemKind.A:
            defects = [_scalar_defect(A, A[0, 0]), _scalar_defect(D, D[0, 0])]
        case SystemKind.S | SystemKind.S_PRIME:
            defects = [
                _scalar_defect(A, A[0, 0]),
                _scalar_defect(D, D[0, 0]),
                float(np.max(np.abs(C - B.T))),
            ]
        case SystemKind.T | SystemKind.R:
            defects = [
                _scalar_defect(B, B[0, 0]),
                _scalar_defect(C, C[0, 0]),
                _scalar_defect(D, D[0, 0]),
            ]
    return max(defects) <= tol


def extract(s: SystemId, M, tol: float = config.TOL_MEMBERSHIP) -> SystemElement:
    """Inverse of ``embed``: read the parameters back out of a matrix."""
    if not contains(s, M, tol):
        raise DomainViolation(f"Matrix does not lie in {s}")
    M = np.asarray(M)
    if s.field is Field.REAL:
        M = M.real
    A, B, C, D = split_blocks(M)
    match s.kind:
        case SystemKind.A:
            return element(s, a=A[0, 0], d=D[0, 0], B=B, C=C)
        case SystemKind.S | SystemKind.S_PRIME:
            return element(s, a=A[0, 0], b=D[0, 0], C=B)
        case SystemKind.T | SystemKind.R:
            return element(s, A=A, b=B[0, 0], c=C[0, 0], d=D[0, 0])


def _clause_slacks(e: SystemElement) -> list[float]:
    """Signed slack of every clause of the closed-form criterion.

    Positive slack means the clause holds. The first entry is always the
    self-adjointness defect (negated).
    """
    p = e.params
    match e.kind:
        case SystemKind.S | SystemKind.S_PRIME:
            defect = max(abs(p.a.imag), abs(p.b.imag), float(np.max(np.abs(p.C.imag))))
            a, b = p.a.real, p.b.real
            root = math.sqrt(max(a, 0.0) * max(b, 0.0))
            return [-defect, a, b, root - operator_norm(p.C)]
        case SystemKind.T | SystemKind.R:
            defect = max(abs(p.c - p.b.conjugate()), abs(p.d.imag), asymmetry(p.A))
            A = hermitian_part(p.A)
            d = p.d.real
            min_a = float(np.linalg.eigvalsh(A)[0])
            tail = d * A - abs(p.b) ** 2 * np.eye(A.shape[0])
            min_tail = float(np.linalg.eigvalsh(tail)[0]) if d > 0 else -abs(p.b)
            return [-defect, d, min_a, min_tail]
    raise DomainViolation(f"No closed-form criterion for {e.system}")


@supports(SystemKind.S, SystemKind.S_PRIME, SystemKind.T, SystemKind.R)
def is_positive_by_criterion(e: SystemElement, tol: float = config.TOL_PSD) -> bool:
    """Closed-form positivity for the two block patterns with scalar corners.

    (aI, C; C^t, bI) >= 0  iff  a >= 0, b >= 0 and ||C|| <= sqrt(ab)
    (A, bI; cI, dI) >= 0   iff  A >= 0, c = conj(b), d >= 0 and dA >= |b|^2 I
    """
    p = e.params
    match e.kind:
        case SystemKind.S | SystemKind.S_PRIME:
            # S'_n elements need a real embedding before any positivity claim
            if abs(p.a.imag) > tol or abs(p.b.imag) > tol:
                return False
            if np.max(np.abs(p.C.imag)) > tol:
                return False
            a, b = p.a.real, p.b.real
            if a < -tol or b < -tol:
                return False
            c_norm = operator_norm(p.C)
            ab = max(a, 0.0) * max(b, 0.0)
            if ab <= tol**2:
                return c_norm <= tol
            return c_norm <= math.sqrt(ab) + tol
        case _:
            if abs(p.c - p.b.conjugate()) > tol or abs(p.d.imag) > tol:
                return False
            d = p.d.real
            if d < -tol or not is_psd(p.A, tol).psd:
                return False
            if d <= tol:
                return abs(p.b) <= tol
            n = p.A.shape[0]
            return is_psd(d * p.A - abs(p.b) ** 2 * np.eye(n), tol).psd


@supports(SystemKind.S, SystemKind.S_PRIME, SystemKind.T, SystemKind.R)
def boundary_margin(e: SystemElement) -> float:
    """Distance of an element from the positivity decision boundary.

    Violated elements report their largest violation; satisfied elements the
    smallest slack, further capped by |lambda_min| of the embedding.
    """
    slacks = _clause_slacks(e)
    violated = [-s for s in slacks if s < 0]
    if violated:
        return max(violated)
    margin = min(slacks[1:])
    return min(margin, abs(is_psd(embed(e)).min_eigenvalue))


def _scalar(rng: np.random.Generator, field: Field, low: float, high: float):
    if field is Field.REAL:
        return rng.uniform(low, high)
    return complex(rng.uniform(low, high), rng.uniform(low, high))


def _ginibre(rng: np.random.Generator, field: Field, n: int, scale: float):
    if field is Field.REAL:
        return rng.normal(0.0, scale / math.sqrt(n), (n, n))
    std = scale / math.sqrt(2 * n)
    return rng.normal(0.0, std, (n, n)) + 1j * rng.normal(0.0, std, (n, n))


def random_element(s: SystemId, rng_seed: Seed, scale: float = 1.0) -> SystemElement:
    """Uniform scalars in [-scale, scale], Ginibre blocks of entry std scale/sqrt(n)."""
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    rng = rng_stream(rng_seed)
    field, n = s.field, s.n
    match s.kind:
        case SystemKind.A:
            return element(
                s,
                a=_scalar(rng, field, -scale, scale),
                d=_scalar(rng, field, -scale, scale),
                B=_ginibre(rng, field, n, scale),
                C=_ginibre(rng, field, n, scale),
            )
        case SystemKind.S | SystemKind.S_PRIME:
            return element(
                s,
                a=_scalar(rng, field, -scale, scale),
                b=_scalar(rng, field, -scale, scale),
                C=_ginibre(rng, field, n, scale),
            )
        case SystemKind.T | SystemKind.R:
            return element(
                s,
                A=_ginibre(rng, field, n, scale),
                b=_scalar(rng, field, -scale, scale),
                c=_scalar(rng, field, -scale, scale),
                d=_scalar(rng, field, -scale, scale),
            )


def _phase(rng: np.random.Generator, field: Field):
    if field is Field.REAL:
        return rng.choice([-1.0, 1.0])
    return np.exp(1j * rng.uniform(0.0, 2 * math.pi))


def _rescaled(C: np.ndarray, target: float) -> np.ndarray:
    norm = operator_norm(C)
    if target <= 0 or norm == 0:
        return np.zeros_like(C)
    return C * (target / norm)


def random_positive_element(
    s: SystemId, rng_seed: Seed, zero_corner: bool = False
) -> SystemElement:
    """Sample a positive element by inverting the closed-form criterion.

    ``zero_corner`` forces a = 0 (A- and S-type) or d = 0 (T-type), the
    degenerate branch of the criterion. A_n samples use (aI, B; B*, dI) with
    ||B|| <= sqrt(ad).
    """
    rng = rng_stream(rng_seed)
    field, n = s.field, s.n

    if s.kind is SystemKind.A:
        a = 0.0 if zero_corner else rng.uniform(0.0, 1.0)
        d = rng.uniform(0.0, 1.0)
        B = _ginibre(rng, field, n, 1.0)
        B = _rescaled(B, rng.uniform(0.0, 1.0) * math.sqrt(a * d))
        e = element(s, a=a, d=d, B=B, C=adjoint(B))
    elif s.kind in (SystemKind.S, SystemKind.S_PRIME):
        a = 0.0 if zero_corner else rng.uniform(0.0, 1.0)
        b = rng.uniform(0.0, 1.0)
        # positive S'_n elements are real, so C is drawn real for both kinds
        C = _ginibre(rng, Field.REAL, n, 1.0)
        C = _rescaled(C, rng.uniform(0.0, 1.0) * math.sqrt(a * b))
        e = element(s, a=a, b=b, C=C)
    else:
        G = _ginibre(rng, field, n, 1.0)
        A = hermitian_part(G @ adjoint(G))
        d = 0.0 if zero_corner else rng.uniform(0.0, 1.0)
        lam_min = max(float(np.linalg.eigvalsh(A)[0]), 0.0)
        b = rng.uniform(0.0, 1.0) * math.sqrt(d * lam_min) * _phase(rng, field)
        e = element(s, A=A, b=b, c=np.conj(b), d=d)

    check = is_psd(embed(e), config.TOL_IDENTITY)
    if not check.psd:
        raise RuntimeError(
            f"Positive sample for {s} failed the oracle "
            f"(min eigenvalue {check.min_eigenvalue:.3e})"
        )
    return e


@supports(SystemKind.S, SystemKind.S_PRIME, SystemKind.T, SystemKind.R)
def random_self_adjoint_element(s: SystemId, rng_seed: Seed) -> SystemElement:
    """Self-adjoint element near the positivity boundary.

    Roughly half of the samples are positive.
    """
    rng = rng_stream(rng_seed)
    field, n = s.field, s.n

    if s.kind in (SystemKind.S, SystemKind.S_PRIME):
        a = rng.uniform(-0.2, 1.0)
        b = rng.uniform(-0.2, 1.0)
        C = _ginibre(rng, Field.REAL, n, 1.0)
        C = _rescaled(C, rng.uniform(0.5, 1.5) * math.sqrt(max(a, 0.0) * max(b, 0.0)))
        return element(s, a=a, b=b, C=C)

    G = _ginibre(rng, field, n, 0.5)
    A = hermitian_part(G) + rng.uniform(-0.2, 1.0) * np.eye(n)
    d = rng.uniform(-0.2, 1.0)
    lam_min = max(float(np.linalg.eigvalsh(A)[0]), 0.0)
    radius = rng.uniform(0.5, 1.5) * math.sqrt(max(d, 0.0) * lam_min)
    b = radius * _phase(rng, field)
    return element(s, A=A, b=b, c=np.conj(b), d=d)


def random_full_positive(
    n: int, field: Field, rng_seed: Seed, rank_one: bool = False
) -> np.ndarray:
    """Positive matrix in M_2n: a unit rank-one projection or a Wishart sample."""
    rng = rng_stream(rng_seed)
    dim = 2 * n
    if rank_one:
        if field is Field.REAL:
            v = rng.normal(size=dim)
        else:
            v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        v = v / np.linalg.norm(v)
        return np.outer(v, v.conj()).astype(field.dtype)
    G = _ginibre(rng, field, dim, 1.0)
    return hermitian_part(G @ adjoint(G)).astype(field.dtype)


def canonical_witness(n: int, field: Field = Field.COMPLEX) -> np.ndarray:
    """v v* for v = e_1 (+) e_2: positive, but its blockwise transpose is not."""
    if n < 2:
        raise DimensionMismatch(f"The witness needs n >= 2, got n={n}")
    v = np.zeros(2 * n, dtype=field.dtype)
    v[0] = 1
    v[n + 1] = 1
    return np.outer(v, v.conj())


def full_positive_sample(n: int, field: Field, rng_seed: int, trial: int) -> np.ndarray:
    """Trial ``trial`` of the positive samples of M_2n.

    The canonical witness comes first (n >= 2), then rank-one projections and
    Wishart samples alternate.
    """
    if trial == 0 and n >= 2:
        return canonical_witness(n, field)
    return random_full_positive(n, field, (rng_seed, trial), rank_one=trial % 2 == 1)


def element_parameters(e: SystemElement) -> np.ndarray:
    """Flatten the parameters into a real vector (real and imaginary parts)."""
    parts = []
    for f in fields(e.params):
        value = np.ravel(np.asarray(getattr(e.params, f.name)))
        parts.append(value.real)
        if e.system.field is Field.COMPLEX:
            parts.append(value.imag)
    return np.concatenate(parts)


def element_from_parameters(s: SystemId, x: np.ndarray) -> SystemElement:
    complex_field = s.field is Field.COMPLEX
    n = s.n
    params = {}
    offset = 0
    for f in fields(PARAMS_OF_KIND[s.kind]):
        size = n * n if f.name.isupper() else 1
        chunk = x[offset : offset + size]
        offset += size
        if complex_field:
            chunk = chunk + 1j * x[offset : offset + size]
            offset += size
        params[f.name] = chunk.reshape(n, n) if f.name.isupper() else chunk[0]
    if offset != x.size:
        raise DimensionMismatch(f"{s} takes {offset} parameters, got {x.size}")
    return element(s, **params)


def parameter_count(s: SystemId) -> int:
    per_entry = 2 if s.field is Field.COMPLEX else 1
    total = 0
    for f in fields(PARAMS_OF_KIND[s.kind]):
        total += s.n * s.n if f.name.isupper() else 1
    return total * per_entry
