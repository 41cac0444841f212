"""Dense matrix oracles shared by every other module.

Matrices are plain ``numpy.ndarray`` values. The field is carried by the dtype:
``float64`` for the real field and ``complex128`` for the complex field.
Eigenvalue decisions always go through the Hermitian LAPACK driver
(``scipy.linalg.eigh``); no general nonsymmetric solver is used for positivity.
"""

import logging
import warnings
from dataclasses import dataclass
from opsys._compat import StrEnum
from typing import NamedTuple

import numpy as np
import scipy.linalg as la

import opsys.config as config
from opsys.errors import (
    DimensionMismatch,
    DomainViolation,
    FieldMismatch,
    IndexOutOfRange,
    NotHermitian,
    ZeroSpan,
)

logger = logging.getLogger("opsys")


class Field(StrEnum):
    REAL = "real"
    COMPLEX = "complex"

    @property
    def dtype(self) -> type[np.floating] | type[np.complexfloating]:
        return np.float64 if self is Field.REAL else np.complex128


def field_of(M: np.ndarray) -> Field:
    return Field.COMPLEX if np.iscomplexobj(M) else Field.REAL


def as_field(M, field: Field) -> np.ndarray:
    """Copy ``M`` into ``field``; refuses to drop nonzero imaginary parts."""
    M = np.asarray(M)
    if field is Field.REAL:
        if np.iscomplexobj(M):
            if np.any(M.imag != 0):
                raise FieldMismatch("Cannot drop nonzero imaginary parts")
            M = M.real
        return np.array(M, dtype=np.float64)
    return np.array(M, dtype=np.complex128)


def require_square(M, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    return M


def identity(n: int, field: Field = Field.REAL) -> np.ndarray:
    return np.eye(n, dtype=field.dtype)


def adjoint(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def asymmetry(M: np.ndarray) -> float:
    """Largest entry of |M - M*|."""
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M - adjoint(M))))


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return (M + adjoint(M)) / 2


def hermitian_eigenvalues(M, tol: float = config.TOL_IDENTITY) -> np.ndarray:
    """Ascending eigenvalues (with multiplicity) of a Hermitian matrix."""
    M = require_square(M)
    defect = asymmetry(M)
    if defect > tol:
        raise NotHermitian(f"Matrix is not Hermitian: max |M - M*| = {defect:.3e}")
    return la.eigh(hermitian_part(M), eigvals_only=True)


def singular_values(M) -> np.ndarray:
    """Descending singular values."""
    M = require_square(M)
    if M.size == 0:
        return np.zeros(0)
    return la.svdvals(M)


def operator_norm(M) -> float:
    values = singular_values(M)
    return float(values[0]) if values.size else 0.0


class PsdCheck(NamedTuple):
    psd: bool
    min_eigenvalue: float
    asymmetry: float
    reason: str | None


def is_psd(M, tol: float = config.TOL_PSD) -> PsdCheck:
    """PSD decision on the Hermitian part, reporting the asymmetry separately.

    ``min_eigenvalue`` is always the smallest eigenvalue of (M + M*)/2, so a
    non-Hermitian input still reports a usable number.
    """
    M = require_square(M)
    defect = asymmetry(M)
    if M.size == 0:
        return PsdCheck(True, 0.0, 0.0, None)
    eigenvalues = la.eigh(hermitian_part(M), eigvals_only=True)
    min_eig = float(eigenvalues[0])

    if defect > tol:
        return PsdCheck(False, min_eig, defect, "not-hermitian")
    if min_eig < -tol:
        return PsdCheck(False, min_eig, defect, "negative-eigenvalue")
    return PsdCheck(True, min_eig, defect, None)


def matrix_unit(n: int, i: int, j: int, field: Field = Field.REAL) -> np.ndarray:
    """E_ij in M_n with 1-based indices."""
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexOutOfRange(f"E_({i},{j}) is not defined in M_{n}")
    E = np.zeros((n, n), dtype=field.dtype)
    E[i - 1, j - 1] = 1
    return E


def block2x2(A, B, C, D) -> np.ndarray:
    blocks = [require_square(X, name) for X, name in zip((A, B, C, D), "ABCD")]
    sizes = {X.shape[0] for X in blocks}
    if len(sizes) != 1:
        raise DimensionMismatch(
            f"Blocks must share one size, got {[X.shape for X in blocks]}"
        )
    fields = {field_of(X) for X in blocks}
    if len(fields) != 1:
        raise FieldMismatch("Blocks mix real and complex entries")
    return np.block([[blocks[0], blocks[1]], [blocks[2], blocks[3]]])


def split_blocks(M) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    M = require_square(M)
    if M.shape[0] % 2:
        raise DimensionMismatch(f"Expected an even dimension, got {M.shape[0]}")
    n = M.shape[0] // 2
    return M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]


def lu_determinant(K) -> complex:
    """Determinant from an LU factorization with partial pivoting."""
    K = require_square(K)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", la.LinAlgWarning)
        lu, piv = la.lu_factor(K)
    swaps = np.count_nonzero(piv != np.arange(piv.size))
    sign = -1.0 if swaps % 2 else 1.0
    return complex(sign * np.prod(np.diag(lu)))


def char_poly_block_eval(
    A, b: complex, c: complex, d: complex, lam: complex
) -> complex:
    """det(M*M - lam I) for M = (A, bI; cI, dI) through an n x n determinant.

    The lower-right block of M*M - lam I is scalar, so the 2n x 2n determinant
    collapses to det(X D - Y Z) of the block entries.
    """
    A = require_square(A, "A").astype(np.complex128)
    n = A.shape[0]
    A_star = adjoint(A)
    b, c, d, lam = complex(b), complex(c), complex(d), complex(lam)
    abs_b2, abs_c2, abs_d2 = abs(b) ** 2, abs(c) ** 2, abs(d) ** 2

    K = (
        A_star @ A * (abs_d2 - lam)
        - A * (b.conjugate() * c.conjugate() * d)
        - A_star * (b * c * d.conjugate())
        + (abs_b2 * abs_c2 - lam * (abs_c2 + abs_b2 + abs_d2) + lam**2) * np.eye(n)
    )
    return lu_determinant(K)


def char_poly_direct(A, b: complex, c: complex, d: complex, lam: complex) -> complex:
    A = require_square(A, "A").astype(np.complex128)
    n = A.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    M = block2x2(A, b * eye, c * eye, d * eye)
    return lu_determinant(adjoint(M) @ M - lam * np.eye(2 * n))


@dataclass(frozen=True)
class Isometry:
    matrix: np.ndarray

    def __post_init__(self):
        V = self.matrix
        if V.ndim != 2 or V.shape[1] > V.shape[0]:
            raise DimensionMismatch(
                f"An isometry needs shape n x k with k <= n, got {V.shape}"
            )
        gram = adjoint(V) @ V - np.eye(V.shape[1])
        defect = float(np.max(np.abs(gram))) if V.size else 0.0
        if defect > config.TOL_ISOMETRY:
            raise DimensionMismatch(
                f"Columns are not orthonormal (defect {defect:.3e})"
            )

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> int:
        return self.matrix.shape[1]

    @property
    def projection(self) -> np.ndarray:
        # conj(V) V^t, the projection compressing the blocks in the n x n frame
        return self.matrix.conj() @ self.matrix.T


def orthonormal_basis(vectors, drop: float = config.GRAM_SCHMIDT_DROP) -> np.ndarray:
    """Modified Gram-Schmidt with one reorthogonalization pass.

    Columns whose residual norm falls below ``drop`` are discarded.
    """
    basis: list[np.ndarray] = []
    for v in vectors:
        w = np.array(v, dtype=np.result_type(v, np.float64))
        for _ in range(2):
            for q in basis:
                w = w - (q.conj() @ w) * q
        norm = float(np.linalg.norm(w))
        if norm < drop:
            continue
        basis.append(w / norm)

    if not basis:
        raise ZeroSpan("All spanning vectors are numerically zero")
    return np.column_stack(basis)


def compress_to_span(
    M, x1, x2, y1, y2, tol: float = config.TOL_MEMBERSHIP
) -> tuple[np.ndarray, Isometry]:
    """Compress (aI, B; C, dI) to span{x1, x2, y1, y2}.

    Returns R' = (aI_k, V^t B conj(V); V^t C conj(V), dI_k) and the isometry V.
    R' is a compression of M by diag(conj(V), conj(V)), so ||R'|| <= ||M||.
    """
    A, B, C, D = split_blocks(M)
    n = A.shape[0]
    a, d = A[0, 0], D[0, 0]
    eye = np.eye(n)
    if np.max(np.abs(A - a * eye)) > tol or np.max(np.abs(D - d * eye)) > tol:
        raise DomainViolation("Diagonal blocks must be scalar multiples of I_n")

    vectors = [np.asarray(v) for v in (x1, x2, y1, y2)]
    if any(v.shape != (n,) for v in vectors):
        raise DimensionMismatch(f"Spanning vectors must have length {n}")

    V = orthonormal_basis(vectors)
    V = V.astype(np.result_type(V, M))
    k = V.shape[1]
    eye_k = np.eye(k, dtype=V.dtype)
    R_prime = block2x2(
        a * eye_k,
        (V.T @ B @ V.conj()).astype(V.dtype),
        (V.T @ C @ V.conj()).astype(V.dtype),
        d * eye_k,
    )

    growth = operator_norm(R_prime) - operator_norm(M)
    if growth > 1e-9:
        logger.warning(f"Compression increased the norm by {growth:.3e}")

    return R_prime, Isometry(V)
