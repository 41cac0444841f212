from opsys._compat import StrEnum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

import opsys.config as config


class Command(StrEnum):
    VERIFY_LEMMA = "verify lemma"
    VERIFY_MAPS = "verify maps"
    VERIFY_SWAPBC = "verify swapbc"
    VERIFY_KS = "verify ks"
    NORM = "norm"
    CERTIFY = "certify"
    SUITE = "suite"


class OutputFormat(StrEnum):
    TEXT = "text"
    JSON = "json"
    CSV = "csv"


Status = Literal["pass", "fail", "inconclusive"]

# row-major matrix of [re, im] pairs
Witness = list[list[tuple[float, float]]]


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Command
    n: list[int] = Field(min_length=1)
    field: Literal["real", "complex", "both"] = "both"
    trials: int = Field(default=config.DEFAULT_TRIALS, ge=1)
    restarts: int = Field(default=config.DEFAULT_RESTARTS, ge=1)
    seed: int = config.DEFAULT_SEED
    tol_identity: float = Field(default=config.TOL_IDENTITY, gt=0)
    tol_psd: float = Field(default=config.TOL_PSD, gt=0)
    output: OutputFormat = OutputFormat.TEXT
    output_path: str | None = None
    map: Literal["phi", "upsilon", "upsilon-prime", "gamma"] | None = None
    which: Literal["phi", "upsilon", "gamma"] | None = None

    @field_validator("n")
    @classmethod
    def sizes_in_range(cls, value: list[int]) -> list[int]:
        outside = [n for n in value if not 1 <= n <= config.MAX_N]
        if outside:
            raise ValueError(f"sizes must lie in 1..{config.MAX_N}, got {outside}")
        return value

    @model_validator(mode="after")
    def command_arguments(self) -> "RunConfig":
        if self.command is Command.NORM and self.map is None:
            raise ValueError("norm needs --map")
        if self.command is Command.CERTIFY and self.which is None:
            raise ValueError("certify needs --which")
        return self


class ClaimRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    anchor: str
    n: int | None = None
    status: Status
    residual: float | None = None
    witness: Witness | None = None
    detail: str | None = None

    @field_validator("anchor")
    @classmethod
    def known_anchor(cls, value: str) -> str:
        if value not in config.CLAIM_ANCHORS:
            raise ValueError(f"unknown claim anchor {value!r}")
        return value

    @field_validator("residual")
    @classmethod
    def finite_residual(cls, value: float | None) -> float | None:
        if value is not None and not np.isfinite(value):
            raise ValueError("residual must be finite")
        return value


class Report(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: str = config.VERSION
    config: RunConfig
    claims: list[ClaimRecord] = []
    duration_seconds: float = 0.0

    def count(self, status: Status) -> int:
        return sum(1 for claim in self.claims if claim.status == status)

    @property
    def exit_code(self) -> int:
        return 1 if self.count("fail") else 0


def matrix_to_witness(M: np.ndarray) -> Witness:
    M = np.asarray(M)
    return [[(float(z.real), float(z.imag)) for z in row] for row in M]


def witness_to_matrix(witness: Witness) -> np.ndarray:
    values = np.array(witness, dtype=np.float64)
    if values.size == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    return values[..., 0] + 1j * values[..., 1]
