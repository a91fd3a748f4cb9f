from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np


class Provenance(str, enum.Enum):
    NU_MOMENTS = "nu_moments"
    MU_MOMENTS = "mu_moments"
    OMEGA_MOMENTS = "omega_moments"
    KERNEL_COEFFICIENTS = "kernel_coefficients"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class MomentSequence:
    """Finite prefix ``m_0..m_N`` of a real sequence, tagged with where it came from."""

    values: np.ndarray
    provenance: Provenance = Provenance.CUSTOM
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("moment sequence needs at least one value")
        if not np.all(np.isfinite(v)):
            raise ValueError("moment sequence values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @classmethod
    def of(cls, values: Iterable[float], provenance: str | Provenance = Provenance.CUSTOM) -> MomentSequence:
        return cls(np.fromiter(values, dtype=float), Provenance(provenance))

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, n):
        return self.values[n]

    def __iter__(self) -> Iterator[float]:
        return iter(self.values.tolist())

    @property
    def N(self) -> int:
        return self.values.size - 1
