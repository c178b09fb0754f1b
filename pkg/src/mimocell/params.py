"""System parameters shared by the analytic, geometry and simulation layers."""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

__all__ = ["Arch", "SystemParams", "parse_snr", "db_to_linear"]


class Arch(str, Enum):
    """Network architecture under study."""

    MMIMO = "mmimo"
    SMALLCELL = "smallcell"

    def __str__(self):
        return self.value


def db_to_linear(db: float) -> float:
    return 10.0 ** (float(db) / 10.0)


_DB_RE = re.compile(r"^\s*([-+]?[0-9.eE+-]+)\s*dB\s*$", re.IGNORECASE)


def parse_snr(value) -> float:
    """Parse an SNR given as a linear number, ``"15dB"`` or ``"inf"``."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    match = _DB_RE.match(text)
    if match:
        return db_to_linear(float(match.group(1)))
    if text.lower() in ("inf", "infinity", "sir"):
        return math.inf
    return float(text)


@dataclass(frozen=True)
class SystemParams:
    """Network parameters.

    Attributes
    ----------
    m_antennas : int
        Antennas per M-MIMO base station; the small-cell network deploys the
        same antennas as ``m_antennas * lambda_b`` single-antenna APs.
    lambda_b, lambda_u : float
        M-MIMO base-station density and user density per unit area.
    mu : float
        Path-loss exponent, > 2.
    snr : float
        Per-antenna transmit power over noise power, linear. ``inf`` denotes
        the interference-limited (noise-free) case.
    """

    m_antennas: int = 64
    lambda_b: float = 1.0
    lambda_u: float = 1.0
    mu: float = 3.7
    snr: float = math.inf

    def __post_init__(self):
        m = self.m_antennas
        if isinstance(m, float) and m.is_integer():
            object.__setattr__(self, "m_antennas", int(m))
        if not isinstance(self.m_antennas, int) or self.m_antennas < 1:
            raise DomainError(f"m_antennas must be an integer >= 1, got {m!r}")
        for name in ("lambda_b", "lambda_u"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise DomainError(f"{name} must be finite and > 0, got {val}")
        if not (self.mu > 2):
            raise DomainError(f"mu must exceed 2, got {self.mu}")
        if math.isnan(self.snr) or self.snr <= 0:
            raise DomainError(f"snr must be > 0 (inf allowed), got {self.snr}")

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def bs_density(self, arch: Arch | str) -> float:
        """Transmitter density of the given architecture."""
        arch = Arch(arch)
        if arch is Arch.MMIMO:
            return self.lambda_b
        return self.m_antennas * self.lambda_b

    def load(self, arch: Arch | str) -> float:
        """Users per transmitter, ``lambda_u / bs_density(arch)``."""
        return self.lambda_u / self.bs_density(arch)

    @property
    def noise_to_power(self) -> float:
        """``sigma_n**2 / P_T``; zero in the interference-limited case."""
        return 0.0 if math.isinf(self.snr) else 1.0 / self.snr

    @property
    def interference_limited(self) -> bool:
        return math.isinf(self.snr)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)
