"""Model parameters for the driven collective spin."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the driven-dissipative collective spin.

    All rates are expressed in units of the single-atom decay rate
    ``gamma`` (kept as an explicit field but fixed to 1 by convention).
    ``n_atoms`` is the atom number N, or the effective atom number when
    modeling an extended cloud through its diffraction mode.
    """

    n_atoms: int
    rabi: float
    detuning: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.rabi < 0:
            raise ValueError(f"rabi must be >= 0, got {self.rabi}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")

    @property
    def beta(self) -> float:
        """Drive-to-collective-dissipation ratio 2*rabi/(N*gamma)."""
        return 2.0 * self.rabi / (self.n_atoms * self.gamma)

    @property
    def spin(self) -> float:
        """Total spin S = N/2 of the symmetric ladder."""
        return self.n_atoms / 2.0
