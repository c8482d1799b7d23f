"""Domain types: signal classes, problem dimensions, noise, and Omega.

The detection problem observes x = s + n (signal present) or x = n
(noise only), where s is one of I known deterministic signals collected
row-wise in an I x N matrix S. Omega = S^T S = sum_i s_i s_i^T drives
every design procedure in the package.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .linalg import sym_eig

RANK_TOL = 1e-10


class Penalty(enum.Enum):
    """Row-sparsity penalty applied to the collaboration matrix."""

    NONE = "none"
    L0 = "l0"
    L1 = "l1"


@dataclass(frozen=True)
class SignalClass:
    """The I known deterministic signals, stacked as an I x N matrix."""

    signals: np.ndarray

    def __post_init__(self) -> None:
        s = np.atleast_2d(np.asarray(self.signals, dtype=float))
        if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
            raise ValueError(f"signals must be a nonempty 2-D array, got shape {s.shape}")
        if not np.isfinite(s).all():
            raise ValueError("signals must be finite")
        object.__setattr__(self, "signals", s)

    @property
    def count(self) -> int:
        return self.signals.shape[0]

    @property
    def dimension(self) -> int:
        return self.signals.shape[1]

    @property
    def energy(self) -> float:
        """Sum of squared signal norms, the Cauchy-Schwarz ceiling on C-DC."""
        return float(np.sum(self.signals * self.signals))


@dataclass(frozen=True)
class Omega:
    """Symmetric positive-semidefinite N x N matrix sum_i s_i s_i^T."""

    matrix: np.ndarray
    rank_estimate: int

    def __post_init__(self) -> None:
        a = np.asarray(self.matrix, dtype=float)
        scale = max(1.0, float(np.abs(a).max()))
        if float(np.abs(a - a.T).max()) > 1e-12 * scale:
            raise ValueError("Omega must be symmetric")
        object.__setattr__(self, "matrix", a)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class NoiseModel:
    """Additive white Gaussian noise with standard deviation sigma."""

    sigma: float = 1.0

    def __post_init__(self) -> None:
        if not (self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class DesignSpec:
    """Dimensions and penalty weights for one collaboration design.

    gammas holds the per-row cost penalties; y_diag is the diagonal of the
    scaling matrix Y in the penalized problems (identity by default, the
    setting used by every reported experiment).
    """

    N: int
    M: int
    gammas: np.ndarray = field(default=None)  # type: ignore[assignment]
    penalty: Penalty = Penalty.NONE
    y_diag: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if not (1 <= self.M <= self.N):
            raise ValueError(f"need 1 <= M <= N, got M={self.M}, N={self.N}")
        g = self.gammas
        g = np.zeros(self.M) if g is None else np.asarray(g, dtype=float) * np.ones(self.M)
        if g.shape != (self.M,):
            raise ValueError(f"gammas must have length M={self.M}")
        if (g < 0).any():
            raise ValueError("penalties must be nonnegative")
        y = self.y_diag
        y = np.ones(self.M) if y is None else np.asarray(y, dtype=float) * np.ones(self.M)
        if y.shape != (self.M,) or (y <= 0).any():
            raise ValueError("y_diag must be a length-M positive vector")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "y_diag", y)


def generate_signal_class(I: int, N: int, seed) -> SignalClass:
    """Draw an I x N signal class with i.i.d. standard-normal entries.

    Deterministic for a fixed seed; seed may be anything accepted by
    numpy's default_rng (integer or tuple).
    """
    if I < 1 or N < 1:
        raise ValueError(f"need I >= 1 and N >= 1, got I={I}, N={N}")
    rng = np.random.default_rng(seed)
    return SignalClass(signals=rng.standard_normal((I, N)))


def build_omega(signal_class: SignalClass) -> Omega:
    """Form Omega = S^T S, symmetrized, with its numerical rank."""
    s = signal_class.signals
    omega = s.T @ s
    omega = 0.5 * (omega + omega.T)
    values = sym_eig(omega).values
    lam_max = float(values[0]) if values.size else 0.0
    rank = int(np.sum(values > RANK_TOL * max(lam_max, 0.0))) if lam_max > 0 else 0
    return Omega(matrix=omega, rank_estimate=rank)
