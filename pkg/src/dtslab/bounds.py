"""RLD Cramér-Rao type bounds for the displaced thermal state family.

The family is parameterized by theta = (theta1, theta2[, N]) with complex
amplitude zeta = (theta1 + i theta2)/sqrt(2) and mean thermal photon number
N > 0.  The inverse RLD Fisher matrix has the closed forms

    2 parameters (N known):  [[N + 1/2, i/2], [-i/2, N + 1/2]]
    3 parameters:            the same block, plus (3,3) entry N(N + 1)

and the bound for a weight matrix G is

    C_R(G) = Tr G Re Jinv + Tr | sqrt(G) Im Jinv sqrt(G) |

which evaluates in closed form to 2(N + 1/2) g1 + sqrt(g1^2 - g2^2 - g3^2)
for G = [[g1+g2, g3], [g3, g1-g2]], plus g0 N(N+1) when a decoupled third
parameter with weight g0 is present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, NumericalError
from .linalg import PSD_EIGENVALUE_TOL, sqrt_psd, trace_norm

_SQRT2 = math.sqrt(2.0)
_OFF_BLOCK_TOL = 1e-12


@dataclass(frozen=True)
class ThetaPoint:
    """Parameter point (theta1, theta2, n_mean) with zeta = (theta1 + i theta2)/sqrt(2)."""

    theta1: float
    theta2: float
    n_mean: float

    def __post_init__(self):
        if not (self.n_mean > 0):
            raise DomainError(f"n_mean must be positive (state degenerates at 0), got {self.n_mean}")
        if not all(map(math.isfinite, (self.theta1, self.theta2, self.n_mean))):
            raise DomainError("theta components must be finite")

    @property
    def zeta(self) -> complex:
        return complex(self.theta1, self.theta2) / _SQRT2

    @classmethod
    def from_zeta(cls, zeta: complex, n_mean: float) -> "ThetaPoint":
        zeta = complex(zeta)
        return cls(_SQRT2 * zeta.real, _SQRT2 * zeta.imag, n_mean)


class WeightMatrix:
    """Real symmetric positive semidefinite weight, dimension 2 or 3.

    For d = 2 any symmetric matrix decomposes exactly as
    G = [[g1+g2, g3], [g3, g1-g2]].  For d = 3 the closed-form bound needs
    the block form diag([[g1+g2, g3], [g3, g1-g2]], g0); off-block entries
    must vanish for :meth:`three_param_gs`.

    Strictly positive weights are the textbook setting; semidefinite ones
    (zero eigenvalues, "ignore this direction") are accepted because every
    bound formula stays finite there.
    """

    __slots__ = ("dim", "entries")

    def __init__(self, entries: np.ndarray):
        m = np.asarray(entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"weight matrix must be square, got shape {m.shape}")
        d = m.shape[0]
        if d not in (2, 3):
            raise DomainError(f"weight matrix dimension must be 2 or 3, got {d}")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > 1e-9 * scale:
            raise DomainError("weight matrix must be symmetric")
        m = (m + m.T) / 2
        w = np.linalg.eigvalsh(m)
        if w.min() < -PSD_EIGENVALUE_TOL * scale:
            raise DomainError(
                f"weight matrix must be positive semidefinite (min eigenvalue {w.min():.3e})"
            )
        self.dim = d
        self.entries = m
        self.entries.setflags(write=False)

    @classmethod
    def identity(cls, dim: int) -> "WeightMatrix":
        if dim not in (2, 3):
            raise DomainError(f"weight matrix dimension must be 2 or 3, got {dim}")
        return cls(np.eye(dim))

    @classmethod
    def from_two_param_gs(cls, g1: float, g2: float, g3: float) -> "WeightMatrix":
        return cls(np.array([[g1 + g2, g3], [g3, g1 - g2]]))

    @classmethod
    def from_three_param_gs(cls, g0: float, g1: float, g2: float, g3: float) -> "WeightMatrix":
        return cls(np.array([[g1 + g2, g3, 0.0], [g3, g1 - g2, 0.0], [0.0, 0.0, g0]]))

    def two_param_gs(self) -> tuple[float, float, float]:
        """(g1, g2, g3) of the upper 2x2 block; exact for d = 2."""
        m = self.entries
        return (
            float((m[0, 0] + m[1, 1]) / 2),
            float((m[0, 0] - m[1, 1]) / 2),
            float(m[0, 1]),
        )

    def three_param_gs(self) -> tuple[float, float, float, float]:
        """(g0, g1, g2, g3) of the block form; requires off-block entries to vanish."""
        if self.dim != 3:
            raise DomainError("three_param_gs requires a 3x3 weight matrix")
        m = self.entries
        off = max(abs(m[0, 2]), abs(m[1, 2]))
        if off > _OFF_BLOCK_TOL * max(1.0, float(np.max(np.abs(m)))):
            raise DomainError(
                f"weight matrix is not block diagonal (off-block magnitude {off:.3e}); "
                "the closed form applies only to the block form"
            )
        g1, g2, g3 = (
            float((m[0, 0] + m[1, 1]) / 2),
            float((m[0, 0] - m[1, 1]) / 2),
            float(m[0, 1]),
        )
        return float(m[2, 2]), g1, g2, g3

    def is_block_form(self) -> bool:
        if self.dim == 2:
            return True
        m = self.entries
        return max(abs(m[0, 2]), abs(m[1, 2])) <= _OFF_BLOCK_TOL * max(1.0, float(np.max(np.abs(m))))

    def __repr__(self):
        return f"WeightMatrix(dim={self.dim}, entries={self.entries.tolist()})"


class BoundKind(Enum):
    RLD_CR = "rld-cr"
    CLOSED_2PARAM = "closed-2param"
    CLOSED_3PARAM = "closed-3param"
    GAUSSIAN_OPT = "gaussian-opt"


@dataclass(frozen=True)
class BoundValue:
    """A bound value together with the inputs that produced it."""

    kind: BoundKind
    value: float
    theta: ThetaPoint | None
    weight: WeightMatrix


@dataclass(frozen=True)
class GaussianTradeoff:
    """Optimal squeezed Gaussian measurement for a 2x2 weight."""

    squeeze_r: float
    squeeze_angle: float
    achieved: float


def rld_inverse_2param(n_mean: float) -> np.ndarray:
    """Inverse RLD Fisher matrix for (theta1, theta2) at known N."""
    if not (n_mean > 0):
        raise DomainError(f"n_mean must be positive, got {n_mean}")
    return np.array(
        [[n_mean + 0.5, 0.5j], [-0.5j, n_mean + 0.5]],
        dtype=complex,
    )


def rld_inverse_3param(n_mean: float) -> np.ndarray:
    """Inverse RLD Fisher matrix for (theta1, theta2, N); the N row decouples."""
    if not (n_mean > 0):
        raise DomainError(f"n_mean must be positive, got {n_mean}")
    out = np.zeros((3, 3), dtype=complex)
    out[:2, :2] = rld_inverse_2param(n_mean)
    out[2, 2] = n_mean * (n_mean + 1.0)
    return out


def c_r_general(weight: WeightMatrix, j_inv: np.ndarray) -> BoundValue:
    """Bound from the matrix formula Tr G Re Jinv + Tr |sqrt(G) Im Jinv sqrt(G)|."""
    j_inv = np.asarray(j_inv)
    if j_inv.ndim != 2 or j_inv.shape != (weight.dim, weight.dim):
        raise DomainError(
            f"weight dimension {weight.dim} does not match matrix shape {j_inv.shape}"
        )
    scale = max(1.0, float(np.max(np.abs(j_inv))))
    if np.max(np.abs(j_inv - j_inv.conj().T)) > 1e-9 * scale:
        raise DomainError("inverse Fisher matrix must be Hermitian")
    g = weight.entries
    root = sqrt_psd(g)
    real_term = float(np.trace(g @ j_inv.real))
    imag_term = trace_norm(root @ j_inv.imag @ root)
    return BoundValue(BoundKind.RLD_CR, real_term + imag_term, None, weight)


def _closed_radical(g1: float, g2: float, g3: float) -> float:
    rad = g1 * g1 - g2 * g2 - g3 * g3
    if rad < -PSD_EIGENVALUE_TOL * max(1.0, g1 * g1):
        raise DomainError(
            f"(g1, g2, g3) = ({g1}, {g2}, {g3}) violates g1^2 >= g2^2 + g3^2 (weight not PSD)"
        )
    return math.sqrt(max(rad, 0.0))


def c_r_closed_2param(g1: float, g2: float, g3: float, n_mean: float) -> BoundValue:
    """Closed form 2(N + 1/2) g1 + sqrt(g1^2 - g2^2 - g3^2)."""
    if not (n_mean > 0):
        raise DomainError(f"n_mean must be positive, got {n_mean}")
    weight = WeightMatrix.from_two_param_gs(g1, g2, g3)
    value = 2.0 * (n_mean + 0.5) * g1 + _closed_radical(g1, g2, g3)
    return BoundValue(BoundKind.CLOSED_2PARAM, value, ThetaPoint(0.0, 0.0, n_mean), weight)


def c_r_closed_3param(g0: float, g1: float, g2: float, g3: float, n_mean: float) -> BoundValue:
    """Closed form g0 N(N+1) + 2(N + 1/2) g1 + sqrt(g1^2 - g2^2 - g3^2)."""
    if not (n_mean > 0):
        raise DomainError(f"n_mean must be positive, got {n_mean}")
    if g0 < -PSD_EIGENVALUE_TOL:
        raise DomainError(f"g0 must be nonnegative, got {g0}")
    weight = WeightMatrix.from_three_param_gs(g0, g1, g2, g3)
    value = (
        g0 * n_mean * (n_mean + 1.0)
        + 2.0 * (n_mean + 0.5) * g1
        + _closed_radical(g1, g2, g3)
    )
    return BoundValue(BoundKind.CLOSED_3PARAM, value, ThetaPoint(0.0, 0.0, n_mean), weight)


def optimal_gaussian_tradeoff(
    g1: float,
    g2: float,
    g3: float,
    n_mean: float,
    max_iterations: int = 200,
) -> GaussianTradeoff:
    """Minimize Tr G (Sigma_rho + Sigma_m) over squeezed heterodyne measurements.

    The outcome covariance is Sigma_rho + Sigma_m with Sigma_rho = (N + 1/2) I
    and Sigma_m = (1/2) R(phi) diag(e^{2r}, e^{-2r}) R(phi)^T, the added noise
    of heterodyning against a squeezed vacuum ancilla.  The rotation phi is
    chosen to diagonalize the traceless part of G; the squeeze parameter r is
    found by golden-section search.  The minimum reproduces the closed-form
    bound, which is how this model is certified.
    """
    if not (n_mean > 0):
        raise DomainError(f"n_mean must be positive, got {n_mean}")
    if not (g1 > 0):
        raise DomainError(f"g1 must be positive for the trade-off, got {g1}")
    _closed_radical(g1, g2, g3)

    anisotropy = math.hypot(g2, g3)
    phi = 0.5 * math.atan2(g3, g2)
    # rotated weight diagonal: (g1 + |g2,g3|, g1 - |g2,g3|)
    high = (g1 + anisotropy) / 2.0
    low = (g1 - anisotropy) / 2.0
    base = 2.0 * (n_mean + 0.5) * g1

    def objective(r: float) -> float:
        return base + high * math.exp(2.0 * r) + low * math.exp(-2.0 * r)

    lo, hi = -30.0, 30.0
    inv_golden = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_golden * (b - a)
    d = a + inv_golden * (b - a)
    fc, fd = objective(c), objective(d)
    iterations = 0
    while b - a > 1e-12:
        iterations += 1
        if iterations > max_iterations:
            raise NumericalError(
                f"golden-section search did not converge after {max_iterations} iterations "
                f"(bracket [{a}, {b}], g=({g1}, {g2}, {g3}), N={n_mean})"
            )
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_golden * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_golden * (b - a)
            fd = objective(d)
    r_star = (a + b) / 2.0
    achieved = objective(r_star)
    if not math.isfinite(achieved):
        raise NumericalError(f"trade-off objective is not finite at r={r_star}")
    return GaussianTradeoff(r_star, phi, achieved)


def load_weight(source: str) -> WeightMatrix:
    """Load a weight matrix from a preset name or a text file.

    Presets: "identity2", "identity3".  File format: the dimension d followed
    by d*d whitespace-separated row-major entries.
    """
    presets = {"identity2": 2, "identity3": 3}
    if source in presets:
        return WeightMatrix.identity(presets[source])
    try:
        with open(source, "r", encoding="utf-8") as fh:
            tokens = fh.read().split()
    except OSError as exc:
        raise ValueError(f"cannot read weight matrix {source!r}: {exc}") from exc
    if not tokens:
        raise ValueError(f"weight file {source!r} is empty")
    try:
        dim = int(tokens[0])
        values = [float(t) for t in tokens[1:]]
    except ValueError as exc:
        raise ValueError(f"weight file {source!r} is malformed: {exc}") from exc
    if len(values) != dim * dim:
        raise ValueError(
            f"weight file {source!r} must contain {dim * dim} entries after the dimension, "
            f"found {len(values)}"
        )
    return WeightMatrix(np.array(values).reshape(dim, dim))
