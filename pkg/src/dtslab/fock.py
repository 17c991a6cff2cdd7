"""Truncated Fock-space oracle for displaced thermal states.

This module rebuilds everything the analytic layers assume as explicit
matrices on the basis |0> ... |cutoff-1>: displaced thermal densities, the
two-mode beam-splitter unitary, the measurement probabilities, and a
finite-difference RLD Fisher matrix.  It exists to certify the closed
forms in `bounds` and the sampling laws in `states`, so it shares no
formulas with them beyond the thermal weights.

Conventions: single-mode operators are (cutoff x cutoff) complex ndarrays;
two-mode operators are (cutoff^2 x cutoff^2) ndarrays with basis index
(m, n) -> m * cutoff + n (numpy.kron order, mode 1 first).  Densities built
here have trace <= 1, with the deficit bounded by the tail functions below.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .bounds import ThetaPoint
from .errors import DomainError, NumericalError, PreconditionError
from .linalg import trace_distance

DEFAULT_TAIL_TOL = 1e-8
_DISTANCE_RULE_TOL = 1e-12  # default-cutoff target for trace-distance certifications
_CONDITION_LIMIT = 1e12


# ---------------------------------------------------------------------------
# cutoff selection
# ---------------------------------------------------------------------------

def thermal_tail(n_mean: float, cutoff: int) -> float:
    """Probability weight of a thermal state above the cutoff: (N/(N+1))^cutoff."""
    if not (n_mean > 0):
        raise DomainError(f"n_mean must be positive, got {n_mean}")
    return (n_mean / (n_mean + 1.0)) ** cutoff


def poisson_tail_bound(mean: float, cutoff: int) -> float:
    """Chernoff bound on P(X >= cutoff) for X ~ Poisson(mean)."""
    if mean < 0:
        raise DomainError(f"mean must be nonnegative, got {mean}")
    if mean == 0.0:
        return 0.0
    if cutoff <= mean:
        return 1.0
    return math.exp(-mean + cutoff * (1.0 + math.log(mean / cutoff)))


def displaced_thermal_tail_bound(n_mean: float, amplitude: float, cutoff: int) -> float:
    """Chernoff bound on the photon-count tail of a displaced thermal state.

    The count X of the state with amplitude `amplitude` and thermal number N
    has E[s^X] = exp(mu (s-1) / (1 - N(s-1))) / (1 - N(s-1)) for
    1 < s < 1 + 1/N, with mu = amplitude^2; Markov's inequality then bounds
    P(X >= cutoff) by min_s E[s^X] / s^cutoff.  Reduces to the exact thermal
    tail at zero amplitude.
    """
    if not (n_mean > 0):
        raise DomainError(f"n_mean must be positive, got {n_mean}")
    mu = float(amplitude) ** 2
    if mu == 0.0:
        return thermal_tail(n_mean, cutoff)
    best = 0.0
    for t in np.linspace(1e-4, 1.0 - 1e-4, 400):
        s = 1.0 + t / n_mean
        log_bound = mu * (s - 1.0) / (1.0 - t) - math.log1p(-t) - cutoff * math.log(s)
        best = min(best, log_bound)
    return math.exp(best) if best < 0.0 else 1.0


def cutoff_for(
    n_mean: float,
    amplitude: float = 0.0,
    tol: float = DEFAULT_TAIL_TOL,
    min_cutoff: int = 2,
) -> int:
    """Smallest cutoff whose thermal and coherent tails both fall below tol.

    `amplitude` is the largest coherent amplitude the computation touches;
    its photon distribution tail is bounded by the Poisson Chernoff bound at
    mean |amplitude|^2.
    """
    if not (0 < tol < 1):
        raise DomainError(f"tol must be in (0, 1), got {tol}")
    d_thermal = max(2, math.ceil(math.log(tol) / math.log(n_mean / (n_mean + 1.0))))
    d = max(min_cutoff, d_thermal)
    while poisson_tail_bound(abs(amplitude) ** 2, d) >= tol:
        d += 1
    return d


# ---------------------------------------------------------------------------
# operators and states
# ---------------------------------------------------------------------------

def annihilation(cutoff: int) -> np.ndarray:
    """Annihilation operator: <m|a|n> = sqrt(n) delta_{m,n-1}."""
    if cutoff < 2:
        raise DomainError(f"cutoff must be at least 2, got {cutoff}")
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1).astype(complex)


def number_operator(cutoff: int) -> np.ndarray:
    if cutoff < 2:
        raise DomainError(f"cutoff must be at least 2, got {cutoff}")
    return np.diag(np.arange(cutoff, dtype=float)).astype(complex)


def thermal_density(n_mean: float, cutoff: int) -> np.ndarray:
    """Truncated thermal state, diagonal weights built by ratio recurrence.

    The trace deficit equals thermal_tail(n_mean, cutoff).
    """
    if not (n_mean > 0):
        raise DomainError(f"n_mean must be positive, got {n_mean}")
    if cutoff < 2:
        raise DomainError(f"cutoff must be at least 2, got {cutoff}")
    ratio = n_mean / (n_mean + 1.0)
    weights = np.empty(cutoff)
    weights[0] = 1.0 / (n_mean + 1.0)
    for k in range(1, cutoff):
        weights[k] = weights[k - 1] * ratio
    return np.diag(weights).astype(complex)


def coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    """Coefficients <k|alpha> = e^{-|alpha|^2/2} alpha^k / sqrt(k!)."""
    if cutoff < 2:
        raise DomainError(f"cutoff must be at least 2, got {cutoff}")
    v = np.zeros(cutoff, dtype=complex)
    v[0] = 1.0
    for k in range(1, cutoff):
        v[k] = v[k - 1] * alpha / math.sqrt(k)
    return v * math.exp(-abs(alpha) ** 2 / 2.0)


def displacement_operator(zeta: complex, cutoff: int) -> np.ndarray:
    """Window of the displacement operator with exact matrix elements.

    The first row is <0|D(zeta)|n> = e^{-|zeta|^2/2} (-conj(zeta))^n/sqrt(n!);
    the remaining rows follow from a D(zeta) = D(zeta)(a + zeta):

        sqrt(m+1) d[m+1, n] = zeta d[m, n] + sqrt(n) d[m, n-1]

    This reproduces the associated-Laguerre closed form without cancellation
    for the amplitudes used here.  Unitarity holds away from the top edge of
    the window; the leaked weight is controlled by the cutoff rule.
    """
    zeta = complex(zeta)
    if cutoff < 2:
        raise DomainError(f"cutoff must be at least 2, got {cutoff}")
    if abs(zeta) ** 2 > cutoff / 4.0:
        warnings.warn(
            f"|zeta|^2 = {abs(zeta)**2:.3g} is large for cutoff {cutoff}; "
            "displacement window will leak",
            stacklevel=2,
        )
    d = np.zeros((cutoff, cutoff), dtype=complex)
    row = np.zeros(cutoff, dtype=complex)
    row[0] = 1.0
    for n in range(1, cutoff):
        row[n] = row[n - 1] * (-zeta.conjugate()) / math.sqrt(n)
    d[0] = row * math.exp(-abs(zeta) ** 2 / 2.0)
    roots = np.sqrt(np.arange(cutoff, dtype=float))
    for m in range(cutoff - 1):
        inv = 1.0 / math.sqrt(m + 1)
        d[m + 1, 0] = zeta * d[m, 0] * inv
        d[m + 1, 1:] = (zeta * d[m, 1:] + roots[1:] * d[m, :-1]) * inv
    return d


def displaced_thermal_density(zeta: complex, n_mean: float, cutoff: int) -> np.ndarray:
    """Displaced thermal state via operator conjugation D(zeta) rho_th D(zeta)^dagger.

    The trace deficit is at most thermal_tail(n_mean, cutoff) plus
    displaced_thermal_tail_bound(n_mean, |zeta|, cutoff): the first term is
    the dropped thermal weight, the second bounds what the displacement
    window pushes past the cutoff.
    """
    dop = displacement_operator(zeta, cutoff)
    return dop @ thermal_density(n_mean, cutoff) @ dop.conj().T


def displaced_thermal_density_quadrature(
    zeta: complex,
    n_mean: float,
    cutoff: int,
    radial_points: int = 80,
    angular_points: int = 80,
) -> np.ndarray:
    """Second, independent construction: polar quadrature of the defining mixture.

    The state is the Gaussian mixture of coherent projectors
    (1/(pi N)) integral exp(-|zeta - alpha|^2/N) |alpha><alpha| d^2 alpha,
    integrated on a polar grid centered at zeta (Gauss-Legendre radially,
    trapezoid in angle).  Used as a cross-check oracle for
    :func:`displaced_thermal_density`.
    """
    if not (n_mean > 0):
        raise DomainError(f"n_mean must be positive, got {n_mean}")
    radius = math.sqrt(40.0 * n_mean)  # exp(-r^2/N) < 5e-18 beyond
    nodes, gl_weights = np.polynomial.legendre.leggauss(radial_points)
    radii = 0.5 * radius * (nodes + 1.0)
    radial_weights = 0.5 * radius * gl_weights
    angles = 2.0 * np.pi * np.arange(angular_points) / angular_points
    rho = np.zeros((cutoff, cutoff), dtype=complex)
    for r, w in zip(radii, radial_weights):
        alphas = complex(zeta) + r * np.exp(1j * angles)
        vectors = np.array([coherent_vector(a, cutoff) for a in alphas])
        weight = math.exp(-r * r / n_mean) * r * w * (2.0 * np.pi / angular_points)
        rho += (weight / (math.pi * n_mean)) * (vectors.T @ vectors.conj())
    return rho


def concentration_angle(i: int) -> float:
    """Beam-splitter angle arctan(1/sqrt(i)) of cascade step i (step 1: pi/4)."""
    if i < 1:
        raise DomainError(f"cascade step must be at least 1, got {i}")
    return math.atan(1.0 / math.sqrt(i))


def beam_splitter(phi: float, cutoff: int) -> np.ndarray:
    """Two-mode unitary exp(phi (adag x b - a x bdag)) on the truncated space.

    The generator conserves total photon number, so the exponential is exact
    on every total-photon block that fits inside the window; only blocks with
    total >= cutoff are affected by truncation.  At phi = arctan(1/sqrt(1))
    two equal coherent amplitudes merge into mode 1.
    """
    a = annihilation(cutoff)
    generator = np.kron(a.conj().T, a) - np.kron(a, a.conj().T)
    unitary = expm(phi * generator)
    if not np.all(np.isfinite(unitary)):
        raise NumericalError(f"matrix exponential failed for phi={phi}, cutoff={cutoff}")
    return unitary


def partial_trace(op: np.ndarray, keep: str) -> np.ndarray:
    """Trace out one mode of a two-mode operator; keep is "first" or "second"."""
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DomainError(f"partial_trace expects a square matrix, got shape {op.shape}")
    cutoff = math.isqrt(op.shape[0])
    if cutoff * cutoff != op.shape[0]:
        raise DomainError(f"matrix side {op.shape[0]} is not a perfect square")
    tensor = op.reshape(cutoff, cutoff, cutoff, cutoff)
    if keep == "first":
        return np.einsum("mnpn->mp", tensor)
    if keep == "second":
        return np.einsum("mnmq->nq", tensor)
    raise DomainError(f'keep must be "first" or "second", got {keep!r}')


# ---------------------------------------------------------------------------
# verification routines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConcentrationReport:
    """Trace distances certifying one concentration step."""

    cutoff: int
    phi: float
    dist_first: float
    dist_second: float
    dist_joint: float


def _require_tails(n_mean: float, amplitude: float, cutoff: int, tol: float) -> None:
    needed = cutoff_for(n_mean, amplitude, tol)
    t_th = thermal_tail(n_mean, cutoff)
    t_coh = poisson_tail_bound(amplitude**2, cutoff)
    if max(t_th, t_coh) >= tol:
        raise PreconditionError(
            f"cutoff {cutoff} violates the tail rule (thermal tail {t_th:.3g}, "
            f"coherent bound {t_coh:.3g}, tol {tol:.1g}); use cutoff >= {needed}"
        )


def verify_concentration_n2(
    zeta: complex,
    n_mean: float,
    cutoff: int | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> ConcentrationReport:
    """Certify the n = 2 concentration identity on the two-mode Fock space.

    Applies the phi = pi/4 beam splitter to rho_{zeta,N} x rho_{zeta,N} and
    measures trace distances of the joint output and both marginals from
    rho_{sqrt(2) zeta, N} x rho_{0, N}.  The joint distance also certifies
    the product structure of the output.

    The precondition only demands tails below tail_tol, but the automatic
    cutoff aims deeper (1e-12) because truncation error enters the trace
    distances amplified by roughly the basis size.
    """
    amplitude = math.sqrt(2.0) * abs(complex(zeta))
    if cutoff is None:
        cutoff = cutoff_for(n_mean, amplitude, min(tail_tol, _DISTANCE_RULE_TOL))
    _require_tails(n_mean, amplitude, cutoff, tail_tol)
    phi = concentration_angle(1)
    single = displaced_thermal_density(zeta, n_mean, cutoff)
    unitary = beam_splitter(phi, cutoff)
    joint = unitary @ np.kron(single, single) @ unitary.conj().T
    target_first = displaced_thermal_density(math.sqrt(2.0) * complex(zeta), n_mean, cutoff)
    target_second = thermal_density(n_mean, cutoff)
    return ConcentrationReport(
        cutoff=cutoff,
        phi=phi,
        dist_first=trace_distance(partial_trace(joint, "first"), target_first),
        dist_second=trace_distance(partial_trace(joint, "second"), target_second),
        dist_joint=trace_distance(joint, np.kron(target_first, target_second)),
    )


def verify_concentration_cascade(
    zeta: complex,
    n_mean: float,
    n_copies: int = 3,
    cutoff: int | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> list[ConcentrationReport]:
    """Certify cascade steps up to n_copies using two-mode computations only.

    Step i couples the running concentrated mode (amplitude sqrt(i) zeta)
    with a fresh copy at angle arctan(1/sqrt(i)), expecting outputs
    sqrt(i+1) zeta and vacuum-centered thermal.  Each step starts from the
    analytic intermediate certified by the previous one, so the full
    n_copies-mode state is never materialized.
    """
    if n_copies < 2:
        raise DomainError(f"n_copies must be at least 2, got {n_copies}")
    amplitude = math.sqrt(n_copies) * abs(complex(zeta))
    if cutoff is None:
        cutoff = cutoff_for(n_mean, amplitude, min(tail_tol, _DISTANCE_RULE_TOL))
    _require_tails(n_mean, amplitude, cutoff, tail_tol)
    fresh = displaced_thermal_density(zeta, n_mean, cutoff)
    target_second = thermal_density(n_mean, cutoff)
    reports = []
    for i in range(1, n_copies):
        phi = concentration_angle(i)
        carried = displaced_thermal_density(math.sqrt(i) * complex(zeta), n_mean, cutoff)
        unitary = beam_splitter(phi, cutoff)
        joint = unitary @ np.kron(carried, fresh) @ unitary.conj().T
        target_first = displaced_thermal_density(
            math.sqrt(i + 1.0) * complex(zeta), n_mean, cutoff
        )
        reports.append(
            ConcentrationReport(
                cutoff=cutoff,
                phi=phi,
                dist_first=trace_distance(partial_trace(joint, "first"), target_first),
                dist_second=trace_distance(partial_trace(joint, "second"), target_second),
                dist_joint=trace_distance(joint, np.kron(target_first, target_second)),
            )
        )
    return reports


def numeric_rld_fisher(
    n_params: int,
    theta: ThetaPoint,
    cutoff: int,
    step: float = 1e-4,
) -> np.ndarray:
    """Finite-difference RLD Fisher matrix of the truncated family.

    Derivatives of rho(theta) are central differences with the given step;
    the information matrix is J[i, j] = tr(rho^{-1} d_i rho d_j rho), the
    ordering consistent with the closed-form inverses in `bounds`.

    n_params = 2 differentiates (theta1, theta2) at fixed N; n_params = 3
    adds the N direction.
    """
    if n_params not in (2, 3):
        raise DomainError(f"n_params must be 2 or 3, got {n_params}")
    if not (1e-5 <= step <= 1e-3):
        raise DomainError(f"step must lie in [1e-5, 1e-3], got {step}")

    center = np.array([theta.theta1, theta.theta2, theta.n_mean], dtype=float)

    def density(vec: np.ndarray) -> np.ndarray:
        point = ThetaPoint(vec[0], vec[1], vec[2])
        return displaced_thermal_density(point.zeta, point.n_mean, cutoff)

    rho = density(center)
    condition = np.linalg.cond(rho)
    if condition > _CONDITION_LIMIT:
        raise NumericalError(
            f"density is too ill-conditioned for a reliable inverse "
            f"(condition {condition:.2e} > {_CONDITION_LIMIT:.0e}); "
            "increase n_mean or decrease the cutoff"
        )
    derivatives = []
    for i in range(n_params):
        plus = center.copy()
        minus = center.copy()
        plus[i] += step
        minus[i] -= step
        derivatives.append((density(plus) - density(minus)) / (2.0 * step))
    solved = [np.linalg.solve(rho, d) for d in derivatives]
    fisher = np.empty((n_params, n_params), dtype=complex)
    for i in range(n_params):
        for j in range(n_params):
            fisher[i, j] = np.trace(solved[i] @ derivatives[j])
    return fisher


# ---------------------------------------------------------------------------
# measurement probabilities
# ---------------------------------------------------------------------------

def photon_probability(rho: np.ndarray, k: int) -> float:
    """Probability of counting k photons: the k-th diagonal entry."""
    if k < 0:
        raise DomainError(f"photon count must be nonnegative, got {k}")
    rho = np.asarray(rho)
    if k >= rho.shape[0]:
        return 0.0
    return float(rho[k, k].real)


def heterodyne_probability_density(rho: np.ndarray, alpha: complex) -> float:
    """Heterodyne outcome density <alpha|rho|alpha> / pi."""
    rho = np.asarray(rho)
    v = coherent_vector(alpha, rho.shape[0])
    return float(np.vdot(v, rho @ v).real / math.pi)
