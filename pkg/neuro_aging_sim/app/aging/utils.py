"""Utility functions for lifetime calibration and numerical cross-checks."""

import logging
import math
from typing import Tuple

from scipy import integrate, optimize

from ..common.exceptions import ConvergenceError, DomainError
from .api import aging_from_spikes, weibull_scale
from .models import AgingParams, CalibrationResult, Environment, VthCalibration

logger = logging.getLogger("neuro_aging_sim")

SECONDS_PER_YEAR = 365.25 * 86400.0

# Search bracket for ln(a_fit).
DEFAULT_LOG_BRACKET = (math.log(1e-30), math.log(1e30))


def mttf_by_quadrature(params: AgingParams, env: Environment, v: float) -> float:
    """Integrate the Weibull reliability curve over [0, inf).

    Used as an independent check on :func:`mttf_bti`.

    Args:
        params: Aging parameters
        env: Operating environment
        v: Stress voltage in volts

    Returns:
        MTTF in seconds
    """
    alpha = weibull_scale(params, env, v)
    # Substituting x = t / alpha keeps the integrand well scaled.
    value, _ = integrate.quad(lambda x: math.exp(-(x**params.beta)), 0.0, math.inf, epsabs=0.0, epsrel=1e-11, limit=200)
    return alpha * value


def reference_aging(params: AgingParams, env: Environment, rate: float, duration: float) -> float:
    """Aging of a neuron firing at a constant rate with recovery disabled.

    Args:
        params: Aging parameters
        env: Operating environment
        rate: Firing rate in hertz
        duration: Observation time in seconds

    Returns:
        Closed-form aging units after ``duration`` seconds
    """
    if not rate >= 0:
        raise DomainError(f"rate must be >= 0, got {rate!r}", argument="rate")
    if not duration >= 0:
        raise DomainError(f"duration must be >= 0, got {duration!r}", argument="duration")
    return aging_from_spikes(rate * duration, env, params)


def calibrate_a_fit(
    params: AgingParams,
    env: Environment,
    rate: float = 50.0,
    years: float = 2.0,
    target: float = 1.0,
    rtol: float = 1e-9,
    log_bracket: Tuple[float, float] = DEFAULT_LOG_BRACKET,
) -> CalibrationResult:
    """Solve for the fit constant that makes a reference workload reach ``target`` aging.

    The reference is a neuron firing continuously at ``rate`` for ``years``
    years; at aging 1 its reliability is exp(-1), so the solved ``a_fit``
    puts the baseline MTTF at the reference lifetime. Bisection runs on
    ln(a_fit), making the tolerance relative.

    Args:
        params: Parameters whose ``a_fit`` is replaced
        env: Operating environment
        rate: Reference firing rate in hertz
        years: Reference lifetime in years
        target: Aging to reach at the end of the lifetime
        rtol: Relative tolerance on ``a_fit``
        log_bracket: Bracket for ln(a_fit)

    Returns:
        Calibration result carrying the solved ``a_fit``

    Raises:
        ConvergenceError: If the bracket does not contain a root or bisection fails
    """
    duration = years * SECONDS_PER_YEAR

    def residual(log_a: float) -> float:
        return reference_aging(params.with_a_fit(math.exp(log_a)), env, rate, duration) - target

    lo, hi = log_bracket
    f_lo, f_hi = residual(lo), residual(hi)
    bracket = (math.exp(lo), math.exp(hi))
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)) or f_lo * f_hi > 0:
        logger.error(f"Calibration bracket does not straddle the target: f(lo)={f_lo!r}, f(hi)={f_hi!r}")
        raise ConvergenceError(f"aging residual has the same sign at both ends ({f_lo!r}, {f_hi!r})", bracket=bracket)

    log_a, info = optimize.bisect(residual, lo, hi, xtol=rtol, maxiter=200, full_output=True, disp=False)
    if not info.converged:
        raise ConvergenceError(f"bisection stopped after {info.iterations} iterations: {info.flag}", bracket=bracket)

    a_fit = math.exp(log_a)
    baseline = reference_aging(params.with_a_fit(a_fit), env, rate, duration)
    logger.info(f"Calibrated a_fit={a_fit!r} ({info.iterations} iterations), baseline aging {baseline!r}")
    return CalibrationResult(
        a_fit=a_fit,
        baseline_aging=baseline,
        reference_rate=rate,
        reference_years=years,
        iterations=info.iterations,
        bracket=bracket,
    )


def calibrated_vth(result: CalibrationResult, end_of_life_shift_pct: float = 10.0) -> VthCalibration:
    """Turn a calibration result into a V_th normalization."""
    return VthCalibration(
        baseline_aging=result.baseline_aging,
        end_of_life_shift_pct=end_of_life_shift_pct,
        reference_rate=result.reference_rate,
        reference_years=result.reference_years,
    )
