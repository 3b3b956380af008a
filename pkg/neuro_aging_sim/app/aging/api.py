"""Reliability mathematics: MTTF models, Weibull reliability and stress/recovery.

Aging is measured in dimensionless units A such that the reliability of a
neuron circuit is R = exp(-A^beta). One spike of width ``delta_t_spike`` at
the spike voltage adds ``delta_t_spike / alpha(v_spike)`` units, where alpha
is the Weibull scale parameter.
"""

import logging
import math
from functools import lru_cache
from typing import Iterable, Tuple

from scipy.special import gamma as gamma_fn

from ..common.exceptions import ConfigurationError, DomainError, StateError
from .models import AgingParams, Environment, NeuronAgingState, RecoveryMode, VthCalibration

logger = logging.getLogger("neuro_aging_sim")


def mttf_tddb(params: AgingParams, v: float) -> float:
    """Mean time to failure from time-dependent dielectric breakdown.

    MTTF = a_fit * exp(-gamma * sqrt(v)).

    Args:
        params: Aging parameters
        v: Gate overdrive voltage in volts

    Returns:
        MTTF in seconds

    Raises:
        DomainError: If v is not positive
    """
    if not v > 0:
        raise DomainError(f"voltage must be > 0, got {v!r}", argument="v")
    return params.a_fit * math.exp(-params.gamma * math.sqrt(v))


@lru_cache(maxsize=1024)
def _scale(params: AgingParams, temperature: float, v: float) -> float:
    numerator = params.a_fit / v**params.gamma * math.exp(params.e_a / (params.k_b * temperature))
    return numerator / gamma_fn(1.0 + 1.0 / params.beta)


def weibull_scale(params: AgingParams, env: Environment, v: float) -> float:
    """Weibull scale parameter alpha(v) of the BTI lifetime distribution.

    alpha(v) = (a_fit / v^gamma * exp(e_a / (k_b T))) / Gamma(1 + 1/beta)

    Args:
        params: Aging parameters
        env: Operating environment (temperature)
        v: Stress voltage in volts

    Returns:
        Scale parameter in seconds

    Raises:
        DomainError: If v or the temperature is not positive
    """
    if not v > 0:
        raise DomainError(f"voltage must be > 0, got {v!r}", argument="v")
    if not env.temperature > 0:
        raise DomainError(f"temperature must be > 0, got {env.temperature!r}", argument="temperature")
    return _scale(params, env.temperature, float(v))


def mttf_bti(params: AgingParams, env: Environment, v: float) -> float:
    """Mean time to failure from bias temperature instability.

    The Weibull mean alpha * Gamma(1 + 1/beta), which reduces to
    a_fit / v^gamma * exp(e_a / (k_b T)).
    """
    return weibull_scale(params, env, v) * gamma_fn(1.0 + 1.0 / params.beta)


def reliability(aging_total: float, params: AgingParams) -> float:
    """Probability that a circuit with the given aging has not failed.

    Args:
        aging_total: Accumulated aging units
        params: Aging parameters (Weibull slope)

    Returns:
        exp(-aging_total^beta), in (0, 1]

    Raises:
        DomainError: If aging_total is negative
    """
    if not aging_total >= 0:
        raise DomainError(f"aging must be >= 0, got {aging_total!r}", argument="aging_total")
    return math.exp(-(aging_total**params.beta))


def aging_from_spikes(n: float, env: Environment, params: AgingParams) -> float:
    """Aging caused by ``n`` spikes of fixed width at the spike voltage.

    Args:
        n: Spike count (may be fractional for rate-based estimates)
        env: Operating environment
        params: Aging parameters

    Returns:
        n * delta_t_spike / alpha(v_spike)

    Raises:
        DomainError: If n is negative
    """
    if not n >= 0:
        raise DomainError(f"spike count must be >= 0, got {n!r}", argument="n")
    return n * env.delta_t_spike / weibull_scale(params, env, env.v_spike)


def aging_from_intervals(
    intervals: Iterable[Tuple[float, float]],
    env: Environment,
    params: AgingParams,
) -> float:
    """Aging accumulated over stress intervals of varying voltage.

    Args:
        intervals: (duration seconds, voltage) pairs
        env: Operating environment
        params: Aging parameters

    Returns:
        Sum of duration / alpha(voltage), summed exactly with ``math.fsum``

    Raises:
        DomainError: On a negative duration or non-positive voltage
    """
    scales = {}

    def terms():
        for duration, voltage in intervals:
            if not duration >= 0:
                raise DomainError(f"interval duration must be >= 0, got {duration!r}", argument="intervals")
            scale = scales.get(voltage)
            if scale is None:
                scale = scales[voltage] = weibull_scale(params, env, voltage)
            yield duration / scale

    return math.fsum(terms())


def apply_stress(
    state: NeuronAgingState,
    n_spikes: float,
    elapsed: float,
    env: Environment,
    params: AgingParams,
) -> NeuronAgingState:
    """Advance a neuron by ``elapsed`` seconds under stress and add new spikes.

    A fraction 1 - exp(-elapsed / tau_convert) of the existing recoverable
    pool turns permanent, then the new stress is split
    ``rho_recoverable`` / ``1 - rho_recoverable`` between the pools.
    Total aging never decreases.

    Args:
        state: Current aging state
        n_spikes: Number of spikes emitted at the end of the interval
        elapsed: Seconds since ``state.last_update``
        env: Operating environment
        params: Aging parameters

    Returns:
        New aging state with ``last_update`` advanced by ``elapsed``

    Raises:
        StateError: If elapsed is negative
        DomainError: If n_spikes is negative
    """
    if elapsed < 0:
        raise StateError(f"time regression of {elapsed!r} s at t={state.last_update!r}")
    stress = aging_from_spikes(n_spikes, env, params) if n_spikes else 0.0
    converted = state.aging_recoverable * -math.expm1(-elapsed / params.tau_convert)
    return NeuronAgingState(
        aging_recoverable=state.aging_recoverable - converted + params.rho_recoverable * stress,
        aging_permanent=state.aging_permanent + converted + (1.0 - params.rho_recoverable) * stress,
        last_update=state.last_update + elapsed,
    )


def apply_recovery(
    state: NeuronAgingState,
    duration: float,
    mode: RecoveryMode,
    params: AgingParams,
) -> NeuronAgingState:
    """Let the recoverable pool anneal for ``duration`` seconds.

    The pool decays as exp(-duration / tau) with the de-stress or idle time
    constant. The permanent pool is untouched and ``last_update`` is left to
    the caller, which owns the simulation clock.

    Raises:
        DomainError: If duration is negative
    """
    if not duration >= 0:
        raise DomainError(f"recovery duration must be >= 0, got {duration!r}", argument="duration")
    tau = params.tau_recover_destress if RecoveryMode(mode) is RecoveryMode.DESTRESS else params.tau_recover_idle
    return NeuronAgingState(
        aging_recoverable=state.aging_recoverable * math.exp(-duration / tau),
        aging_permanent=state.aging_permanent,
        last_update=state.last_update,
    )


def vth_shift(aging_total: float, calibration: VthCalibration) -> float:
    """Project total aging onto a threshold-voltage shift in percent.

    The mapping is linear and pinned so that ``calibration.baseline_aging``
    gives ``end_of_life_shift_pct`` (10 % by default).

    Raises:
        ConfigurationError: If the calibration has no baseline aging
        DomainError: If aging_total is negative
    """
    if calibration is None or not calibration.is_set:
        logger.error("V_th projection requested without a calibrated baseline")
        raise ConfigurationError("baseline aging is not calibrated", field="calibration.baseline_aging")
    if not aging_total >= 0:
        raise DomainError(f"aging must be >= 0, got {aging_total!r}", argument="aging_total")
    return calibration.end_of_life_shift_pct * aging_total / calibration.baseline_aging
