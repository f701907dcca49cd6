"""The noiseless amplifier ``g^n`` acting on Gaussian pure states.

Only relative success weights are exposed for the ideal device: its
absolute probability carries a factor that vanishes with the number of
scissor stages, so only ratios between inputs at the same gain are
meaningful. The truncated device of :func:`truncated_squeezer` does have a
finite probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CutoffTooLargeError, UnphysicalGainError
from .fock_core import (
    FockVector,
    SqueezedCoherentParams,
    coherent_squeezed_coeffs,
    vacuum_squeezed_coeffs,
)

_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


class HnlaMode(str, Enum):
    IDEAL = "ideal"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class HnlaConfig:
    """Gain and truncation of the amplifier.

    ``eta`` is the beam-splitter transmission of the scissor realization,
    tied to the gain by ``g = sqrt((1 - eta) / eta)``.
    """

    g: float
    n_trunc: int = 0
    mode: HnlaMode = HnlaMode.IDEAL

    def __post_init__(self):
        if not (math.isfinite(self.g) and self.g > 1.0):
            raise ValueError(f"amplifier gain must exceed 1, got {self.g}")
        self._check_common()

    def _check_common(self):
        if int(self.n_trunc) != self.n_trunc or self.n_trunc < 0:
            raise ValueError(f"truncation must be a non-negative integer, got {self.n_trunc}")
        object.__setattr__(self, "mode", HnlaMode(self.mode))

    @classmethod
    def for_testing(cls, g: float, n_trunc: int = 0, mode: HnlaMode = HnlaMode.IDEAL) -> HnlaConfig:
        """Bypass the ``g > 1`` check (unit gain and attenuation fixtures)."""
        if not (math.isfinite(g) and g > 0):
            raise ValueError(f"gain must be positive, got {g}")
        cfg = object.__new__(cls)
        object.__setattr__(cfg, "g", float(g))
        object.__setattr__(cfg, "n_trunc", n_trunc)
        object.__setattr__(cfg, "mode", mode)
        cfg._check_common()
        return cfg

    @property
    def eta(self) -> float:
        return 1.0 / (1.0 + self.g**2)


@dataclass(frozen=True)
class TransformResult:
    params_out: SqueezedCoherentParams
    rel_success_weight: float


def _check_gain(g: float) -> float:
    if not (math.isfinite(g) and g > 0):
        raise ValueError(f"gain must be positive and finite, got {g}")
    return float(g)


def apply_filtration_bruteforce(v: FockVector, g: float) -> tuple[FockVector, float]:
    """Multiply ``c_n`` by ``g^n``.

    Returns the unnormalized output and ``sum g^{2n} |c_n|^2``, a weight that
    is only meaningful relative to other inputs filtered with the same ``g``.
    """
    g = _check_gain(g)
    if 2 * v.n_max * abs(math.log(g)) > _LOG_FLOAT_MAX:
        raise CutoffTooLargeError(f"g^(2 n_max) overflows for g={g}, n_max={v.n_max}")
    out = v.amps * g ** np.arange(v.n_max + 1)
    return FockVector(out), float(np.vdot(out, out).real)


def transform_squeezing(r: float, g: float) -> float:
    """Output squeezing ``artanh(g^2 tanh r)``; independent of the squeezing angle."""
    g = _check_gain(g)
    if r < 0:
        raise ValueError(f"squeezing strength must be >= 0, got {r}")
    t = g * g * math.tanh(r)
    if t >= 1.0:
        raise UnphysicalGainError(
            f"g^2 tanh r = {t:.6g} >= 1 (g={g}, r={r}): output squeezing diverges"
        )
    return math.atanh(t)


def transform_displacement(params: SqueezedCoherentParams, g: float) -> complex:
    """Solve ``a' + a'* tau' = g (a + a* tau)`` for the output displacement ``a'``.

    In real coordinates this is a symmetric 2x2 system with determinant
    ``1 - tanh(r')^2 > 0``.
    """
    r_out = transform_squeezing(params.r, g)
    if params.r == 0.0:
        return complex(g * params.alpha)
    a = params.alpha
    rhs = g * (a + a.conjugate() * params.tau)
    tau_out = SqueezedCoherentParams(0j, r_out, params.phi).tau
    c, d = tau_out.real, tau_out.imag
    system = np.array([[1.0 + c, d], [d, 1.0 - c]])
    re, im = np.linalg.solve(system, [rhs.real, rhs.imag])
    return complex(re, im)


def quadrature_gains(r: float, g: float) -> tuple[float, float]:
    """Amplitude gains ``(x'/x, p'/p)`` for an x-squeezed input (``phi = 0``)."""
    t = math.tanh(r)
    t_out = math.tanh(transform_squeezing(r, g))
    return g * (1.0 + t) / (1.0 + t_out), g * (1.0 - t) / (1.0 - t_out)


def transform(params: SqueezedCoherentParams, g: float) -> TransformResult:
    r_out = transform_squeezing(params.r, g)
    out = SqueezedCoherentParams(transform_displacement(params, g), r_out, params.phi)
    return TransformResult(out, success_weight_closed_form(params, g))


def log_success_weight(params: SqueezedCoherentParams, g: float) -> float:
    """Natural log of :func:`success_weight_closed_form`."""
    r_out = transform_squeezing(params.r, g)
    a = params.alpha
    a_out = transform_displacement(params, g)
    tau_out = SqueezedCoherentParams(0j, r_out, params.phi).tau
    expo_out = (a_out.conjugate() * (a_out + a_out.conjugate() * tau_out)).real
    expo_in = (a.conjugate() * (a + a.conjugate() * params.tau)).real
    return math.log(math.cosh(r_out) / math.cosh(params.r)) + expo_out - expo_in


def success_weight_closed_form(params: SqueezedCoherentParams, g: float) -> float:
    """Relative heralding weight ``|| g^n |alpha, xi> ||^2`` of a normalized input.

    Equal to ``(cosh r'/cosh r) exp{Re[a'*(a' + a'* tau')] - Re[a*(a + a* tau)]}``;
    this is also the photon-number generating function ``<(g^2)^n>``.
    """
    return math.exp(log_success_weight(params, g))


def tail_bound(params: SqueezedCoherentParams, n_max: int) -> float:
    """Upper bound on the probability of more than ``n_max`` photons.

    Chernoff bound ``P(n > N) <= <y^n> / y^(N+1)``, minimized over ``y > 1``;
    the moment ``<y^n>`` is the closed-form success weight at gain ``sqrt(y)``.
    """
    t = math.tanh(params.r)
    log_y_max = min(-math.log(t) if t > 0 else 40.0, 40.0)
    log_y_max *= 1.0 - 1e-9
    if log_y_max <= 0:
        return 1.0

    def objective(log_y: float) -> float:
        g = math.exp(0.5 * log_y)
        return log_success_weight(params, g) - (n_max + 1) * log_y

    res = minimize_scalar(objective, bounds=(1e-12, log_y_max), method="bounded",
                          options={"xatol": 1e-10})
    best = min(float(res.fun), objective(log_y_max))
    return min(1.0, math.exp(best))


def auto_cutoff(params: SqueezedCoherentParams, tail: float = 1e-10, n_floor: int = 0) -> int:
    """Smallest cutoff whose :func:`tail_bound` is below ``tail``."""
    hi = max(n_floor, 1)
    while tail_bound(params, hi) >= tail:
        hi *= 2
        if hi > 10_000:
            raise CutoffTooLargeError(f"no cutoff below 10000 reaches tail {tail} for {params}")
    lo = n_floor - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid >= 0 and tail_bound(params, mid) < tail:
            hi = mid
        else:
            lo = mid
    return hi


def filter_state(params: SqueezedCoherentParams, g: float, n_max: int | None = None) -> tuple[FockVector, float]:
    """Brute-force filtration of ``|alpha, xi>``; returns the normalized output and the weight.

    The default cutoff is chosen so that the *output* state's tail is below 1e-10.
    """
    if n_max is None:
        out = transform(params, g).params_out
        n_max = max(auto_cutoff(params), auto_cutoff(out))
    v = coherent_squeezed_coeffs(params, n_max)
    filtered, weight = apply_filtration_bruteforce(v, g)
    return filtered.normalized(), weight


def truncated_norm(r: float, n_max: int) -> float:
    """``f_N(r)``: probability that ``S(r)|0>`` has at most ``n_max`` photons."""
    return vacuum_squeezed_coeffs(r, 0.0, n_max).norm_sq


@dataclass(frozen=True)
class TruncatedSqueezerResult:
    fidelity: float
    p_succ: float
    p_succ_eq33: float


def truncated_squeezer(r: float, phi: float, g: float, n_trunc: int) -> TruncatedSqueezerResult:
    """Apply ``g^n / g^N`` to the renormalized ``N``-photon truncation of ``S(r e^{i phi})|0>``.

    ``fidelity`` compares the renormalized output with the ideal untruncated
    output ``S(r' e^{i phi})|0>``. ``p_succ`` is ``||T psi_tr||^2`` for the
    renormalized truncated input. ``p_succ_eq33`` is the alternative
    expression ``f_N(r') / (g^{2N} f_N(r))``, which lacks the factor
    ``cosh r' / cosh r`` and is kept for comparison only.
    """
    if int(n_trunc) != n_trunc or n_trunc < 0:
        raise ValueError(f"truncation must be a non-negative integer, got {n_trunc}")
    n_trunc = int(n_trunc)
    r_out = transform_squeezing(r, g)
    psi_tr = vacuum_squeezed_coeffs(r, phi, n_trunc).normalized()
    scaled, _ = apply_filtration_bruteforce(psi_tr, g)
    out = FockVector(scaled.amps / g**n_trunc)
    p_succ = out.norm_sq

    ideal = vacuum_squeezed_coeffs(r_out, phi, n_trunc)
    fid = abs(np.vdot(ideal.amps, out.normalized().amps)) ** 2
    f_out = ideal.norm_sq
    f_in = truncated_norm(r, n_trunc)
    return TruncatedSqueezerResult(float(fid), float(p_succ), f_out / (g ** (2 * n_trunc) * f_in))
