"""Single- and two-mode bosonic states on a truncated Fock space.

Conventions used throughout the package:

* quadratures ``x = a + a^dag`` and ``p = -i (a - a^dag)``; the vacuum has
  unit variance in both;
* a displacement ``alpha = (x + i p) / 2`` moves the quadrature means to
  ``(x, p)``;
* ``|alpha, xi> = D(alpha) S(xi) |0>`` with ``S(xi) = exp((xi* a^2 - xi a^dag^2) / 2)``
  and ``xi = r exp(i phi)``; ``phi = 0`` squeezes ``x``.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import CutoffTooLargeError, TruncationWarning

HERMITE_MAX_ORDER = 10_000
TWO_PI = 2.0 * math.pi

# Rescale the amplitude recurrence whenever it leaves [1e-150, 1e150].
_RESCALE_HI = 1e150
_RESCALE_LO = 1e-150
_LEAF_SIZE = 64


def squeezing_from_db(db: float) -> float:
    """Squeezing parameter ``r`` with ``exp(-2 r) = 10**(-db / 10)``."""
    return db / 20.0 * math.log(10.0)


def db_from_squeezing(r: float) -> float:
    return 20.0 * r / math.log(10.0)


@dataclass(frozen=True)
class SqueezedCoherentParams:
    """Displacement ``alpha`` and squeezing ``r exp(i phi)`` of a pure Gaussian state."""

    alpha: complex = 0j
    r: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0.0):
            raise ValueError(f"squeezing strength must be finite and >= 0, got {self.r}")
        alpha = complex(self.alpha)
        if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
            raise ValueError(f"displacement must be finite, got {self.alpha}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    @classmethod
    def from_quadratures(cls, x: float, p: float, r: float = 0.0, phi: float = 0.0):
        return cls(complex(x, p) / 2.0, r, phi)

    @property
    def x(self) -> float:
        return 2.0 * self.alpha.real

    @property
    def p(self) -> float:
        return 2.0 * self.alpha.imag

    @property
    def tau(self) -> complex:
        """``exp(i phi) tanh r``."""
        return complex(math.cos(self.phi), math.sin(self.phi)) * math.tanh(self.r)

    @property
    def mean_photon_number(self) -> float:
        return abs(self.alpha) ** 2 + math.sinh(self.r) ** 2


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockVector:
    """Complex amplitudes ``c_0 ... c_N`` of a single-mode ket."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise ValueError("a FockVector needs at least the vacuum amplitude")
        if not np.all(np.isfinite(amps)):
            raise ValueError("FockVector amplitudes must be finite")
        object.__setattr__(self, "amps", _frozen(amps))

    @property
    def n_max(self) -> int:
        return self.amps.size - 1

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def normalized(self) -> FockVector:
        norm = math.sqrt(self.norm_sq)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return FockVector(self.amps / norm)

    def padded(self, n_max: int) -> FockVector:
        if n_max < self.n_max:
            raise ValueError(f"cannot pad a cutoff-{self.n_max} vector down to {n_max}")
        out = np.zeros(n_max + 1, dtype=complex)
        out[: self.amps.size] = self.amps
        return FockVector(out)

    def truncated(self, n_max: int) -> FockVector:
        return FockVector(self.amps[: n_max + 1])

    def rotated(self, theta: float) -> FockVector:
        """Apply ``exp(i theta n)``."""
        n = np.arange(self.amps.size)
        return FockVector(self.amps * np.exp(1j * theta * n))

    @classmethod
    def basis(cls, n: int, n_max: int) -> FockVector:
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[n] = 1.0
        return cls(amps)

    def to_json(self) -> dict:
        return {"n_max": self.n_max, "amps": [[float(c.real), float(c.imag)] for c in self.amps]}

    @classmethod
    def from_json(cls, data: dict) -> FockVector:
        amps = np.array([complex(re, im) for re, im in data["amps"]])
        if amps.size != int(data["n_max"]) + 1:
            raise ValueError("amplitude count does not match n_max")
        return cls(amps)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian operator on the truncated space; the trace is kept, not forced to 1."""

    elems: np.ndarray
    hermitian_tol: float = field(default=1e-12, repr=False, compare=False)

    def __post_init__(self):
        elems = np.array(self.elems, dtype=complex)
        if elems.ndim != 2 or elems.shape[0] != elems.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {elems.shape}")
        if not np.all(np.isfinite(elems)):
            raise ValueError("density matrix entries must be finite")
        asym = np.max(np.abs(elems - elems.conj().T)) if elems.size else 0.0
        if asym > self.hermitian_tol:
            raise ValueError(f"density matrix is not Hermitian (max asymmetry {asym:.3e})")
        object.__setattr__(self, "elems", _frozen(elems))

    @property
    def n_max(self) -> int:
        return self.elems.shape[0] - 1

    @property
    def trace(self) -> float:
        return float(np.trace(self.elems).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.elems)

    def is_psd(self, tol: float = 1e-10) -> bool:
        return bool(self.eigenvalues().min() >= -tol)

    def normalized(self) -> DensityMatrix:
        return DensityMatrix(self.elems / self.trace)

    def rotated(self, theta: float) -> DensityMatrix:
        """Conjugate by ``exp(i theta n)``."""
        phase = np.exp(1j * theta * np.arange(self.n_max + 1))
        return DensityMatrix(phase[:, None] * self.elems * phase.conj()[None, :])

    def mean_photon_number(self) -> float:
        return float(np.real(np.arange(self.n_max + 1) @ np.diag(self.elems)))

    def to_json(self) -> dict:
        return {
            "n_max": self.n_max,
            "trace": self.trace,
            "elems": [[[float(c.real), float(c.imag)] for c in row] for row in self.elems],
        }

    @classmethod
    def from_json(cls, data: dict) -> DensityMatrix:
        elems = np.array([[complex(re, im) for re, im in row] for row in data["elems"]])
        if elems.shape[0] != int(data["n_max"]) + 1:
            raise ValueError("matrix size does not match n_max")
        return cls(elems)


@dataclass(frozen=True)
class TwoModeSchmidtState:
    """``sum_n lambda_n |n>|n>`` with real non-negative coefficients."""

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float).reshape(-1)
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            raise ValueError("Schmidt coefficients must be finite and non-negative")
        if lam @ lam > 1.0 + 1e-12:
            raise ValueError(f"Schmidt coefficients overnormalized: {lam @ lam}")
        object.__setattr__(self, "lambdas", _frozen(lam))

    @classmethod
    def epr(cls, s: float, n_max: int) -> TwoModeSchmidtState:
        """Two-mode squeezed vacuum, cut at ``n_max`` without renormalizing."""
        if s < 0:
            raise ValueError("two-mode squeezing must be >= 0")
        n = np.arange(n_max + 1)
        return cls(np.tanh(s) ** n / math.cosh(s))

    @property
    def n_max(self) -> int:
        return self.lambdas.size - 1

    @property
    def norm_sq(self) -> float:
        return float(self.lambdas @ self.lambdas)

    def filtered(self, g: float) -> tuple[TwoModeSchmidtState, float]:
        """Apply ``g^n`` to one mode; return the renormalized state and its relative weight."""
        n = np.arange(self.n_max + 1)
        raw = self.lambdas * float(g) ** n
        weight = float(raw @ raw)
        return TwoModeSchmidtState(raw / math.sqrt(weight)), weight

    def reduced_density(self) -> DensityMatrix:
        return DensityMatrix(np.diag(self.lambdas**2).astype(complex))


def hermite(n: int, z: complex) -> complex:
    """Physicists' Hermite polynomial ``H_n(z)`` by forward recurrence."""
    if not (0 <= n <= HERMITE_MAX_ORDER) or int(n) != n:
        raise ValueError(f"Hermite order must be an integer in [0, {HERMITE_MAX_ORDER}], got {n}")
    h_prev, h = 0.0, 1.0
    for k in range(int(n)):
        h_prev, h = h, 2.0 * z * h - 2.0 * k * h_prev
    return h


def _check_cutoff(n_max: int) -> int:
    if int(n_max) != n_max or n_max < 0:
        raise ValueError(f"cutoff must be a non-negative integer, got {n_max}")
    if n_max > HERMITE_MAX_ORDER:
        raise ValueError(f"cutoff {n_max} exceeds the supported maximum {HERMITE_MAX_ORDER}")
    return int(n_max)


def vacuum_squeezed_coeffs(r: float, phi: float, n_max: int) -> FockVector:
    """Even-photon amplitudes of ``S(r e^{i phi})|0>`` up to ``n_max``.

    Uses ``c_{2n+2} / c_{2n} = -(tau / 2) sqrt(2 (2n + 1) / (n + 1))`` so that
    neither the central binomial coefficient nor ``tanh(r)^n`` is formed.
    """
    if r < 0:
        raise ValueError(f"squeezing strength must be >= 0, got {r}")
    n_max = _check_cutoff(n_max)
    tau = np.exp(1j * phi) * math.tanh(r)
    amps = np.zeros(n_max + 1, dtype=complex)
    c = 1.0 / math.sqrt(math.cosh(r))
    for m in range(n_max // 2 + 1):
        amps[2 * m] = c
        c = c * (-tau / 2.0) * math.sqrt(2.0 * (2 * m + 1) / (m + 1))
    return FockVector(amps)


def coherent_squeezed_table(
    alphas: Sequence[complex] | np.ndarray, r: float, phi: float, n_max: int
) -> np.ndarray:
    """Amplitudes of ``|alpha_k, r e^{i phi}>`` for many displacements at once.

    Returns a ``(K, n_max + 1)`` array. The Hermite expansion is evaluated via

        q_{n+1} = (gamma q_n - tau sqrt(n) q_{n-1}) / sqrt(n + 1),

    with ``q_n = H_n(gamma / sqrt(2 tau)) (tau / 2)^{n/2} / sqrt(n!)`` and
    ``gamma = alpha + alpha* tau``. This form is a polynomial in ``gamma`` and
    ``tau``, so the ``r = 0`` limit needs no special branch; it still gets one
    below to return the Poisson amplitudes bit-exactly. A running log scale
    keeps ``q_n`` inside the floating-point range.
    """
    if r < 0:
        raise ValueError(f"squeezing strength must be >= 0, got {r}")
    n_max = _check_cutoff(n_max)
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    if not np.all(np.isfinite(alphas)):
        raise ValueError("displacements must be finite")
    tau = 0j if r < 1e-12 else np.exp(1j * phi) * math.tanh(r)
    gamma = alphas + np.conj(alphas) * tau
    # complex log of the prefactor (cosh r)^{-1/2} exp{-(|a|^2 + a*^2 tau) / 2}
    log_pref = -0.5 * math.log(math.cosh(r)) - 0.5 * (np.abs(alphas) ** 2 + np.conj(alphas) ** 2 * tau)

    k = alphas.size
    q = np.empty((k, n_max + 1), dtype=complex)
    log_scale = np.zeros((k, n_max + 1))
    q_prev = np.zeros(k, dtype=complex)
    q_cur = np.ones(k, dtype=complex)
    scale = np.zeros(k)
    q[:, 0] = q_cur
    for n in range(n_max):
        q_next = (gamma * q_cur - tau * math.sqrt(n) * q_prev) / math.sqrt(n + 1)
        mag = np.maximum(np.abs(q_next), np.abs(q_cur))
        rescale = (mag > _RESCALE_HI) | ((mag < _RESCALE_LO) & (mag > 0))
        if np.any(rescale):
            factor = np.where(rescale, mag, 1.0)
            q_next = q_next / factor
            q_cur = q_cur / factor
            scale = scale + np.log(factor)
        q_prev, q_cur = q_cur, q_next
        q[:, n + 1] = q_cur
        log_scale[:, n + 1] = scale

    with np.errstate(divide="ignore"):
        log_mag = log_pref.real[:, None] + log_scale + np.log(np.abs(q))
    if np.any(log_mag > 1e-6):
        worst = float(np.max(log_mag))
        raise CutoffTooLargeError(
            f"amplitude recurrence lost precision (|c_n| = exp({worst:.3g}) > 1); "
            "reduce the cutoff or the displacement"
        )
    phase = log_pref.imag[:, None] + np.angle(q)
    amps = np.exp(log_mag) * np.exp(1j * phase)
    amps[np.abs(q) == 0] = 0.0
    return amps


def coherent_squeezed_coeffs(params: SqueezedCoherentParams, n_max: int) -> FockVector:
    """Fock amplitudes of ``D(alpha) S(xi) |0>`` up to ``n_max`` (no renormalization)."""
    if params.r < 1e-12:
        return coherent_coeffs(params.alpha, n_max)
    return FockVector(coherent_squeezed_table([params.alpha], params.r, params.phi, n_max)[0])


def coherent_coeffs(alpha: complex, n_max: int) -> FockVector:
    """Poisson amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)``."""
    n_max = _check_cutoff(n_max)
    alpha = complex(alpha)
    if alpha == 0:
        return FockVector.basis(0, n_max)
    n = np.arange(n_max + 1)
    log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * _log_factorial(n)
    return FockVector(np.exp(log_mag) * np.exp(1j * n * np.angle(alpha)))


def _log_factorial(n: np.ndarray) -> np.ndarray:
    from scipy.special import gammaln

    return gammaln(np.asarray(n, dtype=float) + 1.0)


def inner_product(a: FockVector, b: FockVector) -> complex:
    """``<a|b>``; the shorter vector is implicitly zero-padded."""
    m = min(a.amps.size, b.amps.size)
    return complex(np.vdot(a.amps[:m], b.amps[:m]))


def fidelity(a: FockVector, b: FockVector) -> float:
    """``|<a|b>|^2 / (<a|a> <b|b>)``."""
    return abs(inner_product(a, b)) ** 2 / (a.norm_sq * b.norm_sq)


def quadrature_stats(v: FockVector) -> tuple[float, float, float, float]:
    """``(<x>, <p>, Var x, Var p)`` from ladder-operator matrix elements.

    Warns with :class:`TruncationWarning` when the top tenth of the cutoff
    still carries more than 1e-8 of the probability.
    """
    c = v.amps
    norm = v.norm_sq
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"quadrature_stats needs a normalized vector, |v|^2 = {norm!r}")
    n = np.arange(c.size)
    tail_len = max(2, c.size // 10)
    tail = float(np.sum(np.abs(c[-tail_len:]) ** 2)) if c.size > 2 else 0.0
    if tail > 1e-8:
        warnings.warn(
            f"{tail:.2e} of the probability sits in the last {tail_len} Fock levels; "
            "moments are cutoff-sensitive",
            TruncationWarning,
            stacklevel=2,
        )
    a_mean = np.vdot(c[:-1], np.sqrt(n[1:]) * c[1:]) if c.size > 1 else 0j
    a2_mean = np.vdot(c[:-2], np.sqrt(n[2:] * n[1:-1]) * c[2:]) if c.size > 2 else 0j
    n_mean = float(np.sum(n * np.abs(c) ** 2))
    mean_x = 2.0 * a_mean.real
    mean_p = 2.0 * a_mean.imag
    var_x = 2.0 * a2_mean.real + 2.0 * n_mean + 1.0 - mean_x**2
    var_p = -2.0 * a2_mean.real + 2.0 * n_mean + 1.0 - mean_p**2
    return float(mean_x), float(mean_p), float(var_x), float(var_p)


def pairwise_sum(term: Callable[[int, int], np.ndarray], count: int, leaf: int = _LEAF_SIZE) -> np.ndarray:
    """Sum ``count`` terms by a fixed binary tree.

    ``term(lo, hi)`` returns the (directly summed) contribution of terms
    ``lo..hi-1`` for blocks of at most ``leaf`` terms. The tree only depends
    on ``count`` and ``leaf``, so results are bit-reproducible.
    """
    if count <= 0:
        raise ValueError("nothing to sum")

    def rec(lo: int, hi: int) -> np.ndarray:
        if hi - lo <= leaf:
            return term(lo, hi)
        mid = (lo + hi) // 2
        return rec(lo, mid) + rec(mid, hi)

    return rec(0, count)


def pure_to_density(v: FockVector) -> DensityMatrix:
    return DensityMatrix(np.outer(v.amps, v.amps.conj()))


def mix(ens: Sequence[tuple[float, DensityMatrix]]) -> DensityMatrix:
    """``sum_i w_i rho_i`` without renormalization."""
    if not ens:
        raise ValueError("cannot mix an empty ensemble")
    weights = np.array([w for w, _ in ens], dtype=float)
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValueError("mixture weights must be finite and non-negative")
    dims = {rho.elems.shape for _, rho in ens}
    if len(dims) != 1:
        raise ValueError(f"cannot mix density matrices of different sizes {sorted(dims)}")

    def block(lo, hi):
        out = weights[lo] * ens[lo][1].elems
        for i in range(lo + 1, hi):
            out = out + weights[i] * ens[i][1].elems
        return out

    return DensityMatrix(pairwise_sum(block, len(ens)))


def mix_pure(weights: np.ndarray, amps: np.ndarray) -> DensityMatrix:
    """``sum_k w_k |psi_k><psi_k|`` for the rows of ``amps``, tree-summed."""
    weights = np.asarray(weights, dtype=float)
    amps = np.asarray(amps, dtype=complex)
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValueError("mixture weights must be finite and non-negative")
    if amps.ndim != 2 or amps.shape[0] != weights.size:
        raise ValueError("need one amplitude row per weight")

    def block(lo, hi):
        a = amps[lo:hi]
        return np.einsum("k,km,kn->mn", weights[lo:hi], a, a.conj())

    elems = pairwise_sum(block, weights.size)
    # exact Hermitian symmetry; the einsum leaves round-off of order 1e-17
    return DensityMatrix(0.5 * (elems + elems.conj().T))


def trace_distance(a: DensityMatrix, b: DensityMatrix, require_normalized: bool = True) -> float:
    """``1/2 sum |eig(a - b)|`` for two (near-)normalized states on the same cutoff.

    Callers that track the truncation budget themselves may pass
    ``require_normalized=False`` to skip the trace check.
    """
    if a.elems.shape != b.elems.shape:
        raise ValueError(f"dimension mismatch: {a.elems.shape} vs {b.elems.shape}")
    for name, rho in (("first", a), ("second", b)) if require_normalized else ():
        if abs(rho.trace - 1.0) > 1e-8:
            raise ValueError(f"{name} argument has trace {rho.trace!r}, expected 1 within 1e-8")
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(a.elems - b.elems))))


def thermal_probs(s: float, n_max: int) -> np.ndarray:
    """Photon distribution ``tanh(s)^{2n} / cosh(s)^2`` of the reduced EPR state, cut at ``n_max``."""
    n = np.arange(_check_cutoff(n_max) + 1)
    return np.tanh(s) ** (2 * n) / math.cosh(s) ** 2


def thermal_density(s: float, n_max: int, renormalize: bool = False) -> DensityMatrix:
    """Thermal state with mean photon number ``sinh(s)^2``.

    Without ``renormalize`` the trace is ``1 - tanh(s)^{2 (n_max + 1)}``, i.e.
    the exact state projected onto the cutoff.
    """
    p = thermal_probs(s, n_max)
    if renormalize:
        p = p / p.sum()
    return DensityMatrix(np.diag(p).astype(complex))


def thermal_cutoff(s: float, tail: float = 1e-10) -> int:
    """Smallest cutoff at which the thermal tail ``tanh(s)^{2 (N+1)}`` is below ``tail``."""
    t2 = math.tanh(s) ** 2
    if t2 == 0.0:
        return 0
    n = math.ceil(math.log(tail) / math.log(t2)) - 1
    n = max(n, 0)
    while t2 ** (n + 1) >= tail:
        n += 1
    return n
