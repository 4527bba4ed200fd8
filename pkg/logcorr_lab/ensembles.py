"""Haar-random eigenphase samplers for the classical compact groups and the CβE."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

# Eigenvalues further than this from the unit circle indicate a broken factorization
UNIT_MODULUS_TOLERANCE = 1e-8

# Deviations above this are projected back onto the circle with a warning
UNIT_MODULUS_WARNING = 1e-12

# Matrix entries held per sampling chunk
MATRIX_BATCH_ENTRIES = 1 << 21


class Group(Enum):
    """Matrix ensembles with a sampler."""
    UNITARY = "unitary"
    SPECIAL_ORTHOGONAL_EVEN = "so_even"
    ORTHOGONAL_MINUS = "o_minus"
    SYMPLECTIC = "symplectic"
    CIRCULAR_BETA = "cbe"

    @classmethod
    def from_string(cls, value: str) -> 'Group':
        """Create Group from a config string, accepting the usual short names."""
        aliases = {
            "u": cls.UNITARY,
            "cue": cls.UNITARY,
            "so": cls.SPECIAL_ORTHOGONAL_EVEN,
            "so_even": cls.SPECIAL_ORTHOGONAL_EVEN,
            "o-": cls.ORTHOGONAL_MINUS,
            "o_minus": cls.ORTHOGONAL_MINUS,
            "sp": cls.SYMPLECTIC,
            "usp": cls.SYMPLECTIC,
            "cbe": cls.CIRCULAR_BETA,
            "circular_beta": cls.CIRCULAR_BETA,
        }
        key = value.strip().lower()
        if key in aliases:
            return aliases[key]
        key = key.replace("-", "_")
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"Unknown group: {value}")

    @property
    def doubled(self) -> bool:
        """True when the matrix dimension is 2N rather than N."""
        return self in (Group.SPECIAL_ORTHOGONAL_EVEN, Group.ORTHOGONAL_MINUS, Group.SYMPLECTIC)


@dataclass(frozen=True, eq=False)
class EigenphaseSet:
    """Sorted eigenphases in [0, 2π) of one sampled matrix."""
    group: Group
    n_half: int
    phases: np.ndarray
    beta_ensemble: Optional[float] = None

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float)
        expected = 2 * self.n_half if self.group.doubled else self.n_half
        if phases.shape != (expected,):
            raise ValueError(f"Expected {expected} phases for {self.group.value}, got shape {phases.shape}")
        if phases.size and (phases.min() < 0.0 or phases.max() >= TWO_PI):
            raise ValueError("Phases must lie in [0, 2π)")
        if np.any(np.diff(phases) < 0):
            raise ValueError("Phases must be sorted ascending")
        phases.setflags(write=False)
        object.__setattr__(self, "phases", phases)

    @property
    def size(self) -> int:
        return int(self.phases.size)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    @classmethod
    def from_phases(cls, phases, group: Group = Group.UNITARY, beta_ensemble: Optional[float] = None) -> 'EigenphaseSet':
        """Wrap arbitrary angles (reduced mod 2π and sorted)."""
        phases = np.mod(np.asarray(phases, dtype=float), TWO_PI)
        phases[phases >= TWO_PI] = 0.0
        phases = np.sort(phases)
        n_half = phases.size // 2 if group.doubled else phases.size
        return cls(group=group, n_half=n_half, phases=phases, beta_ensemble=beta_ensemble)


def _check_request(group: Group, N: int, beta: Optional[float]) -> None:
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if group is Group.CIRCULAR_BETA:
        if beta is None or beta <= 0:
            raise ValueError("CircularBeta sampling requires beta > 0")
    elif beta is not None:
        raise ValueError(f"beta is only meaningful for the circular beta ensemble, not {group.value}")


def _check_unit_modulus(values: np.ndarray) -> None:
    deviation = np.abs(np.abs(values) - 1.0)
    worst = float(deviation.max()) if deviation.size else 0.0
    if worst > UNIT_MODULUS_TOLERANCE:
        raise ValueError(f"Eigenvalue off the unit circle by {worst:.3e}")
    if worst > UNIT_MODULUS_WARNING:
        count = int(np.count_nonzero(deviation > UNIT_MODULUS_WARNING))
        logger.warning(f"Renormalized {count} eigenvalue(s) onto the unit circle (max deviation {worst:.3e})")


def _phases_from_eigenvalues(values: np.ndarray) -> np.ndarray:
    """Angles in [0, 2π) of unit-modulus eigenvalues, last axis sorted."""
    _check_unit_modulus(values)
    phases = np.mod(np.angle(values), TWO_PI)
    phases[phases >= TWO_PI] = 0.0
    return np.sort(phases, axis=-1)


def _pair_phases(half: np.ndarray, fixed: Optional[np.ndarray] = None) -> np.ndarray:
    """Build θ ∪ (2π − θ) (plus fixed points) from representatives in [0, π]."""
    mirrored = np.mod(TWO_PI - half, TWO_PI)
    parts = [half, mirrored] if fixed is None else [half, mirrored, fixed]
    phases = np.concatenate(parts, axis=-1)
    return np.sort(phases, axis=-1)


def _conjugate_pair_phases(values: np.ndarray) -> np.ndarray:
    """Symmetrize spectra that come in conjugate pairs, batch on leading axis."""
    magnitude = np.sort(np.abs(np.angle(values)), axis=-1)
    half = 0.5 * (magnitude[..., 0::2] + magnitude[..., 1::2])
    return _pair_phases(half)


def _orthogonal_minus_phases(values: np.ndarray) -> np.ndarray:
    # det = -1 forces one eigenvalue at +1 and one at -1; the rest pair up
    angles = np.abs(np.angle(values))
    order = np.argsort(angles, axis=-1)
    inner = np.take_along_axis(angles, order[..., 1:-1], axis=-1)
    half = 0.5 * (inner[..., 0::2] + inner[..., 1::2])
    fixed = np.broadcast_to(np.array([0.0, np.pi]), half.shape[:-1] + (2,))
    return _pair_phases(half, fixed)


def haar_unitary_batch(N: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitaries via QR of complex Ginibre matrices with the phase fix."""
    z = (rng.standard_normal((size, N, N)) + 1j * rng.standard_normal((size, N, N))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def haar_orthogonal_batch(dim: int, size: int, rng: np.random.Generator, det_sign: int = 1) -> np.ndarray:
    """Haar measure on the det = det_sign component of O(dim)."""
    z = rng.standard_normal((size, dim, dim))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    q = q * d[..., None, :]
    sign, _ = np.linalg.slogdet(q)
    flip = sign != det_sign
    q[flip, :, 0] *= -1.0
    return q


def haar_symplectic_batch(N: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Haar measure on USp(2N) by quaternionic Gram-Schmidt.

    Each new column x is orthogonalized against the previous columns and their
    partners -Ωx̄ (Ω = [[0, I], [-I, 0]]); the matrix [X, -ΩX̄] is unitary and
    satisfies AᵀΩA = Ω.
    """
    dim = 2 * N
    g = (rng.standard_normal((size, dim, N)) + 1j * rng.standard_normal((size, dim, N))) / np.sqrt(2.0)
    xs = np.zeros((size, dim, N), dtype=complex)
    ys = np.zeros((size, dim, N), dtype=complex)

    def partner(v: np.ndarray) -> np.ndarray:
        w = np.conj(v)
        return np.concatenate([-w[:, N:], w[:, :N]], axis=1)

    for j in range(N):
        v = g[:, :, j]
        basis = np.concatenate([xs[:, :, :j], ys[:, :, :j]], axis=2)
        for _ in range(2):
            coeffs = np.einsum("bak,ba->bk", basis.conj(), v)
            v = v - np.einsum("bak,bk->ba", basis, coeffs)
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
        xs[:, :, j] = v
        ys[:, :, j] = partner(v)
    return np.concatenate([xs, ys], axis=2)


def verblunsky_coefficients(N: int, beta: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Independent Verblunsky coefficients whose OPUC zeros follow the CβE.

    α_k is rotation invariant with |α_k|² ~ Beta(1, β(N-k-1)/2) for k < N-1,
    and α_{N-1} is uniform on the unit circle.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    alphas = np.empty((size, N), dtype=complex)
    if N > 1:
        b = beta * (N - 1 - np.arange(N - 1)) / 2.0
        radius = np.sqrt(rng.beta(1.0, b, size=(size, N - 1)))
        angle = rng.uniform(0.0, TWO_PI, size=(size, N - 1))
        alphas[:, :-1] = radius * np.exp(1j * angle)
    alphas[:, -1] = np.exp(1j * rng.uniform(0.0, TWO_PI, size=size))
    return alphas


def cmv_matrix(alphas: np.ndarray) -> np.ndarray:
    """CMV matrix L·M of a finite Verblunsky sequence with |α_{N-1}| = 1."""
    alphas = np.asarray(alphas, dtype=complex)
    N = alphas.size
    rho = np.sqrt(np.clip(1.0 - np.abs(alphas) ** 2, 0.0, None))
    L = np.zeros((N, N), dtype=complex)
    M = np.zeros((N, N), dtype=complex)
    M[0, 0] = 1.0
    for k in range(N):
        target = L if k % 2 == 0 else M
        if k == N - 1:
            target[k, k] = np.conj(alphas[k])
            continue
        target[k, k] = np.conj(alphas[k])
        target[k, k + 1] = rho[k]
        target[k + 1, k] = rho[k]
        target[k + 1, k + 1] = -alphas[k]
    return L @ M


def cmv_eigenphases(alphas: np.ndarray) -> np.ndarray:
    """Eigenphases of the CMV matrix, i.e. the zeros of Φ_N on the circle."""
    return _phases_from_eigenvalues(np.linalg.eigvals(cmv_matrix(alphas)))


def phase_batch_size(group: Group, N: int) -> int:
    """Draws per sampling chunk so one chunk holds about MATRIX_BATCH_ENTRIES matrix entries."""
    dim = N if group in (Group.UNITARY, Group.CIRCULAR_BETA) else 2 * N
    return max(1, MATRIX_BATCH_ENTRIES // (dim * dim))


def sample_phase_batch(group: Group, N: int, size: int, rng: np.random.Generator,
                       beta: Optional[float] = None) -> np.ndarray:
    """Sorted eigenphases of `size` independent draws, shape (size, N or 2N)."""
    _check_request(group, N, beta)
    if group is Group.UNITARY:
        values = np.linalg.eigvals(haar_unitary_batch(N, size, rng))
        return _phases_from_eigenvalues(values)
    if group is Group.SPECIAL_ORTHOGONAL_EVEN:
        values = np.linalg.eigvals(haar_orthogonal_batch(2 * N, size, rng, det_sign=1))
        _check_unit_modulus(values)
        return _conjugate_pair_phases(values)
    if group is Group.ORTHOGONAL_MINUS:
        values = np.linalg.eigvals(haar_orthogonal_batch(2 * N, size, rng, det_sign=-1))
        _check_unit_modulus(values)
        return _orthogonal_minus_phases(values)
    if group is Group.SYMPLECTIC:
        values = np.linalg.eigvals(haar_symplectic_batch(N, size, rng))
        _check_unit_modulus(values)
        return _conjugate_pair_phases(values)
    alphas = verblunsky_coefficients(N, beta, size, rng)
    return np.stack([cmv_eigenphases(row) for row in alphas])


def sample_eigenphases(group: Group, N: int, rng: np.random.Generator,
                       beta: Optional[float] = None) -> EigenphaseSet:
    """Draw one eigenphase set from Haar measure (or the CβE density)."""
    if isinstance(group, str):
        group = Group.from_string(group)
    phases = sample_phase_batch(group, N, 1, rng, beta=beta)[0]
    return EigenphaseSet(group=group, n_half=N, phases=phases,
                         beta_ensemble=beta if group is Group.CIRCULAR_BETA else None)


def trace_power(eigs: EigenphaseSet, j: int) -> complex:
    """Tr A^j = Σ exp(i j θ_m)."""
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j}")
    return complex(np.exp(1j * j * eigs.phases).sum())


def trace_power_batch(phases: np.ndarray, j: int) -> np.ndarray:
    return np.exp(1j * j * phases).sum(axis=-1)
