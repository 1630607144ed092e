"""
Domain types for the chip-sampled MIMO link and the closed-form
SINR / energy relations of the max-SINR space-time receiver.

Vectors in the space-time domain have length ``N*L`` and are ordered
chip-major: entry ``l*N + n`` is receive antenna ``n`` at chip ``l``.
All energies are multiples of the noise density N0.
"""

from dataclasses import dataclass, field

import numpy as np

from .stlinalg import (ContractError, DimensionError, HERMITIAN_TOL,
                       hpd_solve, is_hermitian, kron)

__all__ = ['PulseMeta', 'LinkConfig', 'ChannelMatrix', 'CodeVector',
           'BeamWeights', 'SpaceTimeSignature', 'OccupancyMatrix',
           'db_to_linear', 'linear_to_db', 'assemble_signature',
           'analytic_sinr', 'required_energy', 'total_energy']

CONSTELLATION_ORDERS = (4, 16, 64)
NORM_TOL = 1e-10


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide='ignore'):
        return 10.0 * np.log10(x)


@dataclass(frozen=True)
class PulseMeta:
    """Continuous-time pulse parameters. Carried along, never used in the math."""
    roll_off: float = 0.35
    chip_duration: float = 1.5e-10
    carrier_hz: float = 900e6


@dataclass(frozen=True)
class LinkConfig:
    m_tx: int = 4
    n_rx: int = 4
    code_len: int = 4
    constellation_order: int = 64
    gamma_db: float = 18.0
    et_max: float = 20.0
    pulse_meta: PulseMeta = field(default_factory=PulseMeta)

    def __post_init__(self):
        for name in ('m_tx', 'n_rx', 'code_len'):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise ContractError(f"{name} must be a positive integer, got {val}")
        if self.n_rx < self.m_tx:
            raise ContractError(
                f"n_rx ({self.n_rx}) must be >= m_tx ({self.m_tx}) so that "
                "H* H^T is invertible")
        if self.constellation_order not in CONSTELLATION_ORDERS:
            raise ContractError(
                f"constellation_order must be one of {CONSTELLATION_ORDERS}")
        if not np.isfinite(self.gamma_db):
            raise ContractError("gamma_db must be finite")
        if not (self.et_max > 0 and np.isfinite(self.et_max)):
            raise ContractError("et_max must be positive and finite")

    @property
    def gamma(self):
        """Target SINR on the linear scale."""
        return float(db_to_linear(self.gamma_db))

    @property
    def dim(self):
        return self.n_rx * self.code_len


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """M x N channel; ``h[m, n]`` links transmit antenna m to receive antenna n."""
    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=complex)
        if h.ndim != 2:
            raise DimensionError("channel must be a 2-D array")
        if not np.all(np.isfinite(h)):
            raise ContractError("channel contains NaN or Inf")
        m, n = h.shape
        if n < m:
            raise ContractError(f"channel {h.shape} needs N >= M")
        sv = np.linalg.eigvalsh(h @ h.conj().T)
        if sv[0] <= 1e-10 * sv[-1]:
            raise ContractError("channel is rank deficient (rank(H) < M)")
        h.setflags(write=False)
        object.__setattr__(self, 'h', h)

    @property
    def m(self):
        return self.h.shape[0]

    @property
    def n(self):
        return self.h.shape[1]


# chip values in lexicographic (Re, Im) order: -1 < -j < +j < +1
ALPHABET = np.array([-1.0, -1.0j, 1.0j, 1.0], dtype=complex)


@dataclass(frozen=True, eq=False)
class CodeVector:
    """Quaternary chip code with entries in {+-1, +-j} / sqrt(L)."""
    s: np.ndarray

    def __post_init__(self):
        s = np.array(self.s, dtype=complex).ravel()
        if s.size == 0:
            raise DimensionError("code must have at least one chip")
        unit = s * np.sqrt(s.size)
        idx = np.argmin(np.abs(unit[:, None] - ALPHABET[None, :]), axis=1)
        if not np.allclose(unit, ALPHABET[idx], atol=1e-9):
            raise ContractError("code chips must lie in {+-1, +-j}/sqrt(L)")
        # snap to the exact alphabet
        s = ALPHABET[idx] / np.sqrt(s.size)
        assert abs(np.vdot(s, s).real - 1.0) < NORM_TOL
        s.setflags(write=False)
        object.__setattr__(self, 's', s)

    @classmethod
    def from_symbols(cls, symbols):
        """Build from unit chips, e.g. ``[1, -1, 1j, -1j]``."""
        symbols = np.asarray(symbols, dtype=complex).ravel()
        return cls(symbols / np.sqrt(symbols.size))

    @classmethod
    def ones(cls, length):
        return cls(np.ones(length) / np.sqrt(length))

    def __len__(self):
        return self.s.size


@dataclass(frozen=True, eq=False)
class BeamWeights:
    """Per-antenna complex weights with ||w||^2 = M."""
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=complex).ravel()
        if w.size == 0:
            raise DimensionError("weights must be non-empty")
        if not np.all(np.isfinite(w)):
            raise ContractError("weights contain NaN or Inf")
        if abs(np.vdot(w, w).real - w.size) > NORM_TOL * w.size:
            raise ContractError(
                f"||w||^2 must equal M={w.size}, got {np.vdot(w, w).real:.12g}")
        w.setflags(write=False)
        object.__setattr__(self, 'w', w)

    @classmethod
    def normalized(cls, w):
        """Scale an arbitrary non-zero vector to ||w||^2 = M."""
        w = np.asarray(w, dtype=complex).ravel()
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            raise ContractError("cannot normalize a zero weight vector")
        return cls(np.sqrt(w.size) * w / nrm)

    @classmethod
    def ones(cls, m):
        return cls(np.ones(m, dtype=complex))

    def __len__(self):
        return self.w.size


@dataclass(frozen=True, eq=False)
class SpaceTimeSignature:
    g: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=complex).ravel()
        if not np.all(np.isfinite(g)):
            raise ContractError("signature contains NaN or Inf")
        g.setflags(write=False)
        object.__setattr__(self, 'g', g)


@dataclass(frozen=True, eq=False)
class OccupancyMatrix:
    """NL x NL Hermitian positive definite interference-plus-noise autocorrelation."""
    o: np.ndarray

    def __post_init__(self):
        o = np.array(self.o, dtype=complex)
        if o.ndim != 2 or o.shape[0] != o.shape[1]:
            raise DimensionError(f"occupancy must be square, got {o.shape}")
        if not np.all(np.isfinite(o)):
            raise ContractError("occupancy contains NaN or Inf")
        if not is_hermitian(o, HERMITIAN_TOL):
            raise ContractError("occupancy matrix is not Hermitian")
        o = 0.5 * (o + o.conj().T)
        o.setflags(write=False)
        object.__setattr__(self, 'o', o)

    @property
    def dim(self):
        return self.o.shape[0]


def assemble_signature(s, w, h):
    """g = s kron (H^T w)."""
    if h.h.shape[0] != len(w):
        raise DimensionError(f"H has {h.m} rows but w has length {len(w)}")
    return SpaceTimeSignature(kron(s.s, h.h.T @ w.w))


def _quad_form(g, o):
    g = g.g if isinstance(g, SpaceTimeSignature) else np.asarray(g, dtype=complex)
    if g.size != o.dim:
        raise DimensionError(f"signature length {g.size} != occupancy size {o.dim}")
    return float(np.vdot(g, hpd_solve(o.o, g, name='occupancy')).real)


def analytic_sinr(g, o, e_t, m):
    """Output SINR of the max-SINR filter: (E_T / M) g^H O^{-1} g."""
    if e_t < 0:
        raise ContractError("e_t must be non-negative")
    return (e_t / m) * _quad_form(g, o)


def required_energy(g, o, gamma, m):
    """Smallest total energy per symbol reaching linear SINR ``gamma``."""
    if gamma <= 0:
        raise ContractError("gamma must be positive")
    q = _quad_form(g, o)
    if q <= 0.0:
        raise ContractError("zero signature cannot reach any SINR")
    return gamma * m / q


def total_energy(e_s, w):
    """Total transmit energy per symbol, E_s * sum |w_m|^2."""
    if e_s < 0:
        raise ContractError("e_s must be non-negative")
    w = w.w if isinstance(w, BeamWeights) else np.asarray(w)
    return float(e_s * np.sum(np.abs(w) ** 2))
