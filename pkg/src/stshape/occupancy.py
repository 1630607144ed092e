"""
Interference environment of the shared band and the space-time occupancy
autocorrelation matrix, either in closed form or estimated from snapshots.

Interferers are symbol-synchronous with the desired link. A narrowband
interferer repeats one symbol-long pulse over the L chips, so its chip
signature is the constant vector 1/sqrt(L); a spread-spectrum interferer
uses its own quaternary code.
"""

from dataclasses import dataclass

import numpy as np

from .model import ALPHABET, CodeVector, OccupancyMatrix, db_to_linear
from .qam import QamConstellation
from .stlinalg import ContractError, kron

__all__ = ['InterfererSpec', 'SnapshotBatch', 'draw_interferer',
           'noise_snapshot', 'interferer_snapshot', 'occupancy_snapshots',
           'estimate_occupancy', 'true_occupancy', 'default_loading',
           'complex_normal']

KINDS = ('narrowband', 'spread_spectrum')
_QAM64 = QamConstellation(64)


def complex_normal(rng, size, var=1.0):
    """Circularly-symmetric complex Gaussian with per-entry variance ``var``."""
    return np.sqrt(var / 2.0) * (rng.standard_normal(size)
                                 + 1j * rng.standard_normal(size))


@dataclass(frozen=True, eq=False)
class InterfererSpec:
    kind: str
    e_i_db: float
    w_i: np.ndarray
    h_i: np.ndarray
    code_i: np.ndarray
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown interferer kind {self.kind!r}")
        w = np.array(self.w_i, dtype=complex).ravel()
        h = np.array(self.h_i, dtype=complex)
        c = np.array(self.code_i, dtype=complex).ravel()
        if h.ndim != 2 or h.shape[0] != w.size:
            raise ContractError(f"h_i shape {h.shape} does not match m_i={w.size}")
        if abs(np.vdot(w, w).real - w.size) > 1e-10 * w.size:
            raise ContractError("interferer weights must satisfy ||w_i||^2 = m_i")
        if abs(np.linalg.norm(c) - 1.0) > 1e-10:
            raise ContractError("interferer chip signature must have unit norm")
        if np.linalg.matrix_rank(h) < h.shape[0]:
            raise ContractError("interferer channel must have full row rank")
        for a in (w, h, c):
            a.setflags(write=False)
        object.__setattr__(self, 'w_i', w)
        object.__setattr__(self, 'h_i', h)
        object.__setattr__(self, 'code_i', c)

    @property
    def m_i(self):
        return self.w_i.size

    @property
    def e_i(self):
        return float(db_to_linear(self.e_i_db))

    @property
    def signature(self):
        """code_i kron (h_i^T w_i), the interferer's space-time footprint."""
        return kron(self.code_i, self.h_i.T @ self.w_i)

    def with_energy(self, e_i_db):
        return InterfererSpec(self.kind, e_i_db, self.w_i, self.h_i,
                              self.code_i, self.seed)


def draw_interferer(kind, e_i_db, m_i, n_rx, code_len, rng, seed=0):
    """
    Random interferer: i.i.d. CN(0,1) channel and weights (weights rescaled
    to ||w||^2 = m_i), plus a uniform quaternary code for spread spectrum.

    Channel and weights are drawn before the code so interferers built from
    the same generator state share geometry across different code lengths.
    """
    h = complex_normal(rng, (m_i, n_rx))
    w = complex_normal(rng, m_i)
    w *= np.sqrt(m_i) / np.linalg.norm(w)
    if kind == 'narrowband':
        code = np.ones(code_len) / np.sqrt(code_len)
    elif kind == 'spread_spectrum':
        code = CodeVector(ALPHABET[rng.integers(0, 4, code_len)]
                          / np.sqrt(code_len)).s
    else:
        raise ContractError(f"unknown interferer kind {kind!r}")
    return InterfererSpec(kind, e_i_db, w, h, code, seed)


@dataclass(frozen=True, eq=False)
class SnapshotBatch:
    """Interference-plus-noise vectors, one row per symbol interval."""
    snapshots: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.snapshots, dtype=complex))
        if x.shape[0] < 1 or x.size == 0:
            raise ContractError("snapshot batch is empty")
        if not np.all(np.isfinite(x)):
            raise ContractError("snapshots contain NaN or Inf")
        object.__setattr__(self, 'snapshots', x)

    @property
    def count(self):
        return self.snapshots.shape[0]


def noise_snapshot(n, l, sigma2, rng, size=None):
    """
    White noise in the space-time domain, CN(0, sigma2) per entry.

    Returns shape ``(n*l,)`` or ``(size, n*l)``.
    """
    if not sigma2 > 0:
        raise ContractError("sigma2 must be positive")
    shape = (n * l,) if size is None else (size, n * l)
    return complex_normal(rng, shape, sigma2)


def interferer_snapshot(spec, rng, size=None):
    """sqrt(E_i) * b * signature, with b a unit-energy 64-QAM symbol."""
    count = 1 if size is None else size
    b = _QAM64.random_symbols(rng, count)
    out = np.sqrt(spec.e_i) * b[:, None] * spec.signature[None, :]
    return out[0] if size is None else out


def occupancy_snapshots(specs, sigma2, n, l, rng, count):
    """
    Draw ``count`` interference-plus-noise vectors.

    Each interferer consumes its own generator spawned from ``rng`` so
    scaling E_i does not change the underlying symbol draws.
    """
    children = rng.spawn(len(specs) + 1)
    x = noise_snapshot(n, l, sigma2, children[0], size=count)
    for spec, child in zip(specs, children[1:]):
        x += interferer_snapshot(spec, child, size=count)
    return SnapshotBatch(x)


def default_loading(batch):
    x = batch.snapshots
    return 1e-6 * float(np.sum(np.abs(x) ** 2)) / x.shape[0] / x.shape[1]


def estimate_occupancy(batch, loading=None):
    """
    Sample autocorrelation (1/S) sum o o^H plus diagonal loading.

    ``loading=None`` applies the default 1e-6 * trace / (NL).
    """
    if batch.count < 1:
        raise ContractError("empty snapshot batch")
    if loading is None:
        loading = default_loading(batch)
    if loading < 0:
        raise ContractError("loading must be non-negative")
    x = batch.snapshots
    r = x.T @ x.conj() / x.shape[0]
    r = 0.5 * (r + r.conj().T)
    r[np.diag_indices_from(r)] += loading
    return OccupancyMatrix(r)


def true_occupancy(specs, sigma2, dim=None):
    """sum_i E_i g_i g_i^H + sigma2 I."""
    if not sigma2 > 0:
        raise ContractError("sigma2 must be positive")
    if dim is None:
        if not specs:
            raise ContractError("dimension required when there are no interferers")
        dim = specs[0].signature.size
    o = sigma2 * np.eye(dim, dtype=complex)
    for spec in specs:
        g = spec.signature
        if g.size != dim:
            raise ContractError(f"interferer signature length {g.size} != {dim}")
        o += spec.e_i * np.outer(g, g.conj())
    return OccupancyMatrix(o)
