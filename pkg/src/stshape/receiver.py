"""
Max-SINR space-time receive filter and Monte-Carlo checks of its output
SINR and error rates.
"""

from dataclasses import dataclass

import numpy as np

from .model import SpaceTimeSignature
from .occupancy import noise_snapshot, interferer_snapshot
from .qam import QamConstellation
from .stlinalg import ContractError, DimensionError, hpd_solve

__all__ = ['ReceiveFilter', 'SymbolFrame', 'max_sinr_filter', 'filter_sinr',
           'simulate_frame', 'measure_empirical_sinr', 'detect_and_ber']


def _vec(g):
    return g.g if isinstance(g, SpaceTimeSignature) else np.asarray(g, dtype=complex)


@dataclass(frozen=True, eq=False)
class ReceiveFilter:
    f: np.ndarray


@dataclass(frozen=True, eq=False)
class SymbolFrame:
    """Transmitted symbols (as QAM level indices and values) and received vectors."""
    tx_indices: np.ndarray
    tx_symbols: np.ndarray
    rx_vectors: np.ndarray
    order: int

    def __post_init__(self):
        if self.tx_symbols.shape[0] != self.rx_vectors.shape[0]:
            raise DimensionError("symbol and received-vector counts differ")

    @property
    def k(self):
        return self.tx_symbols.shape[0]


def max_sinr_filter(o, g):
    """f = O^{-1} g."""
    g = _vec(g)
    if not np.any(g):
        raise ContractError("signature must be non-zero")
    return ReceiveFilter(hpd_solve(o.o, g, name='occupancy'))


def filter_sinr(f, o, g, e_s):
    """Output SINR of any linear filter: E_s |f^H g|^2 / (f^H O f)."""
    f = f.f if isinstance(f, ReceiveFilter) else np.asarray(f)
    g = _vec(g)
    return float(e_s * abs(np.vdot(f, g)) ** 2 / np.vdot(f, o.o @ f).real)


def simulate_frame(g, o_specs, sigma2, e_t, m, cfg, rng, k):
    """
    ``k`` received vectors ``sqrt(e_t/m) b g + interference + noise``.

    Data symbols are uniform over unit-energy Q-QAM; the interferers draw
    their own 64-QAM streams.
    """
    if e_t < 0:
        raise ContractError("e_t must be non-negative")
    g = _vec(g)
    qam = QamConstellation(cfg.constellation_order)
    data_rng, noise_rng, *int_rngs = rng.spawn(2 + len(o_specs))
    idx = qam.random_indices(data_rng, k)
    b = qam.modulate(idx)
    y = np.sqrt(e_t / m) * b[:, None] * g[None, :]
    y += noise_snapshot(cfg.n_rx, cfg.code_len, sigma2, noise_rng, size=k)
    for spec, r in zip(o_specs, int_rngs):
        y += interferer_snapshot(spec, r, size=k)
    return SymbolFrame(idx, b, y, cfg.constellation_order)


def _outputs(frame, filt, g, e_t, m):
    if frame.k == 0:
        raise ContractError("empty frame")
    f = filt.f
    z = frame.rx_vectors @ f.conj()
    gain = np.vdot(f, _vec(g)) * np.sqrt(e_t / m)
    return z, gain


def measure_empirical_sinr(frame, filt, g, e_t, m):
    """
    Filter-output SINR estimated with known symbols.

    Signal power is the mean |f^H g sqrt(e_t/m) b_k|^2, disturbance power the
    mean squared residual after removing it.
    """
    z, gain = _outputs(frame, filt, g, e_t, m)
    clean = gain * frame.tx_symbols
    signal = np.mean(np.abs(clean) ** 2)
    disturbance = np.mean(np.abs(z - clean) ** 2)
    if signal == 0.0:
        return 0.0
    return float(signal / disturbance)


def detect_and_ber(frame, filt, g, e_t, m, cfg=None):
    """
    Symbol and bit error rates after gain-normalized minimum-distance slicing.

    Returns ``(ser, ber)``. Bits follow the Gray labels of the constellation.
    """
    order = frame.order if cfg is None else cfg.constellation_order
    qam = QamConstellation(order)
    z, gain = _outputs(frame, filt, g, e_t, m)
    if gain == 0:
        return 1.0 - 1.0 / qam.order, 0.5
    decided = qam.slice(z / gain)
    wrong = np.any(decided != frame.tx_indices, axis=0)
    ser = float(np.mean(wrong))
    ber = qam.bit_errors(frame.tx_indices, decided) / (frame.k * qam.bits_per_symbol)
    return ser, float(ber)
