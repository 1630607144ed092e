"""Square Gray-mapped QAM with unit average symbol energy."""

import numpy as np
from scipy.special import erfc

__all__ = ['QamConstellation', 'gray_qam_ber', 'qam_ser']


def _gray(n):
    return n ^ (n >> 1)


class QamConstellation:
    """
    Square Q-QAM, Q in {4, 16, 64}.

    Each axis is a sqrt(Q)-level PAM whose levels carry binary-reflected Gray
    labels; the in-phase label supplies the high bits of the symbol label.
    """

    def __init__(self, order):
        side = int(round(np.sqrt(order)))
        if side * side != order or order < 4 or side & (side - 1):
            raise ValueError(f"unsupported QAM order {order}")
        self.order = order
        self.side = side
        self.bits_per_axis = side.bit_length() - 1
        self.bits_per_symbol = 2 * self.bits_per_axis
        # E|a|^2 for levels +-1, +-3, ... over both axes
        self.scale = np.sqrt(2.0 * (order - 1) / 3.0)
        self.levels = (2.0 * np.arange(side) - (side - 1)) / self.scale
        self.axis_labels = np.array([_gray(i) for i in range(side)])

    @property
    def points(self):
        li, lq = np.meshgrid(self.levels, self.levels, indexing='ij')
        return (li + 1j * lq).ravel()

    def random_indices(self, rng, size):
        """Uniform (I, Q) level indices, shape ``(2, size)``."""
        return rng.integers(0, self.side, size=(2, size))

    def modulate(self, idx):
        return self.levels[idx[0]] + 1j * self.levels[idx[1]]

    def random_symbols(self, rng, size):
        return self.modulate(self.random_indices(rng, size))

    def slice(self, z):
        """Nearest-point decision; returns (I, Q) level indices."""
        z = np.asarray(z)
        def axis(x):
            k = np.rint((x * self.scale + (self.side - 1)) / 2.0)
            return np.clip(k, 0, self.side - 1).astype(int)
        return np.stack([axis(z.real), axis(z.imag)])

    def indices_of(self, symbols):
        """Map exact constellation points back to level indices."""
        return self.slice(symbols)

    def bit_errors(self, idx_tx, idx_rx):
        """Total Gray-label bit disagreements between two index arrays."""
        diff = self.axis_labels[idx_tx] ^ self.axis_labels[idx_rx]
        return int(np.unpackbits(diff.astype(np.uint8)[..., None], axis=-1).sum())


def gray_qam_ber(order, snr):
    """
    Exact bit-error probability of Gray square QAM in complex AWGN.

    ``snr`` is the symbol energy over noise variance (linear). Uses the
    per-bit-position decomposition for Gray-coded PAM, summed over both axes.
    """
    snr = np.asarray(snr, dtype=float)
    side = int(round(np.sqrt(order)))
    nbits = side.bit_length() - 1
    arg = np.sqrt(3.0 * snr / (2.0 * (order - 1)))
    total = np.zeros_like(snr)
    for k in range(1, nbits + 1):
        pk = np.zeros_like(snr)
        upper = int((1.0 - 2.0 ** (-k)) * side)
        for i in range(upper):
            t = i * 2 ** (k - 1) / side
            weight = (-1) ** int(np.floor(t)) * (2 ** (k - 1) - np.floor(t + 0.5))
            pk += weight * erfc((2 * i + 1) * arg)
        total += pk / side
    return total / nbits


def qam_ser(order, snr):
    """Symbol-error probability of square QAM in complex AWGN."""
    snr = np.asarray(snr, dtype=float)
    side = np.sqrt(order)
    p = (1.0 - 1.0 / side) * erfc(np.sqrt(3.0 * snr / (2.0 * (order - 1))))
    return 1.0 - (1.0 - p) ** 2
