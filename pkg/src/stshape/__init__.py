"""Joint space-time transmit waveform shaping for spectrum sharing."""

from .model import (BeamWeights, ChannelMatrix, CodeVector, LinkConfig,
                    OccupancyMatrix, PulseMeta, SpaceTimeSignature,
                    analytic_sinr, assemble_signature, required_energy,
                    total_energy)
from .occupancy import (InterfererSpec, SnapshotBatch, estimate_occupancy,
                        true_occupancy)
from .shaper import ShapingResult, ShapingVariant, shape
from .stlinalg import ContractError, DimensionError, SingularMatrixError

__version__ = '0.1.0'

__all__ = ['BeamWeights', 'ChannelMatrix', 'CodeVector', 'LinkConfig',
           'OccupancyMatrix', 'PulseMeta', 'SpaceTimeSignature', 'analytic_sinr',
           'assemble_signature', 'required_energy', 'total_energy',
           'InterfererSpec', 'SnapshotBatch', 'estimate_occupancy', 'true_occupancy',
           'ShapingResult', 'ShapingVariant', 'shape',
           'ContractError', 'DimensionError', 'SingularMatrixError']
