"""
Scenario files.

A scenario is a flat text file of ``dotted.key = value`` lines; ``#`` starts
a comment. Recognized keys::

    link.m_tx, link.n_rx, link.code_len        positive integers
    link.constellation_order                   4, 16 or 64
    link.gamma_db                              target SINR in dB
    link.et_max                                energy cap, multiples of N0
    link.roll_off, link.chip_duration,
    link.carrier_hz                            pulse metadata (not used)
    noise.sigma2                               noise variance (default 1)
    interferer.<i>.kind                        narrowband | spread_spectrum
    interferer.<i>.e_i_db                      energy per symbol over N0, dB
    interferer.<i>.m_i                         interferer antennas (default 4)
    occupancy.mode                             analytic | estimated
    occupancy.snapshots                        S for estimated mode
    occupancy.loading                          auto | non-negative float
    policy                                     cap | refrain
    weights.rule                               max_metric | closed_form
    variants                                   comma list of variant tags
    fixed.code                                 chips, e.g. 1,-1,j,-j
    fixed.weights                              complex list, e.g. 1,1j,-1,1
    trials                                     channel redraws (>= 1)
    seed                                       master seed
    sweep.axis                                 et_max | e_i_db
    sweep.values                               comma list or start:stop:step
"""

from dataclasses import dataclass

import numpy as np

from ..model import BeamWeights, CodeVector, LinkConfig, PulseMeta
from ..occupancy import KINDS
from ..shaper import POLICIES, VARIANTS, WEIGHT_RULES, ShapingVariant
from ..stlinalg import ContractError

__all__ = ['ConfigError', 'InterfererTemplate', 'ScenarioConfig', 'SweepSpec',
           'parse_config', 'load_config', 'parse_values']


class ConfigError(ValueError):
    """Invalid scenario file; the message names the offending key."""


@dataclass(frozen=True)
class InterfererTemplate:
    kind: str
    e_i_db: float
    m_i: int = 4


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple

    def __post_init__(self):
        if self.axis not in ('et_max', 'e_i_db'):
            raise ConfigError(f"sweep.axis: unknown axis {self.axis!r}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ConfigError("sweep.values: must not be empty")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("sweep.values: must be strictly increasing")
        if self.axis == 'et_max' and vals[0] <= 0:
            raise ConfigError("sweep.values: et_max values must be positive")
        object.__setattr__(self, 'values', vals)


@dataclass(frozen=True)
class ScenarioConfig:
    link: LinkConfig
    interferers: tuple = ()
    sigma2: float = 1.0
    occupancy_mode: str = 'analytic'
    snapshots: int = None
    loading: float = None
    policy: str = 'cap'
    weight_rule: str = 'max_metric'
    variants: tuple = VARIANTS
    fixed_code: CodeVector = None
    fixed_weights: BeamWeights = None
    trials: int = 100
    seed: int = 0
    sweep: SweepSpec = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")
        if not self.variants:
            raise ConfigError("variants: need at least one variant")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"variants: unknown variant {v!r}")
        if self.policy not in POLICIES:
            raise ConfigError(f"policy: must be one of {POLICIES}")
        if self.weight_rule not in WEIGHT_RULES:
            raise ConfigError(f"weights.rule: must be one of {WEIGHT_RULES}")
        if self.occupancy_mode not in ('analytic', 'estimated'):
            raise ConfigError("occupancy.mode: must be analytic or estimated")
        if not self.sigma2 > 0:
            raise ConfigError("noise.sigma2: must be positive")
        if self.snapshots is not None and self.snapshots < 1:
            raise ConfigError("occupancy.snapshots: must be >= 1")
        if self.loading is not None and self.loading < 0:
            raise ConfigError("occupancy.loading: must be non-negative")
        if self.fixed_code is not None and len(self.fixed_code) != self.link.code_len:
            raise ConfigError("fixed.code: length must equal link.code_len")
        if self.fixed_weights is not None and len(self.fixed_weights) != self.link.m_tx:
            raise ConfigError("fixed.weights: length must equal link.m_tx")
        for t in self.interferers:
            if t.kind not in KINDS:
                raise ConfigError(f"interferer: unknown kind {t.kind!r}")
            if t.m_i < 1:
                raise ConfigError("interferer: m_i must be >= 1")

    @property
    def snapshot_count(self):
        if self.snapshots is not None:
            return self.snapshots
        return 4 * self.link.dim * 10

    def shaping_variants(self):
        return [ShapingVariant.with_defaults(tag, self.link, self.fixed_code,
                                             self.fixed_weights)
                for tag in self.variants]


def parse_values(text):
    """``1,2,5`` or ``start:stop:step`` (stop included when on the grid)."""
    text = text.strip()
    if ':' in text:
        parts = text.split(':')
        if len(parts) != 3:
            raise ConfigError("sweep.values: range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("sweep.values: step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    return tuple(float(v) for v in text.split(',') if v.strip())


def _parse_chips(text):
    table = {'1': 1, '+1': 1, '-1': -1, 'j': 1j, '+j': 1j, '-j': -1j}
    try:
        chips = [table[c.strip().lower()] for c in text.split(',')]
    except KeyError as exc:
        raise ConfigError(f"fixed.code: bad chip {exc.args[0]!r}") from None
    return CodeVector.from_symbols(chips)


def _parse_complex_list(text, key):
    try:
        return [complex(v.strip().replace(' ', '')) for v in text.split(',')]
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated complex numbers") from None


_LINK_INT = ('m_tx', 'n_rx', 'code_len', 'constellation_order')
_LINK_FLOAT = ('gamma_db', 'et_max')
_PULSE = ('roll_off', 'chip_duration', 'carrier_hz')


def _number(key, value, kind):
    try:
        if kind is int:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}") from None


def parse_config(text):
    """Parse scenario text into ``ScenarioConfig`` (with its sweep attached)."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (p.strip() for p in line.split('=', 1))
        if key in entries:
            raise ConfigError(f"{key}: duplicate key")
        entries[key] = value

    link_kw, pulse_kw, interferers = {}, {}, {}
    kw = {}
    sweep_axis = sweep_values = None
    for key, value in entries.items():
        parts = key.split('.')
        if parts[0] == 'link' and len(parts) == 2:
            name = parts[1]
            if name in _LINK_INT:
                link_kw[name] = _number(key, value, int)
            elif name in _LINK_FLOAT:
                link_kw[name] = _number(key, value, float)
            elif name in _PULSE:
                pulse_kw[name] = _number(key, value, float)
            else:
                raise ConfigError(f"{key}: unknown key")
        elif parts[0] == 'interferer' and len(parts) == 3:
            slot = interferers.setdefault(parts[1], {})
            if parts[2] == 'kind':
                slot['kind'] = value
            elif parts[2] == 'e_i_db':
                slot['e_i_db'] = _number(key, value, float)
            elif parts[2] == 'm_i':
                slot['m_i'] = _number(key, value, int)
            else:
                raise ConfigError(f"{key}: unknown key")
        elif key == 'noise.sigma2':
            kw['sigma2'] = _number(key, value, float)
        elif key == 'occupancy.mode':
            kw['occupancy_mode'] = value
        elif key == 'occupancy.snapshots':
            kw['snapshots'] = _number(key, value, int)
        elif key == 'occupancy.loading':
            kw['loading'] = None if value == 'auto' else _number(key, value, float)
        elif key == 'policy':
            kw['policy'] = value
        elif key == 'weights.rule':
            kw['weight_rule'] = value
        elif key == 'variants':
            kw['variants'] = tuple(v.strip() for v in value.split(',') if v.strip())
        elif key == 'fixed.code':
            try:
                kw['fixed_code'] = _parse_chips(value)
            except ContractError as exc:
                raise ConfigError(f"fixed.code: {exc}") from None
        elif key == 'fixed.weights':
            try:
                kw['fixed_weights'] = BeamWeights.normalized(
                    _parse_complex_list(value, key))
            except ContractError as exc:
                raise ConfigError(f"fixed.weights: {exc}") from None
        elif key == 'trials':
            kw['trials'] = _number(key, value, int)
        elif key == 'seed':
            kw['seed'] = _number(key, value, int)
        elif key == 'sweep.axis':
            sweep_axis = value
        elif key == 'sweep.values':
            sweep_values = parse_values(value)
        else:
            raise ConfigError(f"{key}: unknown key")

    try:
        link = LinkConfig(pulse_meta=PulseMeta(**pulse_kw), **link_kw)
    except ContractError as exc:
        raise ConfigError(f"link: {exc}") from None

    templates = []
    for slot in sorted(interferers, key=lambda s: (len(s), s)):
        spec = interferers[slot]
        if 'kind' not in spec or 'e_i_db' not in spec:
            raise ConfigError(f"interferer.{slot}: kind and e_i_db are required")
        templates.append(InterfererTemplate(spec['kind'], spec['e_i_db'],
                                            spec.get('m_i', 4)))
    if (sweep_axis is None) != (sweep_values is None):
        raise ConfigError("sweep: give both sweep.axis and sweep.values")
    sweep = SweepSpec(sweep_axis, sweep_values) if sweep_axis else None
    return ScenarioConfig(link=link, interferers=tuple(templates), sweep=sweep, **kw)


def load_config(path):
    with open(path, encoding='utf-8') as fh:
        return parse_config(fh.read())
