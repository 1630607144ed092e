from .config import ConfigError, ScenarioConfig, SweepSpec, load_config, parse_config
from .sweep import ResultRow, emit_csv, read_csv, run_sweep, summarize

__all__ = ['ConfigError', 'ScenarioConfig', 'SweepSpec', 'load_config',
           'parse_config', 'ResultRow', 'emit_csv', 'read_csv', 'run_sweep',
           'summarize']
