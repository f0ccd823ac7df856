"""
Run plumbing: configuration documents, replica-parallel execution and run files.
"""

from .replica_runner import (
    RunPlan,
    plan_from_config,
    prepare_plan,
    run_metadata,
    run_replicas,
    step_halving_check,
    window_doubling_check,
)
from .run_config import (
    SCHEMA_VERSION,
    ConfigError,
    ConfigValidator,
    PhiSpec,
    RunConfig,
    build_phi,
    load_config,
    save_config,
    validate_config,
)
from .run_files import (
    CONFIG_FILE,
    META_FILE,
    PLOTS_DIR,
    REPLICAS_FILE,
    REPORT_FILE,
    RunFileError,
    array_rows,
    read_json,
    read_replicas_csv,
    sample_rows,
    write_json,
    write_plot_csvs,
    write_replicas_csv,
)

__all__ = [
    'CONFIG_FILE',
    'META_FILE',
    'PLOTS_DIR',
    'REPLICAS_FILE',
    'REPORT_FILE',
    'SCHEMA_VERSION',
    'ConfigError',
    'ConfigValidator',
    'PhiSpec',
    'RunConfig',
    'RunFileError',
    'RunPlan',
    'array_rows',
    'build_phi',
    'load_config',
    'plan_from_config',
    'prepare_plan',
    'read_json',
    'read_replicas_csv',
    'run_metadata',
    'run_replicas',
    'sample_rows',
    'save_config',
    'step_halving_check',
    'validate_config',
    'window_doubling_check',
    'write_json',
    'write_plot_csvs',
    'write_replicas_csv',
]
