"""Evolve-filter reduced order models of incompressible flow.

Thin Python layer over the C++ core: meshes, snapshot files, POD bases,
reduced operators, online runs and the offline/online pipeline.

>>> import romef
>>> cfg = romef.preset_config("ci")
>>> cfg["output_dir"] = "/tmp/romef_ci"
>>> romef.offline(cfg)        # doctest: +SKIP
"""

from ._core import (
    ConfigError,
    FingerprintError,
    FormatError,
    Mesh,
    MeshError,
    NumericalError,
    Patch,
    PodBasis,
    ReducedOperators,
    RomTrajectory,
    SnapshotMatrix,
    StabMode,
    compare,
    compute_basis,
    correlation_matrix,
    generate_cylinder_mesh,
    generate_rectangle_mesh,
    load_mesh,
    load_operators,
    load_snapshots,
    modes_for_energy,
    offline,
    online,
    parse_stab_mode,
    preset_config,
    preset_names,
    reconstruction_error_sq,
    run_rom,
    save_mesh,
    save_operators,
    save_snapshots,
    snapshot_weights,
    summarize,
    validate_config,
)

__version__ = "0.1.0"


def read_csv(path):
    """Rows of one of the pipeline's CSV tables as dicts, numbers as floats."""
    import csv

    def value(s):
        try:
            return float(s)
        except ValueError:
            return s

    with open(path, newline="") as f:
        return [{k: value(v) for k, v in row.items()} for row in csv.DictReader(f)]
