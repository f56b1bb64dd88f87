"""User surface: datasets, experiment configs, journals, comparison runs,
benchmarks, the verification suites and the command-line interface."""

from . import bench, compare, config, datasets, journal, verify  # noqa: F401
