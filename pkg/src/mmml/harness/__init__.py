"""Datasets, evaluation protocol, model files and the command-line interface."""
from .data import DatasetManifest, ingest, read_manifest, read_set_file, write_dataset
from .experiment import ExperimentReport, Hyper, SplitConfig, run_experiment, sweep
from .persistence import load_model, save_model
from .synth import synth_generate

__all__ = [
    "DatasetManifest",
    "ingest",
    "read_manifest",
    "read_set_file",
    "write_dataset",
    "ExperimentReport",
    "Hyper",
    "SplitConfig",
    "run_experiment",
    "sweep",
    "load_model",
    "save_model",
    "synth_generate",
]
