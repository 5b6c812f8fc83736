"""OOD feature metrics and the OODF feature-file format."""

from ._core import (
    FeatureDataset,
    ManifestEntry,
    ModelManifest,
    RuntimeFailure,
    decode_oodf,
    encode_oodf,
    feature_informativeness,
    feature_variation,
    load_dataset,
    load_manifest,
    model_variation,
    num_threads,
    parse_manifest,
    set_num_threads,
    write_dataset,
    write_dataset_csv,
    write_manifest,
)

__all__ = [
    "FeatureDataset",
    "ManifestEntry",
    "ModelManifest",
    "RuntimeFailure",
    "decode_oodf",
    "encode_oodf",
    "feature_informativeness",
    "feature_variation",
    "load_dataset",
    "load_manifest",
    "model_variation",
    "num_threads",
    "parse_manifest",
    "set_num_threads",
    "write_dataset",
    "write_dataset_csv",
    "write_manifest",
]
