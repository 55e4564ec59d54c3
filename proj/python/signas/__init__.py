"""Hardware-aware architecture search for ResNet+LSTM bio-signal classifiers."""

from ._signas import (
    ArchParams,
    DomainError,
    FormatError,
    NetConfig,
    __version__,
    build,
    compress,
    decode,
    decode_212,
    decompress,
    encode,
    encode_212,
    enumerate_space,
    filter_schedule,
    format_failure,
    format_response,
    nondominated_sort,
    parse_annotations,
    parse_arch,
    parse_request,
    prune,
    quality_report,
    read_dataset,
    roc_curve,
    run_cli,
    search,
    surrogate_quality,
    weight_shapes,
)

__all__ = [
    "ArchParams",
    "DomainError",
    "FormatError",
    "NetConfig",
    "__version__",
    "build",
    "compress",
    "decode",
    "decode_212",
    "decompress",
    "encode",
    "encode_212",
    "enumerate_space",
    "filter_schedule",
    "format_failure",
    "format_response",
    "nondominated_sort",
    "parse_annotations",
    "parse_arch",
    "parse_request",
    "prune",
    "quality_report",
    "read_dataset",
    "roc_curve",
    "run_cli",
    "search",
    "surrogate_quality",
    "weight_shapes",
]
