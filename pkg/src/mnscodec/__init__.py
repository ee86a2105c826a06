"""Grayscale fractal image codec.

No-search and modified no-search (MNS) quadtree encoders with fixed
co-centered domains, a bit-exact .mns stream format with level-id sharing,
an iterative contractive decoder, exhaustive/local search baselines, and a
rate-distortion benchmark harness.
"""

from .bench import OffsetHistogram, RdPoint, histogram_csv, offset_histogram, rd_csv, rd_sweep
from .bitstream import (
    StreamFormatError,
    leaf_bit_width,
    level_id_bit_count,
    payload_bit_width,
    read_stream,
    stream_bit_count,
    write_stream,
)
from .decoder import DecodeConfig, decode, decode_step
from .encoder import (
    CONTRAST_SETS,
    BaselinePayload,
    EncoderConfig,
    LeafRecord,
    Phase1Payload,
    Phase2Payload,
    QuadtreeCode,
    encode_full_search,
    encode_local_search,
    encode_quadtree,
    try_phase1,
    try_phase2,
)
from .image import (
    BlockRect,
    GrayImage,
    PgmFormatError,
    block_mean,
    co_domain_rect,
    downsample_mean2,
    load_pgm,
    pad_to_multiple,
    save_pgm,
)
from .metrics import mse, psnr
from .transform import (
    AffineParams,
    apply_map,
    dequantize_contrast,
    fit_affine,
    quantize_contrast,
    rms_error,
)

__version__ = "0.1.0"
