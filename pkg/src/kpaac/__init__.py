"""k-predictive adaptive arithmetic coding and MDL model selection."""

from .errors import BadContainer, CorruptPayload, KpaacError, ModelTooLarge, PGMError, UnsupportedDepth
from .histogram import HistogramGrid, HistogramPartition, crit_histogram, dp_select, sample_laplace
from .imageio import GrayImage, delinearize, linearize, read_pgm, write_pgm
from .mmc import (
    OrderSelectionReport,
    SymbolChain,
    ThetaParam,
    TransitionCounts,
    bic,
    count_transitions,
    ml_codelength,
    ml_estimate,
    random_theta,
    sample_mmc,
    select_order,
)
from .paac import (
    AdaptiveModel,
    CodedBlob,
    adaptive_information,
    codelength,
    decode_fast,
    decode_reference,
    encode_fast,
    encode_reference,
)
from .quantize import (
    Partition,
    barycenter_quantize,
    cell_chain,
    crit_lossless,
    decode_lossless,
    encode_lossless,
    lossless_sweep,
    psnr,
    rate_distortion_sweep,
    regular_partition,
    residual_bits,
)

__version__ = "0.1.0"
