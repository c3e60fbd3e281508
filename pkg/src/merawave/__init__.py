"""Learned orthogonal two-channel wavelet cascades for traffic compression."""

from .compression import (
    DEFAULT_RHOS,
    FilterBankTransform,
    StackTransform,
    SweepTable,
    compress_window,
    kept_count,
    psnr,
    rd_sweep,
    threshold_compress,
)
from .errors import ConfigError, DataError, MeraWaveError, NumericalError
from .filterbank import (
    FirFilterPair,
    baseline_dwt,
    baseline_idwt,
    daubechies4_filters,
    export_filters,
    filters_from_matrix,
    frequency_response,
    haar_filters,
    qmf_check,
)
from .io import TraceSeries, WindowPlan, read_series, windowize, write_series
from .lrd import HurstEstimate, delta_h, fgn_generate, hurst_av, wavelet_spectrum
from .training import (
    AdamState,
    LossBreakdown,
    TrainingConfig,
    adam_step,
    evaluate_loss,
    loss_gradient,
    polar_project,
    train,
    train_windows,
)
from .transform import (
    HAAR,
    CoefficientPyramid,
    analysis_matrix,
    analyze,
    filter_stack,
    haar_stack,
    layer_analyze,
    layer_synthesize,
    orthogonal_pair,
    synthesize,
)

__version__ = "0.1.0"
