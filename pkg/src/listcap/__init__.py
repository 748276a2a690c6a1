"""Capacity theory toolkit for classical and classical-quantum list decoding."""

from .capacity import CapacityResult, arimoto_blahut, capacity_bounds
from .codes import (
    BoundReport,
    ClassicalListDecoder,
    CodeMetrics,
    Encoder,
    ListCode,
    QuantumListDecoder,
    RSTSummary,
    build_rst,
    error_probability,
    hypothesis_test_terms,
    lift_code,
    make_list_decoder_ml,
    ml_code,
    square_root_measurement,
    verify_converse_bound,
)
from .core import (
    Channel,
    DensityMatrix,
    ProbDist,
    iid_extend,
    j_functional,
    mutual_information,
    output_average,
    relative_entropy,
    validate_channel,
)
from .renyi import (
    ExponentQuery,
    ExponentResult,
    log_phi,
    phi,
    phi_channel,
    phi_slope_check,
    sc_exponent,
)
from .simulate import derandomize, mc_error_probability, random_code

__version__ = "0.1.0"
