"""Fixed-point integer execution of the addition-based cells."""

from addgate.quant.dump import (
    DumpFormatError,
    dumps_quant_params,
    load_quant_params,
    loads_quant_params,
    save_quant_params,
)
from addgate.quant.fixed import (
    IntGate,
    QuantError,
    QuantOverflowError,
    QuantParams,
    check_scale,
    dequantize,
    dequantize_params,
    int_affine,
    quantize,
    quantize_vector,
    run_handcrafted_int,
    run_handcrafted_int_batch,
    run_int_sequence,
    step_agnu_int,
    step_agru_int,
    to_int64,
)

__all__ = [
    "DumpFormatError",
    "IntGate",
    "QuantError",
    "QuantOverflowError",
    "QuantParams",
    "check_scale",
    "dequantize",
    "dequantize_params",
    "dumps_quant_params",
    "int_affine",
    "load_quant_params",
    "loads_quant_params",
    "quantize",
    "quantize_vector",
    "run_handcrafted_int",
    "run_handcrafted_int_batch",
    "run_int_sequence",
    "save_quant_params",
    "step_agnu_int",
    "step_agru_int",
    "to_int64",
]
