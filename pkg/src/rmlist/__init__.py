"""Recursive list decoding of Reed-Muller codes."""
from .code import (CodeParameterError, CodeSpec, FrozenMask, LeafPath, code_params, default_pruning_order,
                   encode, encode_bits, enumerate_paths, extract_info, is_codeword, to_bits, to_symbols)
from .decoder import (DecodeResult, Record, cost_extend, decode_basic, decode_list, decode_list_batch,
                      recalc_u, recalc_u_simplified, recalc_v)
from .perm import AxisPerm, PermSet, build_perm_set, decode_perm, decode_perm_batch, permute_soft
from .sim import (DecoderConfig, SimConfig, WerPoint, clopper_pearson, flop_report, ml_bruteforce, run_point,
                  snr_at_wer, sweep)
from .soft import (ChannelModel, leaf_ml_fullspace, leaf_ml_repetition, posteriors, transmit,
                   word_log_posterior)

__version__ = "0.1.0"

__all__ = [
    "AxisPerm", "ChannelModel", "CodeParameterError", "CodeSpec", "DecodeResult", "DecoderConfig",
    "FrozenMask", "LeafPath", "PermSet", "Record", "SimConfig", "WerPoint", "build_perm_set",
    "clopper_pearson", "code_params", "cost_extend", "decode_basic", "decode_list", "decode_list_batch",
    "decode_perm", "decode_perm_batch", "default_pruning_order", "encode", "encode_bits",
    "enumerate_paths", "extract_info", "flop_report", "is_codeword", "leaf_ml_fullspace",
    "leaf_ml_repetition", "ml_bruteforce", "permute_soft", "posteriors", "recalc_u",
    "recalc_u_simplified", "recalc_v", "run_point", "snr_at_wer", "sweep", "to_bits", "to_symbols",
    "transmit", "word_log_posterior",
]
