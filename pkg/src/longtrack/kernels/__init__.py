"""From-scratch numeric kernels with analytic backward passes."""

from .attention import (AttentionParams, attention_backward, attention_forward,
                        attention_weights, cross_attention,
                        init_attention_params)
from .backend import NeuralToyBackend
from .block import (BlockParams, FeatureWindow, TextTokens, block_forward,
                    init_block_params)
from .conv import (DWConvParams, dwconv7x7, dwconv_backward, dwconv_forward,
                   init_dwconv_params)
from .gradcheck import OP_NAMES, grad_check, max_relative_error
from .mlp import (MlpParams, init_mlp_params, inverted_mlp, mlp_backward,
                  mlp_forward)
from .norm import (LayerNormParams, init_layernorm_params, layernorm,
                   layernorm_backward, layernorm_forward)
from .scan import (ScanParams, init_scan_params, scan_backward, scan_forward,
                   selective_scan)
from .serial import (dump_arrays, load_arrays, load_params_file,
                     save_params_file)

__all__ = [
    "AttentionParams", "attention_backward", "attention_forward",
    "attention_weights", "cross_attention", "init_attention_params",
    "NeuralToyBackend",
    "BlockParams", "FeatureWindow", "TextTokens", "block_forward",
    "init_block_params",
    "DWConvParams", "dwconv7x7", "dwconv_backward", "dwconv_forward",
    "init_dwconv_params",
    "OP_NAMES", "grad_check", "max_relative_error",
    "MlpParams", "init_mlp_params", "inverted_mlp", "mlp_backward",
    "mlp_forward",
    "LayerNormParams", "init_layernorm_params", "layernorm",
    "layernorm_backward", "layernorm_forward",
    "ScanParams", "init_scan_params", "scan_backward", "scan_forward",
    "selective_scan",
    "dump_arrays", "load_arrays", "load_params_file", "save_params_file",
]
