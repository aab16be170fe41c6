"""Cross-modal spatio-temporal fusion block over a three-frame token grid.

Pipeline, all sublayers pre-normalized with residual connections:

1. stack [frame t-2, frame t-1, frame t] feature grids and flatten them
   frame-major, row-major within each frame (causal scan order);
2. text-to-vision cross-attention injects language tokens into the
   vision tokens;
3. mixing: a per-frame depthwise 7x7 convolution branch plus a selective
   scan over the full flattened token sequence, summed into the residual
   stream;
4. inverted-bottleneck MLP;
5. vision-to-text cross-attention pools the vision tokens back into the
   text tokens; the fused CLS vector is read at ``cls_index``.

The fused grid is the current frame's slice of the processed tokens.
Missing history slots at stream start are filled with the current
frame's features so the three-frame contract always holds.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .attention import AttentionParams, attention_forward, init_attention_params
from .conv import DWConvParams, dwconv_forward, init_dwconv_params
from .mlp import MlpParams, init_mlp_params, mlp_forward
from .norm import LayerNormParams, init_layernorm_params, layernorm_forward
from .scan import ScanParams, init_scan_params, scan_forward

N_FRAMES = 3


@dataclass(frozen=True)
class TextTokens:
    """Language token matrix with the position of the CLS summary token."""

    tokens: np.ndarray  # (n_tokens, C)
    cls_index: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens",
                           np.asarray(self.tokens, dtype=np.float64))
        if self.tokens.ndim != 2 or self.tokens.shape[0] < 1:
            raise ValueError("tokens must be a non-empty (n, C) matrix")
        if not (0 <= self.cls_index < self.tokens.shape[0]):
            raise ValueError(f"cls_index {self.cls_index} out of range")


class FeatureWindow:
    """The two most recent encoder feature grids, tagged by frame index."""

    CAPACITY = 2

    def __init__(self) -> None:
        self.slots: list[tuple[int, np.ndarray]] = []

    def update(self, grid: np.ndarray, frame: int) -> None:
        if self.slots and frame <= self.slots[-1][0]:
            raise ValueError(f"frame {frame} not after {self.slots[-1][0]}")
        self.slots.append((frame, np.asarray(grid, dtype=np.float64)))
        if len(self.slots) > self.CAPACITY:
            self.slots.pop(0)

    def stack(self, current: np.ndarray) -> list[np.ndarray]:
        """Oldest-first grids for [t-2, t-1, t]; missing slots duplicate t."""
        grids = [g for _, g in self.slots]
        while len(grids) < self.CAPACITY:
            grids.insert(0, current)
        return [*grids, current]


@dataclass
class BlockParams:
    scan: ScanParams
    conv: DWConvParams
    mlp: MlpParams
    t2v: AttentionParams
    v2t: AttentionParams
    norm_t2v: LayerNormParams
    norm_mix: LayerNormParams
    norm_mlp: LayerNormParams
    norm_v2t: LayerNormParams

    @property
    def channels(self) -> int:
        return self.scan.a_log.shape[0]

    def named_arrays(self) -> dict[str, np.ndarray]:
        """Flat 'group.field' -> array view, in deterministic order."""
        out: dict[str, np.ndarray] = {}
        for group_field in fields(self):
            group = getattr(self, group_field.name)
            for leaf in fields(group):
                value = getattr(group, leaf.name)
                if isinstance(value, np.ndarray):
                    out[f"{group_field.name}.{leaf.name}"] = value
        return out


def init_block_params(channels: int, state_dim: int = 4, n_heads: int = 1,
                      kernel_size: int = 7, seed: int = 0) -> BlockParams:
    rng = np.random.default_rng(seed)
    return BlockParams(
        scan=init_scan_params(channels, state_dim, rng),
        conv=init_dwconv_params(channels, rng, kernel_size=kernel_size),
        mlp=init_mlp_params(channels, rng),
        t2v=init_attention_params(channels, channels, channels, rng,
                                  n_heads=n_heads),
        v2t=init_attention_params(channels, channels, channels, rng,
                                  n_heads=n_heads),
        norm_t2v=init_layernorm_params(channels),
        norm_mix=init_layernorm_params(channels),
        norm_mlp=init_layernorm_params(channels),
        norm_v2t=init_layernorm_params(channels),
    )


def block_forward(current: np.ndarray, window: FeatureWindow,
                  text: TextTokens,
                  params: BlockParams) -> tuple[np.ndarray, np.ndarray]:
    """Fuse one frame: returns (fused grid H x W x C, fused CLS vector C)."""
    current = np.asarray(current, dtype=np.float64)
    if current.ndim != 3:
        raise ValueError(f"expected (H, W, C) features, got {current.shape}")
    height, width, channels = current.shape
    if channels != params.channels:
        raise ValueError(f"features have {channels} channels, params expect "
                         f"{params.channels}")
    if text.tokens.shape[1] != channels:
        raise ValueError("text token width must match feature channels")

    grids = window.stack(current)
    for g in grids:
        if g.shape != current.shape:
            raise ValueError("history grids must match the current frame shape")
    tokens_per_frame = height * width
    vis = np.concatenate([g.reshape(tokens_per_frame, channels) for g in grids])

    normed, _ = layernorm_forward(vis, params.norm_t2v)
    attn_out, _ = attention_forward(normed, text.tokens, params.t2v)
    vis = vis + attn_out

    mixed_in, _ = layernorm_forward(vis, params.norm_mix)
    conv_out = np.empty_like(mixed_in)
    for f in range(N_FRAMES):
        sl = slice(f * tokens_per_frame, (f + 1) * tokens_per_frame)
        frame_grid = mixed_in[sl].reshape(height, width, channels)
        out, _ = dwconv_forward(frame_grid, params.conv)
        conv_out[sl] = out.reshape(tokens_per_frame, channels)
    scan_out, _ = scan_forward(mixed_in, params.scan)
    vis = vis + conv_out + scan_out

    mlp_in, _ = layernorm_forward(vis, params.norm_mlp)
    mlp_out, _ = mlp_forward(mlp_in, params.mlp)
    vis = vis + mlp_out

    text_normed, _ = layernorm_forward(text.tokens, params.norm_v2t)
    pooled, _ = attention_forward(text_normed, vis, params.v2t)
    fused_text = text.tokens + pooled

    fused_grid = vis[(N_FRAMES - 1) * tokens_per_frame:].reshape(
        height, width, channels)
    return fused_grid, fused_text[text.cls_index]
