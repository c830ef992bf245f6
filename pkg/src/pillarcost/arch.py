"""Builders for the PointPillars graph and its backbone replacements.

The network has four stages: a pillar feature encoder (``pfn``), a strided
``backbone``, an upsampling ``neck`` and a detection ``head``.  Swapping the
backbone type replaces each 3x3 Conv-BN-ReLU of the original with the chosen
family's basic unit while keeping the block plan (channel widths, unit
counts, strides) and every other stage fixed.

Per-family hyperparameters that the published tables do not pin down
(bottleneck widths, group counts, expansion ratios) are config knobs whose
defaults were tuned to reproduce the measured MAdd/parameter counts.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path

from .graph import (
    Add, BatchNorm, ChannelShuffle, ChannelSplit, Concat, Conv, Graph, Input,
    MaxPool, ReLU, Scatter, TensorShape, TransposedConv,
)


class ArchError(Exception):
    """Invalid architecture configuration."""


class ChannelConstraintError(ArchError):
    """Channel counts violate a divisibility requirement of the unit."""


class UnsupportedStrideError(ArchError):
    """Unit asked for a stride other than 1 or 2."""


class Variant(str, Enum):
    BASE = "base"
    SQUEEZENEXT = "SqueezeNext"
    RESNET = "ResNet"
    RESNEXT = "ResNeXt"
    MOBILENET_V1 = "MobilenetV1"
    MOBILENET_V2 = "MobilenetV2"
    SHUFFLENET_V1 = "ShufflenetV1"
    SHUFFLENET_V2 = "ShufflenetV2"
    DARKNET = "Darknet"
    CSPDARKNET = "CSPDarknet"
    XCEPTION = "Xception"

    @classmethod
    def parse(cls, text: str) -> "Variant":
        for variant in cls:
            if variant.value.lower() == text.lower():
                return variant
        raise ArchError(f"unknown variant {text!r}; choose from "
                        + ", ".join(v.value for v in cls))


@dataclass(frozen=True)
class ArchConfig:
    """Structural parameters of the network; defaults follow the reference
    KITTI configuration (pseudo-image 64x496x432, three blocks)."""

    pseudo_image_channels: int = 64
    pseudo_image_height: int = 496
    pseudo_image_width: int = 432
    max_pillars: int = 16000
    points_per_pillar: int = 32
    pfn_in_features: int = 10
    block_channels: tuple[int, ...] = (64, 128, 256)
    block_units: tuple[int, ...] = (4, 6, 6)
    block_strides: tuple[int, ...] = (2, 2, 2)
    neck_out_channels: tuple[int, ...] = (128, 128, 128)
    neck_upsample: tuple[int, ...] = (1, 2, 4)
    num_classes: int = 3
    anchors_per_location: int = 6
    box_code_size: int = 7
    dir_bins: int = 2
    # per-family reconstruction knobs
    mobilenet_v2_expand: int = 1
    shufflenet_v1_groups: int = 2
    squeezenext_reduce: Fraction = Fraction(1, 2)
    resnet_bottleneck: Fraction = Fraction(3, 8)
    resnext_width: Fraction = Fraction(1, 1)
    resnext_groups: int = 32

    def __post_init__(self) -> None:
        lengths = {len(self.block_channels), len(self.block_units),
                   len(self.block_strides)}
        if len(lengths) != 1:
            raise ArchError("block_channels/block_units/block_strides lengths differ")
        if len(self.neck_out_channels) != len(self.neck_upsample) or \
                len(self.neck_out_channels) != len(self.block_channels):
            raise ArchError("neck lists must match the number of blocks")
        counts = (self.pseudo_image_channels, self.pseudo_image_height,
                  self.pseudo_image_width, self.max_pillars,
                  self.points_per_pillar, self.pfn_in_features,
                  self.num_classes, self.anchors_per_location,
                  self.box_code_size, self.dir_bins,
                  *self.block_channels, *self.block_units, *self.block_strides,
                  *self.neck_out_channels, *self.neck_upsample)
        if any(c < 1 for c in counts):
            raise ArchError("all counts must be positive")

    @property
    def pseudo_image(self) -> TensorShape:
        return TensorShape(self.pseudo_image_channels,
                           self.pseudo_image_height, self.pseudo_image_width)

    # -- loading and overrides ---------------------------------------------

    _FRACTION_FIELDS = ("squeezenext_reduce", "resnet_bottleneck", "resnext_width")
    _TUPLE_FIELDS = ("block_channels", "block_units", "block_strides",
                     "neck_out_channels", "neck_upsample")

    @classmethod
    def _coerce(cls, key: str, value):
        if key in cls._FRACTION_FIELDS:
            return Fraction(value) if not isinstance(value, Fraction) else value
        if key in cls._TUPLE_FIELDS:
            return tuple(int(v) for v in value)
        return value

    @classmethod
    def from_dict(cls, doc: dict) -> "ArchConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ArchError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: cls._coerce(k, v) for k, v in doc.items()})

    @classmethod
    def from_file(cls, path: str | Path) -> "ArchConfig":
        """Read a JSON document or a flat ``key = value`` file."""
        text = Path(path).read_text()
        stripped = text.lstrip()
        if stripped.startswith("{"):
            return cls.from_dict(json.loads(text))
        doc: dict = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ArchError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            doc[key] = _parse_value(raw)
        return cls.from_dict(doc)

    def with_overrides(self, overrides: list[str]) -> "ArchConfig":
        """Apply repeated ``--set key=value`` strings."""
        doc: dict = {}
        for item in overrides:
            if "=" not in item:
                raise ArchError(f"override {item!r} is not of the form key=value")
            key, raw = (part.strip() for part in item.split("=", 1))
            doc[key] = self._coerce(key, _parse_value(raw))
        known = {f.name for f in fields(self)}
        unknown = set(doc) - known
        if unknown:
            raise ArchError(f"unknown config keys: {sorted(unknown)}")
        return replace(self, **doc)


def _parse_value(raw: str):
    raw = raw.strip()
    if "/" in raw and "[" not in raw:
        try:
            return Fraction(raw)
        except ValueError:
            pass
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        return raw
    return value


# --------------------------------------------------------------------------
# Small builder helpers
# --------------------------------------------------------------------------

def _conv(g: Graph, src: int, name: str, in_ch: int, out_ch: int,
          kernel=(1, 1), stride=(1, 1), pad=(0, 0), groups: int = 1,
          bias: bool = False) -> int:
    if in_ch % groups or out_ch % groups:
        raise ChannelConstraintError(
            f"{name}: channels {in_ch}->{out_ch} not divisible by groups={groups}")
    spec = Conv(out_ch, kernel[0], kernel[1], stride[0], stride[1],
                pad[0], pad[1], groups, bias)
    return g.add_node(spec, [(src, 0)], name)


def _bn_relu(g: Graph, src: int, prefix: str, relu: bool = True) -> int:
    node = g.add_node(BatchNorm(), [(src, 0)], f"{prefix}.bn")
    if relu:
        node = g.add_node(ReLU(), [(node, 0)], f"{prefix}.relu")
    return node


def _cbr(g: Graph, src: int, name: str, in_ch: int, out_ch: int,
         kernel=(3, 3), stride=(1, 1), pad=(1, 1), groups: int = 1,
         relu: bool = True) -> int:
    node = _conv(g, src, f"{name}.conv", in_ch, out_ch, kernel, stride, pad, groups)
    return _bn_relu(g, node, name, relu)


def _dw(g: Graph, src: int, name: str, channels: int, stride: int) -> int:
    return _conv(g, src, name, channels, channels, (3, 3), (stride, stride),
                 (1, 1), groups=channels)


def _check_stride(stride: int, name: str) -> None:
    if stride not in (1, 2):
        raise UnsupportedStrideError(f"{name}: stride must be 1 or 2, got {stride}")


def _frac_channels(total: int, ratio: Fraction, name: str) -> int:
    value = Fraction(total) * ratio
    if value.denominator != 1 or value < 1:
        raise ChannelConstraintError(
            f"{name}: ratio {ratio} of {total} channels is not a positive integer")
    return int(value)


# --------------------------------------------------------------------------
# Basic units
# --------------------------------------------------------------------------

def _unit_base(g, src, in_ch, out_ch, stride, name, cfg) -> int:
    return _cbr(g, src, name, in_ch, out_ch, stride=(stride, stride))


def _unit_squeezenext(g, src, in_ch, out_ch, stride, name, cfg) -> int:
    hidden = _frac_channels(in_ch, cfg.squeezenext_reduce, name)
    node = _cbr(g, src, f"{name}.reduce", in_ch, hidden, (1, 1),
                (stride, stride), (0, 0))
    node = _cbr(g, node, f"{name}.conv1x3", hidden, hidden, (1, 3), pad=(0, 1))
    node = _cbr(g, node, f"{name}.conv3x1", hidden, hidden, (3, 1), pad=(1, 0))
    node = _cbr(g, node, f"{name}.expand", hidden, out_ch, (1, 1), pad=(0, 0))
    skip = src
    if stride != 1 or in_ch != out_ch:
        skip = _conv(g, src, f"{name}.proj.conv", in_ch, out_ch, (1, 1),
                     (stride, stride))
        skip = g.add_node(BatchNorm(), [(skip, 0)], f"{name}.proj.bn")
    node = g.add_node(Add(), [(skip, 0), (node, 0)], f"{name}.add")
    return g.add_node(ReLU(), [(node, 0)], f"{name}.out_relu")


def _unit_bottleneck(g, src, in_ch, out_ch, stride, name, cfg,
                     width: Fraction, groups: int) -> int:
    hidden = _frac_channels(out_ch, width, name)
    if hidden % groups:
        raise ChannelConstraintError(
            f"{name}: bottleneck width {hidden} not divisible by groups={groups}")
    node = _cbr(g, src, f"{name}.reduce", in_ch, hidden, (1, 1),
                (stride, stride), (0, 0))
    node = _cbr(g, node, f"{name}.conv3x3", hidden, hidden, groups=groups)
    node = _cbr(g, node, f"{name}.expand", hidden, out_ch, (1, 1),
                pad=(0, 0), relu=False)
    skip = src
    if stride != 1 or in_ch != out_ch:
        skip = _conv(g, src, f"{name}.proj.conv", in_ch, out_ch, (1, 1),
                     (stride, stride))
        skip = g.add_node(BatchNorm(), [(skip, 0)], f"{name}.proj.bn")
    node = g.add_node(Add(), [(skip, 0), (node, 0)], f"{name}.add")
    return g.add_node(ReLU(), [(node, 0)], f"{name}.out_relu")


def _unit_resnet(g, src, in_ch, out_ch, stride, name, cfg) -> int:
    return _unit_bottleneck(g, src, in_ch, out_ch, stride, name, cfg,
                            cfg.resnet_bottleneck, 1)


def _unit_resnext(g, src, in_ch, out_ch, stride, name, cfg) -> int:
    return _unit_bottleneck(g, src, in_ch, out_ch, stride, name, cfg,
                            cfg.resnext_width, cfg.resnext_groups)


def _unit_mobilenet_v1(g, src, in_ch, out_ch, stride, name, cfg) -> int:
    node = _dw(g, src, f"{name}.dw.conv", in_ch, stride)
    node = _bn_relu(g, node, f"{name}.dw")
    node = _conv(g, node, f"{name}.pw.conv", in_ch, out_ch)
    return _bn_relu(g, node, f"{name}.pw")


def _unit_mobilenet_v2(g, src, in_ch, out_ch, stride, name, cfg) -> int:
    t = cfg.mobilenet_v2_expand
    hidden = in_ch * t
    node = src
    if t > 1:  # expansion layer is skipped at ratio 1, as in the original family
        node = _cbr(g, node, f"{name}.expand", in_ch, hidden, (1, 1), pad=(0, 0))
    node = _dw(g, node, f"{name}.dw.conv", hidden, stride)
    node = _bn_relu(g, node, f"{name}.dw")
    node = _conv(g, node, f"{name}.project.conv", hidden, out_ch)
    node = g.add_node(BatchNorm(), [(node, 0)], f"{name}.project.bn")
    if stride == 1 and in_ch == out_ch:
        node = g.add_node(Add(), [(src, 0), (node, 0)], f"{name}.add")
    return node


def _shuffle_branch(g, src, name, in_ch, out_ch, stride, groups) -> int:
    node = _cbr(g, src, f"{name}.gconv1", in_ch, out_ch, (1, 1), pad=(0, 0),
                groups=groups)
    node = g.add_node(ChannelShuffle(groups), [(node, 0)], f"{name}.shuffle")
    node = _dw(g, node, f"{name}.dw.conv", out_ch, stride)
    node = g.add_node(BatchNorm(), [(node, 0)], f"{name}.dw.bn")
    node = _conv(g, node, f"{name}.gconv2.conv", out_ch, out_ch, groups=groups)
    return g.add_node(BatchNorm(), [(node, 0)], f"{name}.gconv2.bn")


def _unit_shufflenet_v1(g, src, in_ch, out_ch, stride, name, cfg) -> int:
    groups = cfg.shufflenet_v1_groups
    if stride == 1:
        if in_ch != out_ch:
            raise ChannelConstraintError(
                f"{name}: stride-1 shuffle unit needs in == out channels")
        branch = _shuffle_branch(g, src, name, in_ch, out_ch, 1, groups)
        node = g.add_node(Add(), [(src, 0), (branch, 0)], f"{name}.add")
        return g.add_node(ReLU(), [(node, 0)], f"{name}.out_relu")
    if out_ch > in_ch:
        # downsampling unit: pooled identity concatenated with the branch
        branch = _shuffle_branch(g, src, name, in_ch, out_ch - in_ch, 2, groups)
        skip = g.add_node(MaxPool(3, 3, 2, 2, 1, 1), [(src, 0)], f"{name}.pool")
        node = g.add_node(Concat(), [(skip, 0), (branch, 0)], f"{name}.concat")
    else:
        branch = _shuffle_branch(g, src, name, in_ch, out_ch, 2, groups)
        skip = _conv(g, src, f"{name}.proj.conv", in_ch, out_ch, (1, 1), (2, 2))
        skip = g.add_node(BatchNorm(), [(skip, 0)], f"{name}.proj.bn")
        node = g.add_node(Add(), [(skip, 0), (branch, 0)], f"{name}.add")
    return g.add_node(ReLU(), [(node, 0)], f"{name}.out_relu")


# ChannelSplit is multi-output, so the ShufflenetV2 unit wires its first
# convolution to an explicit (node, port) pair.
def _conv_from(g: Graph, src: tuple[int, int], name: str, in_ch: int,
               out_ch: int, kernel=(1, 1), stride=(1, 1), pad=(0, 0),
               groups: int = 1) -> int:
    if in_ch % groups or out_ch % groups:
        raise ChannelConstraintError(
            f"{name}: channels {in_ch}->{out_ch} not divisible by groups={groups}")
    spec = Conv(out_ch, kernel[0], kernel[1], stride[0], stride[1],
                pad[0], pad[1], groups, False)
    return g.add_node(spec, [src], name)


def _shufflenet_v2_unit(g, src, in_ch, out_ch, stride, name, cfg) -> int:
    if stride == 1:
        if in_ch != out_ch or in_ch % 2:
            raise ChannelConstraintError(
                f"{name}: stride-1 unit needs even, equal in/out channels")
        c = in_ch // 2
        split = g.add_node(ChannelSplit((Fraction(1, 2), Fraction(1, 2))),
                           [(src, 0)], f"{name}.split")
        node = _conv_from(g, (split, 1), f"{name}.pw1.conv", c, c)
        node = _bn_relu(g, node, f"{name}.pw1")
        node = _dw(g, node, f"{name}.dw.conv", c, 1)
        node = g.add_node(BatchNorm(), [(node, 0)], f"{name}.dw.bn")
        node = _conv(g, node, f"{name}.pw2.conv", c, c)
        node = _bn_relu(g, node, f"{name}.pw2")
        node = g.add_node(Concat(), [(split, 0), (node, 0)], f"{name}.concat")
        return g.add_node(ChannelShuffle(2), [(node, 0)], f"{name}.shuffle")

    if out_ch % 2:
        raise ChannelConstraintError(f"{name}: output channels must be even")
    branch = out_ch // 2
    left = _dw(g, src, f"{name}.left.dw.conv", in_ch, 2)
    left = g.add_node(BatchNorm(), [(left, 0)], f"{name}.left.dw.bn")
    left = _conv(g, left, f"{name}.left.pw.conv", in_ch, branch)
    left = _bn_relu(g, left, f"{name}.left.pw")
    right = _cbr(g, src, f"{name}.right.pw1", in_ch, branch, (1, 1), pad=(0, 0))
    right = _dw(g, right, f"{name}.right.dw.conv", branch, 2)
    right = g.add_node(BatchNorm(), [(right, 0)], f"{name}.right.dw.bn")
    right = _conv(g, right, f"{name}.right.pw2.conv", branch, branch)
    right = _bn_relu(g, right, f"{name}.right.pw2")
    node = g.add_node(Concat(), [(left, 0), (right, 0)], f"{name}.concat")
    return g.add_node(ChannelShuffle(2), [(node, 0)], f"{name}.shuffle")


def _darknet_unit(g, src, channels, hidden, name) -> int:
    node = _cbr(g, src, f"{name}.reduce", channels, hidden, (1, 1), pad=(0, 0))
    node = _cbr(g, node, f"{name}.conv3x3", hidden, channels)
    return g.add_node(Add(), [(src, 0), (node, 0)], f"{name}.add")


def _unit_darknet(g, src, in_ch, out_ch, stride, name, cfg) -> int:
    if stride != 1:
        # downsampling is a plain strided 3x3 entry convolution in this family
        return _cbr(g, src, name, in_ch, out_ch, stride=(stride, stride))
    if in_ch != out_ch:
        raise ChannelConstraintError(f"{name}: residual unit needs in == out")
    return _darknet_unit(g, src, out_ch, out_ch // 2, name)


def _sepconv(g, src, name, in_ch, out_ch, relu: bool = True) -> int:
    node = _dw(g, src, f"{name}.dw", in_ch, 1)
    node = _conv(g, node, f"{name}.pw", in_ch, out_ch)
    return _bn_relu(g, node, name, relu)


def _unit_xception(g, src, in_ch, out_ch, stride, name, cfg) -> int:
    """Xception block: two separable convs with a skip; the stride-2 form
    pools between them and projects the skip with a strided 1x1."""
    if stride == 1:
        if in_ch != out_ch:
            raise ChannelConstraintError(f"{name}: stride-1 block needs in == out")
        node = _sepconv(g, src, f"{name}.sep1", in_ch, out_ch)
        node = _sepconv(g, node, f"{name}.sep2", out_ch, out_ch)
        return g.add_node(Add(), [(src, 0), (node, 0)], f"{name}.add")
    node = _sepconv(g, src, f"{name}.sep1", in_ch, out_ch)
    node = g.add_node(MaxPool(3, 3, 2, 2, 1, 1), [(node, 0)], f"{name}.pool")
    node = _sepconv(g, node, f"{name}.sep2", out_ch, out_ch)
    skip = _conv(g, src, f"{name}.proj.conv", in_ch, out_ch, (1, 1), (2, 2))
    skip = g.add_node(BatchNorm(), [(skip, 0)], f"{name}.proj.bn")
    return g.add_node(Add(), [(skip, 0), (node, 0)], f"{name}.add")


_UNIT_BUILDERS = {
    Variant.BASE: _unit_base,
    Variant.SQUEEZENEXT: _unit_squeezenext,
    Variant.RESNET: _unit_resnet,
    Variant.RESNEXT: _unit_resnext,
    Variant.MOBILENET_V1: _unit_mobilenet_v1,
    Variant.MOBILENET_V2: _unit_mobilenet_v2,
    Variant.SHUFFLENET_V1: _unit_shufflenet_v1,
    Variant.SHUFFLENET_V2: _shufflenet_v2_unit,
    Variant.DARKNET: _unit_darknet,
    Variant.CSPDARKNET: _darknet_unit,  # dispatched specially in blocks
    Variant.XCEPTION: _unit_xception,
}


def basic_unit(variant: Variant, graph: Graph, input_id: int, in_channels: int,
               out_channels: int, stride: int, name_prefix: str,
               cfg: ArchConfig | None = None) -> int:
    """Append one basic unit of the given family; returns its output node."""
    cfg = cfg or ArchConfig()
    _check_stride(stride, name_prefix)
    if variant is Variant.CSPDARKNET:
        return _unit_darknet(graph, input_id, in_channels, out_channels,
                             stride, name_prefix, cfg)
    return _UNIT_BUILDERS[variant](graph, input_id, in_channels, out_channels,
                                   stride, name_prefix, cfg)


# --------------------------------------------------------------------------
# Blocks and full network
# --------------------------------------------------------------------------

def _build_block(variant, g, src, in_ch, out_ch, units, stride, prefix, cfg,
                 first_block: bool) -> int:
    if variant is Variant.DARKNET:
        node = _cbr(g, src, f"{prefix}.entry", in_ch, out_ch,
                    stride=(stride, stride))
        for i in range(units - 1):
            node = _darknet_unit(g, node, out_ch, out_ch // 2,
                                 f"{prefix}.unit{i + 1}")
        return node

    if variant is Variant.CSPDARKNET:
        # cross-stage partial wrapper: the first block keeps the lane at full
        # width (as the original CSP backbone does), later blocks halve it
        node = _cbr(g, src, f"{prefix}.entry", in_ch, out_ch,
                    stride=(stride, stride))
        lane_ch = out_ch if first_block else out_ch // 2
        hidden = out_ch // 2
        skip = _cbr(g, node, f"{prefix}.route_skip", out_ch, lane_ch, (1, 1),
                    pad=(0, 0))
        lane = _cbr(g, node, f"{prefix}.route_lane", out_ch, lane_ch, (1, 1),
                    pad=(0, 0))
        for i in range(units - 1):
            lane = _darknet_unit(g, lane, lane_ch, hidden,
                                 f"{prefix}.unit{i + 1}")
        lane = _cbr(g, lane, f"{prefix}.post", lane_ch, lane_ch, (1, 1),
                    pad=(0, 0))
        node = g.add_node(Concat(), [(skip, 0), (lane, 0)], f"{prefix}.concat")
        return _cbr(g, node, f"{prefix}.final", 2 * lane_ch, out_ch, (1, 1),
                    pad=(0, 0))

    if variant is Variant.XCEPTION:
        # each block covers two of the original conv units
        node = src
        cur = in_ch
        remaining = units
        index = 0
        cur_stride = stride
        while remaining > 0:
            index += 1
            take = min(2, remaining)
            name = f"{prefix}.block{index}"
            if take == 1:  # odd unit count: trailing single separable conv
                sep = _sepconv(g, node, f"{name}.sep1", cur, out_ch)
                if cur_stride == 1 and cur == out_ch:
                    node = g.add_node(Add(), [(node, 0), (sep, 0)], f"{name}.add")
                else:
                    skip = _conv(g, node, f"{name}.proj.conv", cur, out_ch,
                                 (1, 1), (cur_stride, cur_stride))
                    skip = g.add_node(BatchNorm(), [(skip, 0)], f"{name}.proj.bn")
                    node = g.add_node(Add(), [(skip, 0), (sep, 0)], f"{name}.add")
            else:
                node = _unit_xception(g, node, cur, out_ch, cur_stride, name, cfg)
            cur = out_ch
            cur_stride = 1
            remaining -= take
        return node

    node = src
    cur = in_ch
    for i in range(units):
        unit_stride = stride if i == 0 else 1
        node = _UNIT_BUILDERS[variant](g, node, cur, out_ch, unit_stride,
                                       f"{prefix}.unit{i + 1}", cfg)
        cur = out_ch
    return node


def build_backbone(variant: Variant, cfg: ArchConfig | None = None,
                   graph: Graph | None = None, input_id: int | None = None,
                   ) -> tuple[Graph, list[int]]:
    """Build the strided backbone; returns the graph and per-block outputs.

    When no graph is given, a fresh one is created with the pseudo-image as
    its input node.
    """
    cfg = cfg or ArchConfig()
    if graph is None:
        graph = Graph()
        input_id = graph.add_node(Input(cfg.pseudo_image), name="backbone.input")
    assert input_id is not None
    node = input_id
    in_ch = cfg.pseudo_image_channels
    outputs: list[int] = []
    for i, (out_ch, units, stride) in enumerate(
            zip(cfg.block_channels, cfg.block_units, cfg.block_strides)):
        node = _build_block(variant, graph, node, in_ch, out_ch, units, stride,
                            f"backbone.block{i + 1}", cfg, first_block=(i == 0))
        outputs.append(node)
        in_ch = out_ch
    return graph, outputs


def build_pointpillars(variant: Variant, cfg: ArchConfig | None = None) -> Graph:
    """Full network graph: pfn -> scatter -> backbone -> neck -> head."""
    cfg = cfg or ArchConfig()
    g = Graph()

    # pillar feature encoder: a linear layer over (features x pillars x points)
    # modeled as a 1x1 conv, then a max-reduction over the points axis
    pfn_in = g.add_node(
        Input(TensorShape(cfg.pfn_in_features, cfg.max_pillars,
                          cfg.points_per_pillar)),
        name="pfn.input")
    node = _cbr(g, pfn_in, "pfn.linear", cfg.pfn_in_features,
                cfg.pseudo_image_channels, (1, 1), pad=(0, 0))
    node = g.add_node(MaxPool(1, cfg.points_per_pillar, 1, cfg.points_per_pillar),
                      [(node, 0)], "pfn.maxpool")
    node = g.add_node(Scatter(cfg.pseudo_image_height, cfg.pseudo_image_width),
                      [(node, 0)], "pfn.scatter")

    _, block_outputs = build_backbone(variant, cfg, g, node)

    # neck: one transposed conv per block output, then channel concat
    branches: list[int] = []
    for i, (src, out_ch, up) in enumerate(
            zip(block_outputs, cfg.neck_out_channels, cfg.neck_upsample)):
        in_ch = cfg.block_channels[i]
        name = f"neck.branch{i + 1}"
        branch = g.add_node(
            TransposedConv(out_ch, up, up, up, up), [(src, 0)], f"{name}.deconv")
        branch = _bn_relu(g, branch, name)
        branches.append(branch)
    neck = g.add_node(Concat(), [(b, 0) for b in branches], "neck.concat")

    # SSD-style head: parallel 1x1 predictors (with bias; no BN follows)
    head_in = sum(cfg.neck_out_channels)
    for name, out_ch in (
            ("cls", cfg.anchors_per_location * cfg.num_classes),
            ("box", cfg.anchors_per_location * cfg.box_code_size),
            ("dir", cfg.anchors_per_location * cfg.dir_bins)):
        _conv(g, neck, f"head.{name}", head_in, out_ch, bias=True)
    return g
