"""Multiply-add and parameter accounting, checked against loop oracles."""
import csv
import io
import json

import pytest

from pillarcost.cost import (
    CostReport, graph_cost, node_madds, node_params, speedup_vs_base,
)
from pillarcost.graph import (
    Add, BatchNorm, ChannelShuffle, Concat, Conv, Graph, Input, MaxPool, ReLU,
    Scatter, TensorShape, TransposedConv,
)
from pillarcost.shapes import node_output_shape


def conv_madds_oracle(spec: Conv, shape: TensorShape) -> int:
    """Count multiplies of a naive grouped convolution, one loop step each."""
    (out,) = node_output_shape(spec, [shape])
    in_per_group = shape.channels // spec.groups
    count = 0
    for _oc in range(out.channels):
        for _oy in range(out.height):
            for _ox in range(out.width):
                for _ic in range(in_per_group):
                    for _ky in range(spec.kernel_h):
                        for _kx in range(spec.kernel_w):
                            count += 1
    if spec.has_bias:
        count += out.channels * out.height * out.width
    return count


def tconv_madds_oracle(spec: TransposedConv, shape: TensorShape) -> int:
    """Each input pixel is pushed through the full kernel once."""
    (out,) = node_output_shape(spec, [shape])
    in_per_group = shape.channels // spec.groups
    count = 0
    for _iy in range(shape.height):
        for _ix in range(shape.width):
            for _oc in range(out.channels):
                for _ic in range(in_per_group):
                    count += spec.kernel_h * spec.kernel_w
    if spec.has_bias:
        count += out.channels * out.height * out.width
    return count


class TestNodeMadds:
    @pytest.mark.parametrize("spec,shape", [
        (Conv(16, 3, 3, pad_h=1, pad_w=1), TensorShape(8, 7, 5)),
        (Conv(16, 3, 3, stride_h=2, stride_w=2, pad_h=1, pad_w=1),
         TensorShape(8, 9, 9)),
        (Conv(8, 3, 3, pad_h=1, pad_w=1, groups=8), TensorShape(8, 6, 6)),
        (Conv(12, 1, 1, has_bias=True), TensorShape(5, 4, 4)),
        (Conv(6, 1, 3, pad_w=1), TensorShape(6, 5, 5)),
    ])
    def test_conv_matches_loop_oracle(self, spec, shape):
        outs = node_output_shape(spec, [shape])
        assert node_madds(spec, [shape], outs) == conv_madds_oracle(spec, shape)

    @pytest.mark.parametrize("spec,shape", [
        (TransposedConv(64, 2, 2, stride_h=2, stride_w=2), TensorShape(128, 6, 5)),
        (TransposedConv(8, 4, 4, stride_h=4, stride_w=4), TensorShape(16, 3, 3)),
        (TransposedConv(8, 1, 1), TensorShape(4, 7, 7)),
        (TransposedConv(4, 2, 2, stride_h=2, stride_w=2, groups=4,
                        has_bias=True), TensorShape(4, 3, 3)),
    ])
    def test_transposed_conv_matches_loop_oracle(self, spec, shape):
        outs = node_output_shape(spec, [shape])
        assert node_madds(spec, [shape], outs) == tconv_madds_oracle(spec, shape)

    def test_batchnorm_one_madd_per_element(self):
        s = TensorShape(32, 10, 12)
        assert node_madds(BatchNorm(), [s], [s]) == 32 * 10 * 12

    @pytest.mark.parametrize("spec", [
        ReLU(), Add(), Concat(), MaxPool(2, 2, 2, 2), ChannelShuffle(2),
        Scatter(4, 4),
    ])
    def test_madd_free_kinds(self, spec):
        s = TensorShape(4, 4, 4)
        shapes = [s, s] if isinstance(spec, (Add, Concat)) else [s]
        assert node_madds(spec, shapes, node_output_shape(spec, shapes)) == 0

    def test_depthwise_is_cheap(self):
        s = TensorShape(64, 10, 10)
        dense = Conv(64, 3, 3, pad_h=1, pad_w=1)
        depthwise = Conv(64, 3, 3, pad_h=1, pad_w=1, groups=64)
        full = node_madds(dense, [s], node_output_shape(dense, [s]))
        cheap = node_madds(depthwise, [s], node_output_shape(depthwise, [s]))
        assert full == 64 * cheap


class TestNodeParams:
    def test_conv_weight_count(self):
        assert node_params(Conv(16, 3, 3), [TensorShape(8, 9, 9)]) == 16 * 8 * 9
        assert node_params(Conv(16, 3, 3, has_bias=True),
                           [TensorShape(8, 9, 9)]) == 16 * 8 * 9 + 16

    def test_grouped_conv_weight_count(self):
        assert node_params(Conv(8, 3, 3, groups=8),
                           [TensorShape(8, 9, 9)]) == 8 * 1 * 9

    def test_transposed_conv_weight_count(self):
        assert node_params(TransposedConv(128, 2, 2, stride_h=2, stride_w=2),
                           [TensorShape(64, 4, 4)]) == 128 * 64 * 4

    def test_batchnorm_scale_and_shift(self):
        assert node_params(BatchNorm(), [TensorShape(32, 4, 4)]) == 64

    def test_parameter_free_kinds(self):
        s = TensorShape(4, 4, 4)
        assert node_params(ReLU(), [s]) == 0
        assert node_params(MaxPool(2, 2), [s]) == 0


def tiny_graph() -> Graph:
    g = Graph()
    a = g.add_node(Input(TensorShape(3, 8, 8)), name="stem.in")
    b = g.add_node(Conv(16, 3, 3, pad_h=1, pad_w=1), [(a, 0)], name="stem.conv")
    c = g.add_node(BatchNorm(), [(b, 0)], name="stem.bn")
    d = g.add_node(ReLU(), [(c, 0)], name="stem.relu")
    g.add_node(Conv(4, 1, 1, has_bias=True), [(d, 0)], name="head.cls")
    return g


class TestGraphCost:
    def test_totals_and_rows(self):
        report = graph_cost(tiny_graph())
        assert len(report.per_node) == 5
        conv = 16 * 3 * 9 * 64
        bn = 16 * 64
        head = 4 * 16 * 64 + 4 * 64
        assert report.total_madds == conv + bn + head
        assert report.total_params == 16 * 3 * 9 + 32 + (4 * 16 + 4)

    def test_rows_follow_topo_order(self):
        g = tiny_graph()
        report = graph_cost(g)
        names = [g.node(i).name for i in g.topo_order()]
        assert [c.name for c in report.per_node] == names

    def test_per_stage_groups_by_leading_component(self):
        stages = graph_cost(tiny_graph()).per_stage()
        assert set(stages) == {"stem", "head"}
        assert stages["head"] == (4 * 16 * 64 + 4 * 64, 4 * 16 + 4)

    def test_batchnorm_folding(self):
        full = graph_cost(tiny_graph())
        folded = graph_cost(tiny_graph(), count_batchnorm=False)
        assert full.total_madds - folded.total_madds == 16 * 64
        assert full.total_params - folded.total_params == 32

    def test_csv_is_reparseable_and_totals(self):
        report = graph_cost(tiny_graph())
        text = report.to_csv()
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["name", "kind", "madds", "params"]
        assert rows[-1][0] == "TOTAL"
        assert int(rows[-1][2]) == report.total_madds
        assert sum(int(r[2]) for r in rows[1:-1]) == report.total_madds

    def test_json_report(self):
        report = graph_cost(tiny_graph())
        doc = json.loads(report.to_json())
        assert doc["total_madds"] == report.total_madds
        assert doc["per_stage"]["stem"]["params"] == 16 * 3 * 9 + 32
        assert len(doc["per_node"]) == 5


class TestSpeedup:
    def test_ratio(self):
        base = graph_cost(tiny_graph())
        assert speedup_vs_base(base, base) == 1

    def test_zero_madd_rejected(self):
        empty = CostReport(per_node=())
        with pytest.raises(ZeroDivisionError):
            speedup_vs_base(graph_cost(tiny_graph()), empty)
