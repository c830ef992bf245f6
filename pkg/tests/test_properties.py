"""Property-based and randomized invariants over graphs, shapes and costs."""
import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from pillarcost.analysis import DesignPoint, amdahl, amdahl_max, map_of, \
    pareto_front, round2
from pillarcost.cost import graph_cost, node_madds, node_params
from pillarcost.graph import (
    Add, BatchNorm, ChannelShuffle, ChannelSplit, Concat, Conv, Graph, Input,
    MaxPool, ReLU, Scatter, TensorShape, TransposedConv, num_outputs,
)
from pillarcost.shapes import ShapeError, infer_all, node_output_shape

# -- hypothesis strategies --------------------------------------------------

shapes = st.builds(TensorShape,
                   st.integers(1, 32), st.integers(1, 24), st.integers(1, 24))

convs = st.builds(
    Conv,
    out_channels=st.integers(1, 32),
    kernel_h=st.integers(1, 3), kernel_w=st.integers(1, 3),
    stride_h=st.integers(1, 2), stride_w=st.integers(1, 2),
    pad_h=st.integers(0, 2), pad_w=st.integers(0, 2),
    groups=st.integers(1, 4),
    has_bias=st.booleans())


@given(spec=convs, shape=shapes)
def test_conv_madds_equal_params_times_output_pixels(spec, shape):
    try:
        outs = node_output_shape(spec, [shape])
    except ShapeError:
        return
    assert node_madds(spec, [shape], outs) == \
        node_params(spec, [shape]) * outs[0].pixels


@given(spec=convs, shape=shapes)
def test_conv_cost_scales_linearly_in_output_channels(spec, shape):
    try:
        outs = node_output_shape(spec, [shape])
    except ShapeError:
        return
    if spec.has_bias or spec.out_channels % spec.groups:
        return
    import dataclasses
    doubled = dataclasses.replace(spec, out_channels=2 * spec.out_channels)
    douts = node_output_shape(doubled, [shape])
    assert node_madds(doubled, [shape], douts) == \
        2 * node_madds(spec, [shape], outs)


@given(spec=convs, shape=shapes)
def test_conv_output_dims_never_exceed_padded_input(spec, shape):
    try:
        (out,) = node_output_shape(spec, [shape])
    except ShapeError:
        return
    assert 1 <= out.height <= shape.height + 2 * spec.pad_h
    assert 1 <= out.width <= shape.width + 2 * spec.pad_w


@given(shape=shapes,
       spec=st.builds(TransposedConv,
                      out_channels=st.integers(1, 16),
                      kernel_h=st.integers(1, 4), kernel_w=st.integers(1, 4),
                      stride_h=st.integers(1, 4), stride_w=st.integers(1, 4)))
def test_transposed_conv_cost_independent_of_output_size(spec, shape):
    try:
        outs = node_output_shape(spec, [shape])
    except ShapeError:
        return
    expected = (spec.out_channels * shape.channels
                * spec.kernel_h * spec.kernel_w * shape.pixels)
    assert node_madds(spec, [shape], outs) == expected


@given(shape=shapes, parts=st.integers(1, 4))
def test_split_partitions_channels_exactly(shape, parts):
    spec = ChannelSplit(fractions=(Fraction(1, parts),) * parts)
    try:
        outs = node_output_shape(spec, [shape])
    except ShapeError:
        assert shape.channels % parts != 0
        return
    assert sum(s.channels for s in outs) == shape.channels
    assert all((s.height, s.width) == (shape.height, shape.width) for s in outs)


@given(st.fractions(min_value="1/100", max_value="99/100"),
       st.fractions(min_value=1, max_value=1000))
def test_amdahl_is_bounded_and_at_least_one(p, s):
    value = amdahl(p, s)
    assert 1 <= value <= amdahl_max(p)


@given(st.fractions(min_value="1/1000", max_value=100))
def test_round2_is_idempotent_and_close(value):
    once = round2(value)
    assert round2(Fraction(once).limit_denominator(10**6)) == once
    assert abs(once - float(value)) <= 0.005 + 1e-9


points_lists = st.lists(
    st.builds(
        lambda name, cost, ap: DesignPoint(
            name=name, gmadds=cost,
            ap={(c, d): ap for c in ("Car", "Pedestrian", "Cyclist")
                for d in ("Easy", "Moderate", "Hard")}),
        st.uuids().map(str), st.fractions(min_value="1/10", max_value=100),
        st.fractions(min_value=0, max_value=100)),
    min_size=1, max_size=12)


@given(points_lists)
def test_pareto_front_members_do_not_dominate_each_other(points):
    front = pareto_front(points)
    assert front
    by_name = {p.name: p for p in points}
    members = [by_name[n] for n in front]
    for a in members:
        for b in members:
            strictly_better = (a.gmadds <= b.gmadds and
                               map_of(a) >= map_of(b) and
                               (a.gmadds < b.gmadds or map_of(a) > map_of(b)))
            assert not strictly_better


@given(points_lists)
def test_pareto_front_contains_cheapest_and_best(points):
    front = set(pareto_front(points))
    cheapest = min(points, key=lambda p: (p.gmadds, -map_of(p)))
    best = max(points, key=lambda p: (map_of(p), -p.gmadds))
    assert cheapest.name in front
    assert best.name in front


# -- randomized DAG fuzzing -------------------------------------------------

def random_graph(rng: random.Random) -> Graph:
    """A random valid DAG built only through the public construction API."""
    g = Graph()
    g.add_node(Input(TensorShape(rng.choice((2, 4, 8, 12)),
                                 rng.randint(3, 12), rng.randint(3, 12))),
               name="n0")
    for i in range(1, rng.randint(2, 9)):
        src = (rng.randrange(len(g)), 0)
        # only port 0 producers are used as sources, so any node qualifies
        while num_outputs(g.node(src[0]).spec) == 0:
            src = (rng.randrange(len(g)), 0)
        roll = rng.random()
        if roll < 0.35:
            spec = Conv(rng.choice((2, 4, 8)), rng.choice((1, 3)),
                        rng.choice((1, 3)), pad_h=1, pad_w=1)
            g.add_node(spec, [src], name=f"n{i}")
        elif roll < 0.5:
            g.add_node(ReLU(), [src], name=f"n{i}")
        elif roll < 0.6:
            g.add_node(BatchNorm(), [src], name=f"n{i}")
        elif roll < 0.7:
            g.add_node(MaxPool(2, 2, 2, 2, 1, 1), [src], name=f"n{i}")
        elif roll < 0.8:
            g.add_node(ChannelShuffle(rng.choice((1, 2, 3))), [src], name=f"n{i}")
        elif roll < 0.9:
            other = (rng.randrange(len(g)), 0)  # self-merge is allowed
            g.add_node(Add(), [src, other], name=f"n{i}")
        else:
            other = (rng.randrange(len(g)), 0)
            g.add_node(Concat(), [src, other], name=f"n{i}")
    return g


def test_ten_thousand_random_dags_uphold_invariants():
    rng = random.Random(20260823)
    for _ in range(10_000):
        g = random_graph(rng)
        assert g.validate() == []
        order = g.topo_order()
        assert sorted(order) == list(range(len(g)))
        pos = {nid: k for k, nid in enumerate(order)}
        assert all(pos[e.src] < pos[e.dst] for e in g.edges)
        try:
            shapes = infer_all(g)
        except ShapeError:
            continue  # shape conflict is a legal, reported outcome
        assert all(min(s.channels, s.height, s.width) >= 1
                   for s in shapes.values())
        report = graph_cost(g)
        assert report.total_madds >= 0 and report.total_params >= 0
        assert len(report.per_node) == len(g)
