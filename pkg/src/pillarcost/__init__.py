"""Cost modeling for PointPillars backbone variants.

Builds each network as a static computation graph, counts multiply-add
operations and parameters exactly, and analyses the accuracy/cost
trade-off of the measured design points.
"""

from .analysis import (AnalysisError, DesignPoint, TimingProfile, amdahl,
                       amdahl_max, default_dataset_path, load_points, map_of,
                       pareto_front, project_fps, ratio_table, round2)
from .arch import (ArchConfig, ArchError, Variant, basic_unit, build_backbone,
                   build_pointpillars)
from .cost import (CostReport, NodeCost, graph_cost, node_madds, node_params,
                   speedup_vs_base)
from .graph import (Add, BatchNorm, ChannelShuffle, ChannelSplit, Concat,
                    Conv, Graph, GraphError, Input, MaxPool, ReLU, Scatter,
                    TensorShape, TransposedConv)
from .shapes import ShapeError, infer_all, node_output_shape
from .svg import render_scatter

__version__ = "1.0.0"

__all__ = [
    "Add", "AnalysisError", "ArchConfig", "ArchError", "BatchNorm",
    "ChannelShuffle", "ChannelSplit", "Concat", "Conv", "CostReport",
    "DesignPoint", "Graph", "GraphError", "Input", "MaxPool", "NodeCost",
    "ReLU", "Scatter", "ShapeError", "TensorShape", "TimingProfile",
    "TransposedConv", "Variant", "amdahl", "amdahl_max", "basic_unit",
    "build_backbone", "build_pointpillars", "default_dataset_path",
    "graph_cost", "infer_all", "load_points", "map_of", "node_madds",
    "node_output_shape", "node_params", "pareto_front", "project_fps",
    "ratio_table", "render_scatter", "round2", "speedup_vs_base",
]
