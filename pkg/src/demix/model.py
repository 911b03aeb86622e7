from dataclasses import dataclass

from .outer_code import FactorGraph


@dataclass(frozen=True)
class GroupConfig:
    """Per-class code parameters: outer graph, active users and amplitude ``d``."""

    graph: FactorGraph
    K: int
    amplitude: float

    @property
    def w(self):
        return self.graph.w

    @property
    def L(self):
        return self.graph.L

    @property
    def m(self):
        return self.graph.m

    @property
    def dim(self):
        return self.graph.L * self.graph.m

    def with_amplitude(self, d):
        return GroupConfig(graph=self.graph, K=self.K, amplitude=float(d))
