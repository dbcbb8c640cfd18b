"""Exception types raised across the package."""


class GraphError(ValueError):
    pass


class IsolatedNodeError(GraphError):
    def __init__(self, node: int):
        self.node = int(node)
        super().__init__(f"node {self.node} has zero degree")


class DisconnectedComponentError(GraphError):
    """A connected component holds no labeled node."""

    def __init__(self, nodes, domain: str = ""):
        self.nodes = [int(i) for i in nodes]
        self.domain = domain
        where = f" in {domain} graph" if domain else ""
        preview = self.nodes[:10]
        more = "..." if len(self.nodes) > 10 else ""
        super().__init__(
            f"{len(self.nodes)} node(s){where} unreachable from any label: {preview}{more}"
        )


class UnreachableNodesError(GraphError):
    def __init__(self, nodes):
        self.nodes = [int(i) for i in nodes]
        super().__init__(f"nodes not reachable from the labeled set: {self.nodes[:10]}")


class SingularSystemError(ArithmeticError):
    def __init__(self, cond: float):
        self.cond = float(cond)
        super().__init__(
            f"coefficient system is numerically singular (cond={self.cond:.3g}); "
            "R is probably too large for the number of labels"
        )


class InfeasibleWeightsError(RuntimeError):
    """The weight LP has no feasible point even after degree clamping."""

    def __init__(self, nodes):
        self.nodes = [int(i) for i in nodes]
        super().__init__(f"weight LP infeasible; violating nodes {self.nodes[:10]}")


class TooLargeError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = int(line)
        super().__init__(f"{self.path}:{self.line}: {message}")
