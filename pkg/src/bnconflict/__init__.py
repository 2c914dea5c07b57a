"""Junction-tree inference for discrete Bayesian networks with data-conflict analysis."""

from importlib import resources

from .compilation import (
    JunctionTree,
    build_junction_tree,
    compile_network,
    initialize,
    moralize,
    triangulate,
)
from .conflict import ConflictTrace, HypothesisReport, compute_conf, conflict_trace, monitor_hypotheses
from .model import Network, Variable, build_network, validate
from .netio import (
    load_evidence,
    load_network,
    parse_evidence,
    parse_network,
    serialize_evidence,
    serialize_network,
)
from .oracle import enumerate_joint, forward_sample, oracle_query, surprise_index
from .potential import Potential, apply_finding, divide, marginalize, multiply, normalize
from .propagate import Finding, Session, open_session

__version__ = "0.1.0"


def data_path(name):
    """Path of a bundled fixture such as ``holmes.net`` or ``watson.ev``."""
    return str(resources.files(__package__).joinpath("data", name))


def holmes():
    """The burglary/earthquake alarm network with a seismometer."""
    return load_network(data_path("holmes.net"))
