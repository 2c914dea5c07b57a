"""Data-conflict measure, its decomposition along the collect pass, and the
explaining-away monitor.

``conf(x, ..., y) = log2(P(x) * ... * P(y) / P(x * ... * y))``. Positive values
flag findings that are less likely together than apart.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation, ZeroPrior

INF = math.inf
IDENTITY_TOL = 1e-9


def compute_conf(priors, joint):
    """``log2(prod(priors) / joint)`` in bits.

    Returns ``+inf`` when ``joint`` is 0 (the findings are inconsistent).

    Raises
    ------
    ZeroPrior
        If any prior is not positive; conf is undefined then.
    """
    priors = [float(p) for p in priors]
    if any(p <= 0 for p in priors):
        raise ZeroPrior(f"conf undefined: a finding has prior {min(priors)}")
    if joint <= 0:
        return INF
    return sum(math.log2(p) for p in priors) - math.log2(joint)


@dataclass
class NodeConflict:
    """Conflict bookkeeping for one clique of the collect traversal.

    ``probability`` is P of the conjunction of the findings entered in the
    clique's subtree; ``subglobal`` is conf over those findings; ``local`` is
    the conf between the groups meeting here: one conjunction per child
    subtree with findings, plus each finding entered at this clique.
    """

    clique: int
    variables: tuple
    parent: int
    children: list
    own_findings: list
    findings: list
    probability: float
    prior_product: float
    subglobal: float
    local: float


@dataclass
class ConflictTrace:
    root: int
    nodes: dict
    global_conf: float
    evidence_probability: float
    priors: list
    labels: list
    entry_cliques: list
    flags: list = field(default_factory=list)

    @property
    def inconsistent(self):
        return "Inconsistent" in self.flags

    @property
    def no_findings(self):
        return "NoFindings" in self.flags

    @property
    def possible_conflict(self):
        return self.global_conf > 0

    def meeting_nodes(self):
        """Cliques where at least two groups of findings meet."""
        out = []
        for node in self.nodes.values():
            groups = len(node.own_findings) + sum(
                1 for c in node.children if self.nodes[c].findings
            )
            if groups >= 2:
                out.append(node)
        return out


def conflict_trace(session, root=None):
    """Decompose the global conflict over the collect traversal rooted at ``root``.

    Runs ``collect_evidence`` first if the session was not collected from
    ``root``. For every clique, ``subglobal = local + sum(child subglobals)``
    is checked to ``1e-9`` whenever the values are finite.
    """
    if root is None:
        root = session.root if session._collected else session.tree.auto_root()
    if not session._collected or session.root != root:
        session.collect_evidence(root)

    findings = session.findings
    priors = [f.prior for f in findings]
    parent = {root: None}
    for node, kids in session.children.items():
        for k in kids:
            parent[k] = node

    nodes = {}
    for c in session.tree.cliques:
        i = c.id
        sub = session.subtree_findings[i]
        own = [k for k in sub if findings[k].clique == i]
        kids = session.children[i]
        prob = float(session.node_records[i]) if sub else 1.0
        prior_product = float(np.prod([priors[k] for k in sub])) if sub else 1.0
        subglobal = compute_conf([priors[k] for k in sub], prob) if sub else 0.0

        groups = [priors[k] for k in own]
        groups += [float(session.node_records[w]) for w in kids if session.subtree_findings[w]]
        if not sub:
            local = 0.0
        elif any(g <= 0 for g in groups):
            local = math.nan
        else:
            local = compute_conf(groups, prob)
        nodes[i] = NodeConflict(
            clique=i,
            variables=c.variables,
            parent=parent[i],
            children=list(kids),
            own_findings=own,
            findings=list(sub),
            probability=prob,
            prior_product=prior_product,
            subglobal=subglobal,
            local=local,
        )

    evidence = session.evidence_probability()
    global_conf = compute_conf(priors, evidence)
    flags = []
    if not findings:
        flags.append("NoFindings")
        global_conf = 0.0
    if findings and evidence <= 0:
        flags.append("Inconsistent")

    trace = ConflictTrace(
        root=root,
        nodes=nodes,
        global_conf=global_conf,
        evidence_probability=evidence,
        priors=priors,
        labels=[f.label for f in findings],
        entry_cliques=[f.clique for f in findings],
        flags=flags,
    )
    check_decomposition(trace)
    return trace


def check_decomposition(trace, tol=IDENTITY_TOL):
    """Assert the additive identity at every node and at the root."""
    for node in trace.nodes.values():
        parts = [node.local] + [trace.nodes[c].subglobal for c in node.children]
        if not all(math.isfinite(x) for x in parts + [node.subglobal]):
            continue
        if abs(node.subglobal - sum(parts)) > tol:
            raise InvariantViolation(
                f"clique {node.clique}: subglobal {node.subglobal} != local + children {sum(parts)}"
            )
    root = trace.nodes[trace.root].subglobal
    if math.isfinite(root) and abs(root - trace.global_conf) > tol:
        raise InvariantViolation(f"root subglobal {root} != global conf {trace.global_conf}")


@dataclass(frozen=True)
class HypothesisReport:
    variable: str
    state: str
    prior: float
    posterior: float
    global_conf: float

    @property
    def ratio(self):
        return self.posterior / self.prior

    @property
    def score(self):
        """``log2(P(H | e) / P(H))``; ``-inf`` when the evidence rules H out."""
        if self.posterior <= 0:
            return -INF
        return math.log2(self.posterior) - math.log2(self.prior)

    @property
    def explains(self):
        return self.score > self.global_conf

    @property
    def label(self):
        return f"{self.variable}={self.state}"


def monitor_hypotheses(session, trace, variables=None):
    """Score every single-state hypothesis ``H`` against the global conflict.

    ``H`` explains the conflict away when ``log2(P(H|e)/P(H)) > conf(e)``.
    Variables whose state is pinned down by the findings are skipped, as are
    states with prior 0. Reports come sorted by descending score, ties in
    declaration order. Returns an empty list for inconsistent evidence.
    """
    if trace.inconsistent:
        return []
    net = session.network
    if variables is None:
        variables = net.names
    masks = {}
    for f in session.findings:
        name = f.finding.variable.name
        m = masks.get(name, np.ones(net[name].card, dtype=int))
        masks[name] = m * np.array(f.finding.mask)

    reports = []
    for name in net.sort_key(variables):
        if name in masks and int(masks[name].sum()) == 1:
            continue
        prior = session.prior_marginal(name)
        post = session.marginal(name)
        for k, state in enumerate(net[name].states):
            if prior[k] <= 0:
                continue
            reports.append(
                HypothesisReport(name, state, float(prior[k]), float(post[k]), trace.global_conf)
            )
    order = {(r.variable, r.state): i for i, r in enumerate(reports)}
    reports.sort(key=lambda r: (-r.score, order[(r.variable, r.state)]))
    return reports
