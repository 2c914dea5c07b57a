"""Compile a network into a junction tree of belief universes.

Pipeline: :func:`moralize` -> :func:`triangulate` (min-fill) ->
:func:`build_junction_tree` (maximum-weight spanning tree on sepset size) ->
:func:`initialize` (assign each CPT to one clique). :func:`compile_network`
runs all four.
"""

from dataclasses import dataclass, field
from itertools import combinations

from .errors import NoHostClique, RunningIntersectionViolated
from .potential import Potential, multiply


def _edge(a, b):
    return (a, b) if a <= b else (b, a)


@dataclass
class MoralGraph:
    """Undirected graph over variable names in declaration order."""

    vertices: tuple
    adjacency: dict

    @property
    def edges(self):
        pos = {v: i for i, v in enumerate(self.vertices)}
        out = set()
        for a, nbrs in self.adjacency.items():
            for b in nbrs:
                out.add(tuple(sorted((a, b), key=pos.__getitem__)))
        return sorted(out, key=lambda e: (pos[e[0]], pos[e[1]]))

    @classmethod
    def from_edges(cls, vertices, edges):
        adj = {v: set() for v in vertices}
        for a, b in edges:
            adj[a].add(b)
            adj[b].add(a)
        return cls(tuple(vertices), adj)


def moralize(network):
    """Link each child to its parents, marry co-parents, drop directions."""
    adj = {n: set() for n in network.names}
    for child in network.names:
        ps = network.parents[child]
        for p in ps:
            adj[child].add(p)
            adj[p].add(child)
        for a, b in combinations(ps, 2):
            adj[a].add(b)
            adj[b].add(a)
    return MoralGraph(network.names, adj)


@dataclass
class Triangulation:
    order: tuple
    fill_ins: list
    cliques: list


def triangulate(graph):
    """Greedy min-fill elimination.

    Ties on fill-in count go to the vertex with fewest remaining neighbours,
    then to the earliest in ``graph.vertices``. Cliques are the maximal
    elimination sets, listed in the order they were produced, each sorted by
    vertex order.
    """
    pos = {v: i for i, v in enumerate(graph.vertices)}
    adj = {v: set(n) for v, n in graph.adjacency.items()}
    order, fills, elim_sets = [], [], []

    def fill_cost(v):
        nbrs = sorted(adj[v], key=pos.__getitem__)
        return sum(1 for a, b in combinations(nbrs, 2) if b not in adj[a])

    remaining = list(graph.vertices)
    while remaining:
        v = min(remaining, key=lambda u: (fill_cost(u), len(adj[u]), pos[u]))
        nbrs = sorted(adj[v], key=pos.__getitem__)
        for a, b in combinations(nbrs, 2):
            if b not in adj[a]:
                adj[a].add(b)
                adj[b].add(a)
                fills.append((a, b))
        elim_sets.append(frozenset([v, *nbrs]))
        for n in nbrs:
            adj[n].discard(v)
        del adj[v]
        remaining.remove(v)
        order.append(v)

    cliques = []
    for i, c in enumerate(elim_sets):
        if any(c < d for d in elim_sets) or c in elim_sets[:i]:
            continue
        cliques.append(tuple(sorted(c, key=pos.__getitem__)))
    return Triangulation(tuple(order), fills, cliques)


@dataclass
class Clique:
    id: int
    variables: tuple
    belief: Potential = None

    def __contains__(self, name):
        return name in self.variables


@dataclass
class JunctionTree:
    """Cliques, sepset edges and the homes of CPTs and findings.

    ``edges`` holds ``(i, j, sepset)`` with ``i < j``; ``family_home[A]`` is
    the clique that received ``P(A | pa(A))``; ``entry_home[A]`` is where
    findings on ``A`` are entered.
    """

    cliques: list
    edges: list
    family_home: dict = field(default_factory=dict)
    entry_home: dict = field(default_factory=dict)
    network: object = None

    def neighbors(self, i):
        out = []
        for a, b, _ in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return sorted(out)

    def sepset(self, i, j):
        a, b = _edge(i, j)
        for x, y, s in self.edges:
            if (x, y) == (a, b):
                return s
        raise KeyError(f"no edge between cliques {i} and {j}")

    def path(self, i, j):
        """Clique ids on the unique path from ``i`` to ``j`` inclusive."""
        prev = {i: None}
        stack = [i]
        while stack:
            u = stack.pop()
            for w in self.neighbors(u):
                if w not in prev:
                    prev[w] = u
                    stack.append(w)
        out = [j]
        while out[-1] != i:
            out.append(prev[out[-1]])
        return out[::-1]

    def auto_root(self):
        """Largest clique, ties to the lowest id."""
        return max(self.cliques, key=lambda c: (len(c.variables), -c.id)).id

    def check_running_intersection(self):
        sets = [set(c.variables) for c in self.cliques]
        for i, j in combinations(range(len(sets)), 2):
            common = sets[i] & sets[j]
            for k in self.path(i, j):
                if not common <= sets[k]:
                    raise RunningIntersectionViolated(
                        f"clique {k} on path {i}->{j} lacks {sorted(common - sets[k])}"
                    )

    def check_tree(self):
        n = len(self.cliques)
        if len(self.edges) != n - 1:
            raise RunningIntersectionViolated(f"{len(self.edges)} edges for {n} cliques")
        if n and len(self.path_component(0)) != n:
            raise RunningIntersectionViolated("clique graph is not connected")
        for a, b, s in self.edges:
            expected = tuple(v for v in self.cliques[a].variables if v in self.cliques[b].variables)
            if tuple(s) != expected:
                raise RunningIntersectionViolated(f"sepset {a}-{b} is {s}, expected {expected}")

    def path_component(self, i):
        seen = {i}
        stack = [i]
        while stack:
            for w in self.neighbors(stack.pop()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def dump(self):
        """Deterministic text listing of cliques, sepsets and homes."""
        lines = []
        for c in self.cliques:
            lines.append(f"clique {c.id}: {', '.join(c.variables)}")
        for a, b, s in self.edges:
            lines.append(f"sepset {a}-{b}: {', '.join(s)}")
        for name in self.family_home:
            lines.append(
                f"home {name}: cpt@{self.family_home[name]} finding@{self.entry_home[name]}"
            )
        return "\n".join(lines) + "\n"


def build_junction_tree(cliques):
    """Connect cliques by a maximum-weight spanning tree (Kruskal).

    Edge weight is the sepset size; ties go to the lexicographically smallest
    clique-id pair. Zero-weight edges are allowed so disconnected networks
    still yield a single tree.
    """
    cliques = [tuple(c) for c in cliques]
    candidates = []
    for i, j in combinations(range(len(cliques)), 2):
        common = tuple(v for v in cliques[i] if v in cliques[j])
        candidates.append((-len(common), i, j, common))
    candidates.sort(key=lambda t: t[:3])

    root = list(range(len(cliques)))

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    edges = []
    for _, i, j, common in candidates:
        ri, rj = find(i), find(j)
        if ri != rj:
            root[max(ri, rj)] = min(ri, rj)
            edges.append((i, j, common))
    edges.sort()
    tree = JunctionTree([Clique(i, c) for i, c in enumerate(cliques)], edges)
    tree.check_tree()
    tree.check_running_intersection()
    return tree


def _smallest_containing(tree, names):
    hosts = [c for c in tree.cliques if set(names) <= set(c.variables)]
    if not hosts:
        return None
    return min(hosts, key=lambda c: (len(c.variables), c.id)).id


def initialize(network, tree):
    """Attach CPTs: each goes to the smallest clique holding its family.

    Each clique belief is the product of its assigned CPTs over the clique
    domain (all ones when none), so the product of all beliefs is the joint.
    """
    beliefs = {c.id: Potential([network[v] for v in c.variables]) for c in tree.cliques}
    family_home, entry_home = {}, {}
    for name in network.names:
        host = _smallest_containing(tree, network.family(name))
        if host is None:
            raise NoHostClique(f"no clique contains the family of {name!r}")
        family_home[name] = host
        entry_home[name] = _smallest_containing(tree, [name])
        beliefs[host] = multiply(beliefs[host], network.cpts[name])
    cliques = []
    for c in tree.cliques:
        cliques.append(Clique(c.id, c.variables, beliefs[c.id].transpose(c.variables)))
    return JunctionTree(cliques, list(tree.edges), family_home, entry_home, network)


def compile_network(network):
    tri = triangulate(moralize(network))
    return initialize(network, build_junction_tree(tri.cliques))
