"""Batch command line front end.

Exit codes: 0 success, 1 input error, 2 internal invariant violation,
3 when ``conflict`` finds a positive global conflict.
"""

import argparse
import hashlib
import math
import sys
import time

import numpy as np

from . import netio
from .compilation import compile_network, moralize, triangulate
from .conflict import conflict_trace, monitor_hypotheses
from .errors import BNError, InconsistentEvidence, InvariantViolation
from .model import Network, validate
from .oracle import enumerate_joint, oracle_conf, oracle_query, random_findings, random_network
from .oracle import surprise_index
from .potential import Potential, Variable
from .propagate import Finding, open_session

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL, EXIT_CONFLICT = 0, 1, 2, 3
ORACLE_TOL = 1e-9


class UsageError(BNError):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    parser = _ArgumentParser(prog="bnconflict", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def common(p, evidence=True, net_required=True):
        p.add_argument("--net", required=net_required, help="network file (.net)")
        if evidence:
            p.add_argument("--evidence", help="evidence file (.ev)")
        p.add_argument("--format", choices=("human", "machine"), default="human")
        return p

    common(sub.add_parser("validate", help="check a network file"), evidence=False)
    common(sub.add_parser("compile", help="dump cliques, sepsets and homes"), evidence=False)
    q = common(sub.add_parser("query", help="posterior marginals or a joint table"))
    q.add_argument("--target", help="comma-separated variables")
    c = common(sub.add_parser("conflict", help="conflict trace over the collect pass"))
    c.add_argument("--root", default="auto")
    m = common(sub.add_parser("monitor", help="rank explaining hypotheses"))
    m.add_argument("--root", default="auto")
    m.add_argument("--hypotheses", default="all")
    common(sub.add_parser("surprise", help="surprise index of the findings"))
    o = common(sub.add_parser("oracle", help="cross-check engine against enumeration"),
               net_required=False)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--count", type=int, default=200)
    return parser


def _load(args):
    with open(args.net, encoding="utf-8") as fh:
        text = fh.read()
    network = netio.parse_network(text).to_network()
    findings = []
    if getattr(args, "evidence", None):
        findings = netio.load_evidence(args.evidence, network)
    return network, findings


def network_digest(network):
    text = netio.serialize_network(netio.network_to_document(network))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _session(network, findings, tree=None):
    session = open_session(tree or compile_network(network))
    for f in findings:
        session.enter_finding(f)
    return session


def resolve_name(network, text):
    """Exact variable name, or a prefix matching exactly one variable."""
    if text in network:
        return text
    hits = [n for n in network.names if n.startswith(text)]
    if len(hits) == 1:
        return hits[0]
    network[text]  # raises UnknownVariable
    raise UsageError(f"{text!r} is ambiguous: {', '.join(hits)}")


def _names(network, arg):
    return [resolve_name(network, t.strip()) for t in arg.split(",")]


def _root(arg, tree):
    if arg == "auto":
        return tree.auto_root()
    try:
        root = int(arg)
    except ValueError:
        raise UsageError(f"--root must be a clique id or 'auto', got {arg!r}") from None
    if not 0 <= root < len(tree.cliques):
        raise UsageError(f"--root {root} out of range 0..{len(tree.cliques) - 1}")
    return root


def _fmt(x, digits=6):
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("+inf" if x > 0 else "-inf")
    return f"{x:.{digits}f}"


def _cell(x):
    """Two-decimal cell without the leading zero, as in ``.47``."""
    s = f"{x:.2f}"
    return s[1:] if s.startswith("0.") else s


def _findings_block(session):
    rows = []
    for k, f in enumerate(session.findings):
        rows.append({"index": k, "label": f.label, "variable": f.finding.variable.name,
                     "mask": list(f.finding.mask), "prior": f.prior, "clique": f.clique})
    return rows


# -- subcommands ----------------------------------------------------------------


def cmd_validate(args, out):
    with open(args.net, encoding="utf-8") as fh:
        doc = netio.parse_network(fh.read())
    variables = [Variable(v.name, v.states) for v in doc.variables]
    by_name = {v.name: v for v in variables}
    parents = {c.child: tuple(c.parents) for c in doc.cpts}
    cpts = {}
    for c in doc.cpts:
        domain = [by_name[p] for p in c.parents] + [by_name[c.child]]
        cpts[c.child] = Potential(domain, [x for row in c.probabilities() for x in row])
    report = validate(Network(variables, parents, cpts))
    entries = [{"kind": v.kind, "variable": v.variable, "detail": v.detail, "row": v.row}
               for v in report]
    if args.format == "machine":
        out.write(netio.dump_report({"command": "validate", "net": args.net,
                                     "valid": not report, "violations": entries}))
    elif not report:
        out.write(f"{args.net}: valid ({len(variables)} variables)\n")
    else:
        for e in entries:
            row = f" row {e['row']}" if e["row"] is not None else ""
            out.write(f"{e['kind']}: {e['variable']}{row}: {e['detail']}\n")
    return EXIT_OK if not report else EXIT_INPUT


def cmd_compile(args, out):
    network, _ = _load(args)
    tri = triangulate(moralize(network))
    tree = compile_network(network)
    if args.format == "machine":
        out.write(netio.dump_report({
            "command": "compile",
            "network_digest": network_digest(network),
            "elimination_order": list(tri.order),
            "fill_ins": [list(e) for e in tri.fill_ins],
            "cliques": [{"id": c.id, "variables": list(c.variables)} for c in tree.cliques],
            "sepsets": [{"cliques": [a, b], "variables": list(s)} for a, b, s in tree.edges],
            "family_home": tree.family_home,
            "entry_home": tree.entry_home,
        }))
    else:
        out.write(f"elimination order: {', '.join(tri.order)}\n")
        out.write(f"fill-ins: {len(tri.fill_ins)}\n")
        out.write(tree.dump())
    return EXIT_OK


def cmd_query(args, out):
    network, findings = _load(args)
    session = _session(network, findings)
    p_e = session.evidence_probability()
    targets = _names(network, args.target) if args.target else None
    if p_e <= 0:
        raise InconsistentEvidence("entered findings have probability 0; posteriors undefined")
    session.propagate()
    report = {"command": "query", "network_digest": network_digest(network),
              "findings": _findings_block(session), "evidence_probability": p_e}
    if targets and len(targets) > 1:
        table = session.joint_marginal(targets)
        report["joint"] = {"variables": list(table.names), "values": table.flat.tolist()}
    else:
        names = targets or list(network.names)
        report["marginals"] = {n: session.marginal(n).tolist() for n in names}

    if args.format == "machine":
        out.write(netio.dump_report(report))
        return EXIT_OK
    out.write(f"evidence probability: {_fmt(p_e)}\n")
    if "joint" in report:
        names = report["joint"]["variables"]
        values = table.values
        if len(names) == 2:
            rv, cv = network[names[0]], network[names[1]]
            width = max(len(s) for s in rv.states + (rv.name,))
            out.write(" " * width + "  " + "  ".join(f"{s:>4}" for s in cv.states)
                      + f"   <- {cv.name}\n")
            for i, s in enumerate(rv.states):
                out.write(f"{s:>{width}}  " + "  ".join(f"{_cell(x):>4}" for x in values[i]) + "\n")
            out.write(f"(rows: {rv.name})\n")
        else:
            for idx in np.ndindex(values.shape):
                cfg = ", ".join(f"{n}={network[n].states[k]}" for n, k in zip(names, idx))
                out.write(f"{cfg}: {_cell(values[idx])}\n")
    else:
        for n, dist in report["marginals"].items():
            cells = "  ".join(f"{s}={_fmt(p, 4)}" for s, p in zip(network[n].states, dist))
            out.write(f"{n}: {cells}\n")
    return EXIT_OK


def _trace_report(trace, session):
    nodes = []
    for i in sorted(trace.nodes):
        n = trace.nodes[i]
        nodes.append({
            "clique": n.clique, "variables": list(n.variables), "parent": n.parent,
            "children": n.children, "entered": [trace.labels[k] for k in n.own_findings],
            "subtree_findings": [trace.labels[k] for k in n.findings],
            "subtree_probability": n.probability, "prior_product": n.prior_product,
            "local_conf": n.local, "subglobal_conf": n.subglobal,
        })
    ratio = (math.prod(trace.priors) / trace.evidence_probability
             if trace.evidence_probability > 0 else math.inf)
    return {"root": trace.root, "evidence_probability": trace.evidence_probability,
            "global_conf": trace.global_conf, "global_ratio": ratio,
            "possible_conflict": trace.possible_conflict, "flags": trace.flags, "nodes": nodes}


def _write_trace(out, trace, session):
    out.write(f"collect root: clique {trace.root}\n")
    out.write("findings:\n")
    for f in session.findings:
        out.write(f"  {f.label:<24} prior {_fmt(f.prior)}  entered at clique {f.clique}\n")
    out.write(f"evidence probability: {_fmt(trace.evidence_probability)}\n")
    out.write("clique  parent  subtree P      local    subglobal  findings\n")
    for i in sorted(trace.nodes):
        n = trace.nodes[i]
        par = "-" if n.parent is None else str(n.parent)
        labels = ", ".join(trace.labels[k] for k in n.findings) or "-"
        out.write(f"{n.clique:>6}  {par:>6}  {_fmt(n.probability):>9}  {_fmt(n.local, 3):>8}"
                  f"  {_fmt(n.subglobal, 3):>9}  {labels}\n")
    rep = _trace_report(trace, session)
    out.write(f"global conf: {_fmt(trace.global_conf, 3)} bits (ratio {_fmt(rep['global_ratio'], 3)})\n")
    if trace.flags:
        out.write(f"flags: {', '.join(trace.flags)}\n")
    out.write("verdict: " + ("possible conflict\n" if trace.possible_conflict else "no conflict\n"))


def cmd_conflict(args, out):
    network, findings = _load(args)
    session = _session(network, findings)
    root = _root(args.root, session.tree)
    trace = conflict_trace(session, root)
    if args.format == "machine":
        report = {"command": "conflict", "network_digest": network_digest(network),
                  "findings": _findings_block(session)}
        report.update(_trace_report(trace, session))
        out.write(netio.dump_report(report))
    else:
        _write_trace(out, trace, session)
    return EXIT_CONFLICT if trace.possible_conflict else EXIT_OK


def cmd_monitor(args, out):
    network, findings = _load(args)
    session = _session(network, findings)
    root = _root(args.root, session.tree)
    trace = conflict_trace(session, root)
    variables = None
    if args.hypotheses != "all":
        variables = _names(network, args.hypotheses)
    if not trace.inconsistent:
        session.distribute_evidence()
    reports = monitor_hypotheses(session, trace, variables)
    rows = [{"hypothesis": r.label, "prior": r.prior, "posterior": r.posterior,
             "ratio": r.ratio, "score": r.score, "explains": r.explains} for r in reports]
    if args.format == "machine":
        out.write(netio.dump_report({
            "command": "monitor", "network_digest": network_digest(network),
            "findings": _findings_block(session), "global_conf": trace.global_conf,
            "flags": trace.flags, "hypotheses": rows,
        }))
        return EXIT_OK
    out.write(f"global conf: {_fmt(trace.global_conf, 3)} bits\n")
    if trace.inconsistent:
        out.write("evidence is inconsistent; no hypotheses scored\n")
        return EXIT_OK
    out.write("hypothesis                P(H)      P(H|e)    ratio      score  explains\n")
    for r in rows:
        out.write(f"{r['hypothesis']:<24}  {_fmt(r['prior'])}  {_fmt(r['posterior'])}"
                  f"  {_fmt(r['ratio'], 3):>7}  {_fmt(r['score'], 3):>8}  "
                  f"{'yes' if r['explains'] else 'no'}\n")
    explaining = [r["hypothesis"] for r in rows if r["explains"]]
    out.write("explained by: " + (", ".join(explaining) if explaining else "none") + "\n")
    return EXIT_OK


def cmd_surprise(args, out):
    network, findings = _load(args)
    config = {}
    for f in findings:
        if sum(f.mask) != 1 or f.variable.name in config:
            raise UsageError("surprise needs exactly one single-state finding per variable")
        config[f.variable.name] = f.mask.index(1)
    joint = enumerate_joint(network)
    index = surprise_index(joint, config)
    _, p = oracle_query(joint, findings, [])
    if args.format == "machine":
        out.write(netio.dump_report({"command": "surprise", "network_digest": network_digest(network),
                                     "findings": [f.label for f in findings],
                                     "configuration_probability": p, "surprise_index": index}))
    else:
        out.write(f"P(findings): {_fmt(p)}\n")
        out.write(f"surprise index: {_fmt(index)}\n")
    return EXIT_OK


def cross_check(network, findings):
    """Largest absolute deviation between engine and enumeration."""
    joint = enumerate_joint(network)
    session = _session(network, findings)
    dev = abs(session.evidence_probability() - oracle_query(joint, findings, [])[1])
    trace = conflict_trace(session)
    want = oracle_conf(joint, findings) if findings else 0.0
    if math.isinf(want) or math.isinf(trace.global_conf):
        dev = max(dev, 0.0 if want == trace.global_conf else math.inf)
    else:
        dev = max(dev, abs(want - trace.global_conf))
    if session.evidence_probability() > 0:
        session.propagate()
        for name in network.names:
            table, _ = oracle_query(joint, findings, [name])
            dev = max(dev, float(np.max(np.abs(session.marginal(name) - table))))
        for c in session.tree.cliques:
            table, _ = oracle_query(joint, findings, c.variables)
            dev = max(dev, float(np.max(np.abs(session.joint_marginal(c.variables).values - table))))
    return dev


def cmd_oracle(args, out):
    cases = []
    if args.net:
        network, findings = _load(args)
        cases.append(("input", cross_check(network, findings)))
    else:
        rng = np.random.default_rng(args.seed)
        for k in range(args.count):
            network = random_network(rng)
            findings = [Finding(network[n], m) for n, m in random_findings(rng, network)]
            session = open_session(compile_network(network))
            findings = [f for f in findings if session.prior(f) > 0]
            cases.append((f"random-{k}", cross_check(network, findings)))
    worst = max(d for _, d in cases)
    ok = worst < ORACLE_TOL
    if args.format == "machine":
        out.write(netio.dump_report({"command": "oracle", "cases": len(cases),
                                     "max_abs_deviation": worst, "tolerance": ORACLE_TOL,
                                     "pass": ok}))
    else:
        out.write(f"cases: {len(cases)}\nmax abs deviation: {worst:.3e}\n")
        out.write("PASS\n" if ok else "FAIL\n")
    return EXIT_OK if ok else EXIT_INTERNAL


COMMANDS = {
    "validate": cmd_validate,
    "compile": cmd_compile,
    "query": cmd_query,
    "conflict": cmd_conflict,
    "monitor": cmd_monitor,
    "surprise": cmd_surprise,
    "oracle": cmd_oracle,
}


def run(argv, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        code = COMMANDS[args.command](args, out)
    except InvariantViolation as exc:
        err.write(f"internal error: {exc}\n")
        return EXIT_INTERNAL
    except (BNError, KeyError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    if args.format == "human":
        err.write(f"elapsed: {1000 * (time.perf_counter() - start):.1f} ms\n")
    return code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
