"""Text formats for networks (``.net``) and evidence (``.ev``), plus JSON reports.

Network grammar (``#`` starts a comment; whitespace and newlines are free)::

    netformat 1
    var Burglary { states: N, Y }
    var Alarm { states: N, Y }
    cpt Burglary { unit: percent; rows: (50, 50); }
    cpt Alarm | Burglary {
        unit: probability;
        rows: (0.99, 0.01) (0.01, 0.99);
    }

``rows`` lists one parenthesised distribution of the child per parent
configuration, parents varying in row-major order (first parent slowest).
With ``unit: percent`` each row must sum to 100 and is divided by its sum;
with ``unit: probability`` (the default) rows must sum to 1. Without a unit,
rows summing to 100 are read as percentages.

Evidence grammar, one entry per finding, ``;`` separators optional::

    Alarm = Y
    Seismometer in {state0, state1}
    Alarm mask (0, 1) as "watson"
"""

import json
import math
import re
from dataclasses import dataclass, field

from .errors import (
    BadCptShape,
    BadMaskLength,
    BadRowSum,
    DuplicateDeclaration,
    InvalidVariable,
    NetSyntaxError,
    UnknownState,
    UnknownVariable,
)
from .model import build_network
from .potential import Variable

PERCENT_TOL = 1e-6
PROB_TOL = 1e-9

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+) |
    (?P<nl>\n) |
    (?P<comment>\#[^\n]*) |
    (?P<string>"[^"\n]*") |
    (?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?(?![A-Za-z_])) |
    (?P<ident>[A-Za-z0-9_][A-Za-z0-9_.\-]*) |
    (?P<punct>[{}(),;:|=])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text):
    tokens = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise NetSyntaxError(
                f"unexpected character {text[pos]!r}", line=line, column=pos - start + 1
            )
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, m.start() - start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - start + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def fail(self, message, tok=None, cls=NetSyntaxError):
        tok = tok or self.tok
        return cls(message, line=tok.line, column=tok.column)

    def next(self):
        tok = self.tok
        self.i += 1
        return tok

    def at(self, text):
        return self.tok.kind in ("punct", "ident") and self.tok.text == text

    def expect(self, text):
        if not self.at(text):
            shown = self.tok.text or "end of input"
            raise self.fail(f"expected {text!r}, found {shown!r}")
        return self.next()

    def accept(self, text):
        if self.at(text):
            return self.next()
        return None

    def name(self, what="name"):
        tok = self.tok
        if tok.kind not in ("ident", "number"):
            raise self.fail(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.next()

    def number(self):
        tok = self.tok
        if tok.kind != "number":
            raise self.fail(f"expected a number, found {tok.text or 'end of input'!r}")
        self.next()
        return float(tok.text), tok

    def label(self):
        tok = self.tok
        if tok.kind == "string":
            self.next()
            return tok.text[1:-1]
        return self.name("label").text


# -- network documents ---------------------------------------------------------


@dataclass(frozen=True)
class VarDecl:
    name: str
    states: tuple
    line: int = field(default=None, compare=False)
    column: int = field(default=None, compare=False)


@dataclass(frozen=True)
class CptDecl:
    child: str
    parents: tuple
    rows: tuple
    unit: str = None
    line: int = field(default=None, compare=False)
    column: int = field(default=None, compare=False)

    def probabilities(self):
        """Rows converted to probabilities (percent rows divided by their sum)."""
        out = []
        for row in self.rows:
            s = sum(row)
            if self.unit == "percent" or (self.unit is None and abs(s - 100) <= PERCENT_TOL):
                out.append(tuple(x / s for x in row))
            else:
                out.append(tuple(row))
        return tuple(out)


@dataclass(frozen=True)
class NetworkDocument:
    version: int
    variables: tuple
    cpts: tuple

    def variable(self, name):
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownVariable(f"unknown variable {name!r}")

    def to_network(self):
        variables = [Variable(v.name, v.states) for v in self.variables]
        parents = {c.child: list(c.parents) for c in self.cpts}
        tables = {c.child: [x for row in c.probabilities() for x in row] for c in self.cpts}
        return build_network(variables, parents, tables)


def parse_network(text):
    """Parse ``.net`` text into a structurally validated :class:`NetworkDocument`.

    Every diagnostic carries the line and column of the offending token.
    """
    p = _Parser(text)
    version = 1
    if p.accept("netformat"):
        value, tok = p.number()
        if value != int(value) or value < 1:
            raise p.fail(f"bad format version {tok.text!r}", tok)
        version = int(value)
        p.accept(";")

    variables, cpts = {}, {}
    while p.tok.kind != "eof":
        if p.accept(";"):
            continue
        kw = p.tok
        if p.accept("var"):
            decl = _parse_var(p, kw)
            if decl.name in variables:
                raise p.fail(f"variable {decl.name!r} declared twice", kw, DuplicateDeclaration)
            variables[decl.name] = decl
        elif p.accept("cpt"):
            decl = _parse_cpt(p, kw)
            if decl.child in cpts:
                raise p.fail(f"table for {decl.child!r} declared twice", kw, DuplicateDeclaration)
            cpts[decl.child] = decl
        else:
            raise p.fail(f"expected 'var' or 'cpt', found {kw.text!r}")

    for decl in cpts.values():
        _check_cpt(decl, variables)
    for name, decl in variables.items():
        if name not in cpts:
            raise BadCptShape(f"no table for {name!r}", line=decl.line, column=decl.column)
    ordered = tuple(cpts[n] for n in variables)
    return NetworkDocument(version, tuple(variables.values()), ordered)


def _parse_var(p, kw):
    name = p.name("variable name")
    p.expect("{")
    p.expect("states")
    p.expect(":")
    states = [p.name("state name")]
    while p.accept(","):
        states.append(p.name("state name"))
    p.accept(";")
    p.expect("}")
    texts = [s.text for s in states]
    for k, s in enumerate(states):
        if s.text in texts[:k]:
            raise p.fail(f"state {s.text!r} listed twice", s, DuplicateDeclaration)
    if len(states) < 2:
        raise p.fail(f"variable {name.text!r} needs at least 2 states", name, InvalidVariable)
    return VarDecl(name.text, tuple(texts), kw.line, kw.column)


def _parse_cpt(p, kw):
    child = p.name("variable name")
    parents = []
    if p.accept("|"):
        parents.append(p.name("parent name"))
        while p.accept(","):
            parents.append(p.name("parent name"))
    p.expect("{")
    unit = None
    rows = None
    row_tokens = []
    while not p.at("}"):
        key = p.tok
        if p.accept("unit"):
            p.expect(":")
            u = p.name("unit")
            if u.text not in ("percent", "probability"):
                raise p.fail(f"unit must be 'percent' or 'probability', got {u.text!r}", u)
            unit = u.text
        elif p.accept("rows"):
            p.expect(":")
            rows = []
            while p.at("("):
                row_tokens.append(p.next())
                row = [p.number()[0]]
                while p.accept(","):
                    row.append(p.number()[0])
                p.expect(")")
                rows.append(tuple(row))
            if not rows:
                raise p.fail("expected at least one '(' row")
        else:
            raise p.fail(f"expected 'unit' or 'rows', found {key.text or 'end of input'!r}")
        if not p.accept(";") and not p.at("}"):
            raise p.fail(f"expected ';' or '}}', found {p.tok.text or 'end of input'!r}")
    p.expect("}")
    if rows is None:
        raise p.fail(f"table for {child.text!r} has no rows", kw)
    names = [t.text for t in parents]
    for k, t in enumerate(parents):
        if t.text in names[:k] or t.text == child.text:
            raise p.fail(f"parent {t.text!r} repeated", t, DuplicateDeclaration)
    decl = CptDecl(child.text, tuple(names), tuple(rows), unit, kw.line, kw.column)
    object.__setattr__(decl, "_tokens", (child, parents, row_tokens))
    return decl


def _check_cpt(decl, variables):
    child_tok, parent_toks, row_toks = decl._tokens
    for tok in [child_tok, *parent_toks]:
        if tok.text not in variables:
            raise UnknownVariable(
                f"unknown variable {tok.text!r}", line=tok.line, column=tok.column
            )
    card = len(variables[decl.child].states)
    expected = 1
    for name in decl.parents:
        expected *= len(variables[name].states)
    if len(decl.rows) != expected:
        raise BadCptShape(
            f"table for {decl.child!r} has {len(decl.rows)} rows, expected {expected}",
            line=decl.line,
            column=decl.column,
        )
    for k, (row, tok) in enumerate(zip(decl.rows, row_toks)):
        if len(row) != card:
            raise BadCptShape(
                f"row {k} of {decl.child!r} has {len(row)} entries, expected {card}",
                line=tok.line,
                column=tok.column,
            )
        if any(x < 0 for x in row):
            raise BadRowSum(
                f"row {k} of {decl.child!r} has a negative entry", line=tok.line, column=tok.column
            )
        s = sum(row)
        is_pct = abs(s - 100) <= PERCENT_TOL
        is_prob = abs(s - 1) <= PROB_TOL
        ok = {"percent": is_pct, "probability": is_prob, None: is_pct or is_prob}[decl.unit]
        if not ok:
            want = {"percent": "100", "probability": "1", None: "1 or 100"}[decl.unit]
            raise BadRowSum(
                f"row {k} of {decl.child!r} sums to {s!r}, expected {want}",
                line=tok.line,
                column=tok.column,
            )


def _num(x):
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def serialize_network(doc):
    lines = [f"netformat {doc.version}", ""]
    for v in doc.variables:
        lines.append(f"var {v.name} {{ states: {', '.join(v.states)} }}")
    for c in doc.cpts:
        lines.append("")
        head = f"cpt {c.child}"
        if c.parents:
            head += f" | {', '.join(c.parents)}"
        lines.append(head + " {")
        if c.unit:
            lines.append(f"    unit: {c.unit};")
        rows = ["(" + ", ".join(_num(x) for x in row) + ")" for row in c.rows]
        lines.append("    rows: " + "\n          ".join(rows) + ";")
        lines.append("}")
    return "\n".join(lines) + "\n"


def network_to_document(network):
    """Document for an in-memory network, probabilities written at full precision."""
    variables = tuple(VarDecl(v.name, v.states) for v in network.variables)
    cpts = []
    for name in network.names:
        rows = tuple(tuple(float(x) for x in row) for row in network.cpt_rows(name))
        cpts.append(CptDecl(name, tuple(network.parents[name]), rows, "probability"))
    return NetworkDocument(1, variables, tuple(cpts))


def load_network(path):
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read()).to_network()


# -- evidence documents --------------------------------------------------------


@dataclass(frozen=True)
class EvidenceEntry:
    """One finding as written: ``form`` is ``"state"``, ``"set"`` or ``"mask"``."""

    variable: str
    form: str
    value: tuple
    label: str = None
    line: int = field(default=None, compare=False)
    column: int = field(default=None, compare=False)

    def mask(self, variable):
        if self.form == "mask":
            return tuple(self.value)
        return tuple(int(s in self.value) for s in variable.states)


@dataclass(frozen=True)
class EvidenceDocument:
    entries: tuple

    def findings(self, network):
        from .propagate import Finding

        out = []
        for e in self.entries:
            var = network[e.variable]
            out.append(Finding(var, e.mask(var), e.label or ""))
        return out


def parse_evidence(text, network=None):
    """Parse ``.ev`` text; with ``network`` given, names, states and mask lengths are checked."""
    p = _Parser(text)
    entries = []
    while p.tok.kind != "eof":
        if p.accept(";"):
            continue
        var_tok = p.name("variable name")
        if p.accept("="):
            st = p.name("state name")
            entry = ("state", (st.text,), [st])
        elif p.accept("in"):
            p.expect("{")
            toks = [p.name("state name")]
            while p.accept(","):
                toks.append(p.name("state name"))
            p.expect("}")
            entry = ("set", tuple(t.text for t in toks), toks)
        elif p.accept("mask"):
            open_tok = p.expect("(")
            bits = []
            while True:
                value, tok = p.number()
                if value not in (0, 1):
                    raise p.fail(f"mask entries must be 0 or 1, got {tok.text!r}", tok)
                bits.append(int(value))
                if not p.accept(","):
                    break
            p.expect(")")
            entry = ("mask", tuple(bits), [open_tok])
        else:
            raise p.fail(f"expected '=', 'in' or 'mask', found {p.tok.text or 'end of input'!r}")
        label = p.label() if p.accept("as") else None
        form, value, toks = entry
        if network is not None:
            _check_entry(network, var_tok, form, value, toks)
        entries.append(EvidenceEntry(var_tok.text, form, value, label, var_tok.line, var_tok.column))
    return EvidenceDocument(tuple(entries))


def _check_entry(network, var_tok, form, value, toks):
    if var_tok.text not in network:
        raise UnknownVariable(
            f"unknown variable {var_tok.text!r}", line=var_tok.line, column=var_tok.column
        )
    var = network[var_tok.text]
    if form == "mask":
        if len(value) != var.card:
            raise BadMaskLength(
                f"mask for {var.name!r} has {len(value)} entries, expected {var.card}",
                line=toks[0].line,
                column=toks[0].column,
            )
        if not any(value):
            raise BadMaskLength(
                f"mask for {var.name!r} rules out every state",
                line=toks[0].line,
                column=toks[0].column,
            )
        return
    for tok in toks:
        if tok.text not in var.states:
            raise UnknownState(
                f"{var.name!r} has no state {tok.text!r}", line=tok.line, column=tok.column
            )


def _quote_label(label):
    if re.fullmatch(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*", label):
        return label
    return f'"{label}"'


def serialize_evidence(doc):
    lines = []
    for e in doc.entries:
        if e.form == "state":
            body = f"{e.variable} = {e.value[0]}"
        elif e.form == "set":
            body = f"{e.variable} in {{{', '.join(e.value)}}}"
        else:
            body = f"{e.variable} mask ({', '.join(str(b) for b in e.value)})"
        if e.label is not None:
            body += f" as {_quote_label(e.label)}"
        lines.append(body)
    return "\n".join(lines) + ("\n" if lines else "")


def load_evidence(path, network):
    with open(path, encoding="utf-8") as fh:
        return parse_evidence(fh.read(), network).findings(network)


# -- machine-readable reports --------------------------------------------------


def _plain(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "+inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _plain(obj.tolist())
    return obj


def dump_report(report):
    """JSON text with keys in insertion order and floats at full precision.

    Non-finite floats are written as the strings ``"+inf"``, ``"-inf"``, ``"nan"``.
    """
    return json.dumps(_plain(report), indent=2, ensure_ascii=False) + "\n"
