"""Expression language for matrix-valued prepotentials.

Grammar (LL(1)):

    expression := term (("+" | "-") term)*
    term       := factor ("*" factor)*
    factor     := "-" factor | primary ("^" UINT)?
    primary    := NUMBER | "I" | IDENT ("[" arg ("," arg)* "]")? | "(" expression ")" | matrix
    matrix     := "[" row ("," row)* "]"
    row        := "[" expression ("," expression)* "]"
    arg        := UINT | "+" | "-"
    NUMBER     := UINT ("/" UINT)?

Indexed identifiers: x[a,alpha] (spin 1/2), x[a,abc] (spin 3/2, any order of
the digits), u[+,alpha], u[-,alpha], and the analytic coordinates
xplus[a], xminus[a] (spin 1/2) or xppp[a], xppm[a], xpmm[a], xmmm[a]
(spin 3/2). Bare identifiers name declared constant matrices or, if the
variable table has one, a formal parameter.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import yaml

from . import linalg
from .poly import Poly, PolyMatrix
from .scalars import I, as_scalar, from_text


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        self.line, self.col, self.bare = line, col, message
        super().__init__(f"{message} at {line}:{col}")


class ElaborationError(ValueError):
    pass


Pos = Tuple[int, int]


@dataclass(frozen=True)
class Num:
    value: object
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Imag:
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Ident:
    name: str
    args: Optional[Tuple[str, ...]] = None
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Ast"
    right: "Ast"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Ast"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Pow:
    base: "Ast"
    exponent: int
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Matrix:
    rows: Tuple[Tuple["Ast", ...], ...]
    pos: Pos = field(default=(0, 0), compare=False)


Ast = Union[Num, Imag, Ident, BinOp, Neg, Pow, Matrix]

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^(),\[\]]))")


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(source: str) -> List[Token]:
    tokens = []
    line, line_start, i = 1, 0, 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if ch.isspace():
            i += 1
            continue
        if ch == "\u2212":
            tokens.append(Token("op", "-", line, i - line_start + 1))
            i += 1
            continue
        m = _TOKEN.match(source, i)
        if not m or m.lastgroup is None:
            raise ParseError(f"unexpected character {ch!r}", line, i - line_start + 1)
        start = m.start(m.lastgroup)
        text = m.group(m.lastgroup)
        if m.lastgroup == "num" and "/" in text and int(text.split("/")[1]) == 0:
            raise ParseError("zero denominator", line, start - line_start + 1)
        tokens.append(Token(m.lastgroup, text, line, start - line_start + 1))
        i = m.end()
    tokens.append(Token("eof", "", line, n - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, tok: Token):
        if tok.kind == "eof":
            raise ParseError("unexpected end of input", tok.line, tok.col)
        raise ParseError(f"unexpected token {tok.text!r}", tok.line, tok.col)

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text or tok.kind == "eof":
            self.fail(tok)
        return tok

    def parse(self) -> Ast:
        node = self.expression()
        if self.peek().kind != "eof":
            self.fail(self.peek())
        return node

    def expression(self) -> Ast:
        node = self.term()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            tok = self.next()
            node = BinOp(tok.text, node, self.term(), (tok.line, tok.col))
        return node

    def term(self) -> Ast:
        node = self.factor()
        while self.peek().text == "*":
            tok = self.next()
            node = BinOp("*", node, self.factor(), (tok.line, tok.col))
        return node

    def factor(self) -> Ast:
        tok = self.peek()
        if tok.text == "-" and tok.kind == "op":
            self.next()
            return Neg(self.factor(), (tok.line, tok.col))
        node = self.primary()
        if self.peek().text == "^":
            self.next()
            exp = self.next()
            if exp.kind != "num" or "/" in exp.text:
                if exp.kind == "eof":
                    self.fail(exp)
                raise ParseError("exponent must be a nonnegative integer", exp.line, exp.col)
            node = Pow(node, int(exp.text), (tok.line, tok.col))
        return node

    def primary(self) -> Ast:
        tok = self.next()
        pos = (tok.line, tok.col)
        if tok.kind == "num":
            return Num(from_text(tok.text), pos)
        if tok.kind == "ident":
            if tok.text == "I":
                return Imag(pos)
            if self.peek().text == "[":
                self.next()
                args = [self.arg()]
                while self.peek().text == ",":
                    self.next()
                    args.append(self.arg())
                self.expect("]")
                return Ident(tok.text, tuple(args), pos)
            return Ident(tok.text, None, pos)
        if tok.text == "(":
            node = self.expression()
            self.expect(")")
            return node
        if tok.text == "[":
            rows = [self.row()]
            while self.peek().text == ",":
                self.next()
                rows.append(self.row())
            self.expect("]")
            return Matrix(tuple(rows), pos)
        self.fail(tok)

    def row(self) -> Tuple[Ast, ...]:
        self.expect("[")
        items = [self.expression()]
        while self.peek().text == ",":
            self.next()
            items.append(self.expression())
        self.expect("]")
        return tuple(items)

    def arg(self) -> str:
        tok = self.next()
        if (tok.kind == "num" and "/" not in tok.text) or tok.text in ("+", "-"):
            return tok.text
        self.fail(tok)


def parse(source: str) -> Ast:
    return _Parser(source).parse()


_PREC = {"+": 1, "-": 1, "*": 2}


def _prec(node: Ast) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def to_source(node: Ast) -> str:
    """Print an Ast so that parsing the text gives back an equal Ast."""
    if isinstance(node, Num):
        v = as_scalar(node.value)
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(node, Imag):
        return "I"
    if isinstance(node, Ident):
        return node.name if node.args is None else f"{node.name}[{','.join(node.args)}]"
    if isinstance(node, Matrix):
        return "[" + ", ".join("[" + ", ".join(to_source(e) for e in row) + "]" for row in node.rows) + "]"
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        return "-" + (f"({inner})" if _prec(node.operand) < 3 else inner)
    if isinstance(node, Pow):
        inner = to_source(node.base)
        return (f"({inner})" if _prec(node.base) < 5 else inner) + f"^{node.exponent}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left, right = to_source(node.left), to_source(node.right)
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
        sep = "*" if node.op == "*" else f" {node.op} "
        return left + sep + right
    raise TypeError(f"not an Ast node: {node!r}")


SPIN1_COORDS = ("xplus", "xminus")
SPIN3_COORDS = ("xppp", "xppm", "xpmm", "xmmm")


def _err(node: Ast, message: str) -> ElaborationError:
    return ElaborationError(f"{message} at {node.pos[0]}:{node.pos[1]}")


def elaborate(node: Ast, model, matrices: Optional[Dict[str, object]] = None) -> PolyMatrix:
    """Evaluate an Ast to a gauge_rank x gauge_rank PolyMatrix; a scalar result s becomes s * Id."""
    matrices = dict(matrices or {})
    r = model.gauge_rank
    vt = model.vt
    consts = {name: PolyMatrix.constant(vt, linalg.as_matrix(M)) for name, M in matrices.items()}
    for name, M in consts.items():
        if M.size != r:
            raise ElaborationError(f"matrix {name} has shape {M.size}x{M.size}, expected {r}x{r}")

    def scalar_ident(n: Ident) -> Poly:
        if n.args is None:
            if n.name in vt.names and n.name in vt.params:
                return Poly.var(vt, n.name)
            raise _err(n, f"undeclared identifier {n.name!r}")
        args = n.args
        if n.name == "x":
            if len(args) != 2 or not args[0].isdigit() or not args[1].isdigit():
                raise _err(n, "x takes [a, index]")
            a, idx = int(args[0]), args[1]
            if not 1 <= a <= model.rank_E:
                raise _err(n, f"E-index {a} out of range 1..{model.rank_E}")
            want = 1 if model.spin_m == 1 else 3
            if len(idx) != want or any(ch not in "12" for ch in idx):
                raise _err(n, f"x needs a {want}-digit H-index over 1,2 for spin m = {model.spin_m}")
            return model.x(a, tuple(int(ch) for ch in idx))
        if n.name == "u":
            if len(args) != 2 or args[0] not in "+-" or args[1] not in ("1", "2"):
                raise _err(n, "u takes [+|-, 1|2]")
            return model.u(args[0], int(args[1]))
        if n.name in SPIN1_COORDS + SPIN3_COORDS:
            allowed = SPIN1_COORDS if model.spin_m == 1 else SPIN3_COORDS
            if n.name not in allowed:
                raise _err(n, f"{n.name} is not valid for spin m = {model.spin_m}")
            if len(args) != 1 or not args[0].isdigit():
                raise _err(n, f"{n.name} takes [a]")
            a = int(args[0])
            if not 1 <= a <= model.rank_E:
                raise _err(n, f"E-index {a} out of range 1..{model.rank_E}")
            return model.coordinate(n.name, a)
        raise _err(n, f"undeclared identifier {n.name!r}")

    def ev(n: Ast):
        if isinstance(n, Num):
            return Poly.const(vt, n.value)
        if isinstance(n, Imag):
            return Poly.const(vt, I)
        if isinstance(n, Ident):
            if n.args is None and n.name in consts:
                return consts[n.name]
            return scalar_ident(n)
        if isinstance(n, Matrix):
            if len(n.rows) != r or any(len(row) != r for row in n.rows):
                raise _err(n, f"matrix constructor must be {r}x{r}")
            rows = []
            for row in n.rows:
                vals = []
                for e in row:
                    v = ev(e)
                    if isinstance(v, PolyMatrix):
                        raise _err(e, "matrix entries must be scalars")
                    vals.append(v)
                rows.append(vals)
            return PolyMatrix(vt, rows)
        if isinstance(n, Neg):
            return -ev(n.operand)
        if isinstance(n, Pow):
            return ev(n.base) ** n.exponent
        if isinstance(n, BinOp):
            a, b = ev(n.left), ev(n.right)
            if n.op == "*":
                if isinstance(a, PolyMatrix) and isinstance(b, PolyMatrix):
                    return a @ b
                if isinstance(a, PolyMatrix):
                    return a.scale(b)
                if isinstance(b, PolyMatrix):
                    return b.scale(a)
                return a * b
            if isinstance(a, PolyMatrix) != isinstance(b, PolyMatrix):
                raise _err(n, f"cannot {'add' if n.op == '+' else 'subtract'} a scalar and a matrix")
            return a + b if n.op == "+" else a - b
        raise TypeError(f"not an Ast node: {n!r}")

    out = ev(node)
    if isinstance(out, Poly):
        out = PolyMatrix.identity(vt, r).scale(out)
    return out


def elaborate_text(source: str, model, matrices: Optional[Dict[str, object]] = None) -> PolyMatrix:
    return elaborate(parse(source), model, matrices)


# Config files


@dataclass
class GaugeConfig:
    spin: int
    rank_E: int
    gauge_rank: int
    matrices: Dict[str, List[List[object]]]
    prepotential: str
    mode: str
    omega_E: Optional[List[List[object]]] = None
    series_order: Optional[int] = None
    source: Optional[str] = None

    def echo(self) -> Dict[str, object]:
        return {
            "spin": self.spin,
            "rank_E": self.rank_E,
            "gauge_rank": self.gauge_rank,
            "nilpotent_generators": {k: [[str(x) for x in row] for row in M] for k, M in self.matrices.items()},
            "prepotential": self.prepotential,
            "mode": self.mode,
            "series_order": self.series_order,
        }


class ConfigError(ValueError):
    pass


def _matrix(value, name: str) -> List[List[object]]:
    if isinstance(value, str):
        raise ConfigError(f"{name}: matrices are lists of rows")
    try:
        rows = [[from_text(str(x)) if isinstance(x, str) else as_scalar(x) for x in row] for row in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None
    if not rows or any(len(row) != len(rows) for row in rows):
        raise ConfigError(f"{name}: matrix must be square")
    return rows


MODES_BY_SPIN = {1: ("halfflat",), 3: ("0partial", "1partial")}


def config_from_mapping(data: dict, source: Optional[str] = None) -> GaugeConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    required = ("spin", "rank_E", "gauge_rank", "prepotential")
    missing = [k for k in required if k not in data]
    if missing:
        raise ConfigError(f"missing fields: {', '.join(missing)}")
    spin, p, r = data["spin"], data["rank_E"], data["gauge_rank"]
    if spin not in (1, 3):
        raise ConfigError(f"spin must be 1 or 3, got {spin!r}")
    if not isinstance(p, int) or p < 1 or not isinstance(r, int) or r < 1:
        raise ConfigError("rank_E and gauge_rank must be positive integers")
    gens = data.get("nilpotent_generators", {}) or {}
    if isinstance(gens, list):
        gens = {"N": gens[0]} if len(gens) == 1 else {f"N{i}": g for i, g in enumerate(gens, start=1)}
    matrices = {name: _matrix(M, name) for name, M in gens.items()}
    for name, M in matrices.items():
        if len(M) != r:
            raise ConfigError(f"{name}: shape {len(M)}x{len(M)} does not match gauge_rank {r}")
    mode = data.get("mode") or MODES_BY_SPIN[spin][0]
    if mode not in MODES_BY_SPIN[spin]:
        raise ConfigError(f"mode {mode!r} is not available for spin {spin}")
    omega = _matrix(data["omega_E"], "omega_E") if data.get("omega_E") is not None else None
    order = data.get("series_order")
    if order is not None and (not isinstance(order, int) or order < 0):
        raise ConfigError("series_order must be a nonnegative integer")
    return GaugeConfig(spin, p, r, matrices, str(data["prepotential"]), mode, omega, order, source)


def load_config(path) -> GaugeConfig:
    """Read a YAML or JSON prepotential config."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_mapping(data, str(path))


def generates_nilpotent(matrices: Dict[str, List[List[object]]], r: int) -> bool:
    """True if every product of r generators vanishes, so the algebra they generate is nilpotent."""
    gens = list(matrices.values())
    if not gens:
        return True
    for word in product(gens, repeat=r):
        M = linalg.identity(r)
        for g in word:
            M = linalg.matmul(M, g)
        if not linalg.is_zero(M):
            return False
    return True
