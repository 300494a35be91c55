"""A small expression language for component-wise immersion definitions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-'? power
    power  := atom ('^' factor)?
    atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-u2^2``
is ``-(u2^2)``. Variables are ``u1`` .. ``u9``; constants ``pi`` and ``e``.
"""
import math
import re
from dataclasses import dataclass, field
from typing import Tuple, Union

from . import jets

FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "atan": 1,
    "pow": 2,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

Span = Tuple[int, int]


@dataclass(frozen=True)
class Number:
    value: float
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Variable:
    index: int  # 1-based, as written
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Constant:
    name: str
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Identifier:
    """A bare name that is neither a variable nor a constant (rejected by validate)."""

    name: str
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Node", ...]
    span: Span = field(default=(0, 0), compare=False)


Node = Union[Number, Variable, Constant, Identifier, Neg, BinOp, Call]


class ParseError(ValueError):
    def __init__(self, offset, expected, found):
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(f"at offset {offset} (column {offset + 1}): expected {expected}, found {found}")

    @property
    def column(self):
        return self.offset + 1


_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)
_VARIABLE = re.compile(r"u([1-9])")


@dataclass(frozen=True)
class _Tok:
    kind: str  # number | ident | op | end
    text: str
    start: int
    end: int

    def describe(self):
        return "end of input" if self.kind == "end" else repr(self.text)


def _byte_offset(source, i):
    return len(source[:i].encode("utf-8"))


def tokenize(source):
    toks = []
    pos = 0
    while True:
        ws = len(source) - len(source[pos:].lstrip())
        if ws == len(source):
            toks.append(_Tok("end", "", len(source), len(source)))
            return toks
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ParseError(_byte_offset(source, bad), "a number, name, operator or parenthesis", repr(source[bad]))
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind), m.end(kind)))
        pos = m.end()


class _Parser:
    def __init__(self, source):
        self.source = source
        self.toks = tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def _span(self, start, end):
        return (_byte_offset(self.source, start), _byte_offset(self.source, end))

    def fail(self, expected):
        raise ParseError(_byte_offset(self.source, self.tok.start), expected, self.tok.describe())

    def accept(self, *ops):
        if self.tok.kind == "op" and self.tok.text in ops:
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, op):
        t = self.accept(op)
        if t is None:
            self.fail(repr(op))
        return t

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.fail("an operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while (t := self.accept("+", "-")) is not None:
            rhs = self.term()
            node = BinOp(t.text, node, rhs, (node.span[0], rhs.span[1]))
        return node

    def term(self):
        node = self.factor()
        while (t := self.accept("*", "/")) is not None:
            rhs = self.factor()
            node = BinOp(t.text, node, rhs, (node.span[0], rhs.span[1]))
        return node

    def factor(self):
        t = self.accept("-")
        if t is not None:
            inner = self.power()
            return Neg(inner, (_byte_offset(self.source, t.start), inner.span[1]))
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^") is not None:
            exponent = self.factor()
            return BinOp("^", base, exponent, (base.span[0], exponent.span[1]))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.i += 1
            return Number(float(t.text), self._span(t.start, t.end))
        if t.kind == "ident":
            self.i += 1
            if self.accept("(") is not None:
                args = [self.expr()]
                while self.accept(",") is not None:
                    args.append(self.expr())
                close = self.expect(")")
                return Call(t.text, tuple(args), self._span(t.start, close.end))
            span = self._span(t.start, t.end)
            if (m := _VARIABLE.fullmatch(t.text)) is not None:
                return Variable(int(m.group(1)), span)
            if t.text in CONSTANTS:
                return Constant(t.text, span)
            return Identifier(t.text, span)
        if self.accept("(") is not None:
            node = self.expr()
            self.expect(")")
            return node
        self.fail("a number, name or '('")


def parse(source):
    """Parse DSL text into an AST; raises :class:`ParseError` on the first violation."""
    return _Parser(source).parse()


def _children(node):
    if isinstance(node, Neg):
        return (node.operand,)
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, Call):
        return node.args
    return ()


def walk(node):
    yield node
    for child in _children(node):
        yield from walk(child)


def validate(ast, chart_dim):
    """Return a list of ``(span, message)`` problems; empty means the AST is evaluable."""
    errors = []
    for node in walk(ast):
        if isinstance(node, Variable) and node.index > chart_dim:
            errors.append((node.span, f"u{node.index} exceeds chart dimension {chart_dim}"))
        elif isinstance(node, Identifier):
            if node.name in FUNCTIONS:
                errors.append((node.span, f"function {node.name!r} used without arguments"))
            else:
                errors.append((node.span, f"unknown identifier {node.name!r}"))
        elif isinstance(node, Call):
            arity = FUNCTIONS.get(node.name)
            if arity is None:
                errors.append((node.span, f"unknown function {node.name!r}"))
            elif arity != len(node.args):
                errors.append(
                    (node.span, f"{node.name} takes {arity} argument(s), got {len(node.args)}")
                )
    return errors


def _pow(x, y):
    if isinstance(x, jets.JET_TYPES) or isinstance(y, jets.JET_TYPES):
        return x**y
    return math.pow(x, y)


_CALLS = {
    "sin": jets.sin,
    "cos": jets.cos,
    "tan": jets.tan,
    "exp": jets.exp,
    "log": jets.log,
    "sqrt": jets.sqrt,
    "atan": jets.atan,
    "pow": _pow,
}


def evaluate(ast, variables):
    """Evaluate over floats or jets; ``variables[k]`` is the value of ``u{k+1}``."""
    if isinstance(ast, Number):
        return ast.value
    if isinstance(ast, Variable):
        return variables[ast.index - 1]
    if isinstance(ast, Constant):
        return CONSTANTS[ast.name]
    try:
        if isinstance(ast, Neg):
            return -evaluate(ast.operand, variables)
        if isinstance(ast, BinOp):
            a = evaluate(ast.left, variables)
            b = evaluate(ast.right, variables)
            if ast.op == "+":
                return a + b
            if ast.op == "-":
                return a - b
            if ast.op == "*":
                return a * b
            if ast.op == "/":
                return a / b
            return _pow(a, b)
        if isinstance(ast, Call):
            args = [evaluate(a, variables) for a in ast.args]
            return _CALLS[ast.name](*args)
    except jets.EvaluationError as exc:
        if exc.expr is not None:
            raise
        raise jets.EvaluationError(str(exc), pretty(ast)) from None
    except (*jets.JetDomainError, ZeroDivisionError, ValueError, OverflowError) as exc:
        raise jets.EvaluationError(str(exc), pretty(ast)) from None
    raise TypeError(f"cannot evaluate {ast!r}")


def eval_jet(ast, point):
    """Order-2 jet of the expression at a chart point."""
    return jets.jet_lift(lambda u: evaluate(ast, u), point)


def pretty(ast):
    """Fully parenthesized source that parses back to the same AST."""
    if isinstance(ast, Number):
        return repr(ast.value)
    if isinstance(ast, Variable):
        return f"u{ast.index}"
    if isinstance(ast, (Constant, Identifier)):
        return ast.name
    if isinstance(ast, Neg):
        return f"(-{pretty(ast.operand)})"
    if isinstance(ast, BinOp):
        return f"({pretty(ast.left)} {ast.op} {pretty(ast.right)})"
    return f"{ast.name}({', '.join(pretty(a) for a in ast.args)})"


def compile_components(sources, chart_dim):
    """Parse and validate DSL component strings; returns the list of ASTs.

    Raises ``ValueError`` listing every problem found.
    """
    asts, problems = [], []
    for k, src in enumerate(sources):
        try:
            ast = parse(src)
        except ParseError as exc:
            problems.append(f"component {k}: {exc}")
            continue
        for span, msg in validate(ast, chart_dim):
            problems.append(f"component {k} at {span}: {msg}")
        asts.append(ast)
    if problems:
        raise ValueError("; ".join(problems))
    return asts
