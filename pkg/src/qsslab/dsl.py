"""A small text language for defining ODE systems (``.qssm`` files).

Line-oriented syntax; statements may also be separated by ``;``::

    model linear-destruction
    state T = 10
    param a = 1 nonneg
    param y = 1 nonneg
    param gamma = 1 nonneg
    # destruction enters linearly
    dT/dt = a - y*T - gamma*T

Expression grammar (see models/grammar.ebnf): ``^`` is right-associative
and binds tightest, then unary minus, then ``* /``, then ``+ -``; calls
``exp ln sqrt tanh min max``; the symbol ``t`` is reserved for time.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .core import ModelSystem, ParamSpec
from .errors import BindingError, EvaluationError, ParseError, SemanticError

RESERVED_TIME = "t"
FUNCTIONS = {"exp": 1, "ln": 1, "sqrt": 1, "tanh": 1, "min": 2, "max": 2}


@dataclass(frozen=True)
class SourceLocation:
    line: int  # 1-based
    column: int  # 1-based

    def __str__(self):
        return f"line {self.line}, column {self.column}"


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    loc: SourceLocation = field(compare=False, default=SourceLocation(0, 0))


@dataclass(frozen=True)
class Var:
    name: str
    loc: SourceLocation = field(compare=False, default=SourceLocation(0, 0))


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    loc: SourceLocation = field(compare=False, default=SourceLocation(0, 0))


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / ^
    left: "Expr"
    right: "Expr"
    loc: SourceLocation = field(compare=False, default=SourceLocation(0, 0))


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]
    loc: SourceLocation = field(compare=False, default=SourceLocation(0, 0))


Expr = Num | Var | Neg | BinOp | Call


@dataclass(frozen=True)
class StateDecl:
    name: str
    initial: float


@dataclass(frozen=True)
class ParamDecl:
    name: str
    default: float | None
    nonneg: bool


@dataclass(frozen=True)
class ModelDefinition:
    name: str
    states: tuple[StateDecl, ...]
    params: tuple[ParamDecl, ...]
    equations: dict  # state name -> Expr


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<NUMBER>(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<OP>[+\-*/^(),=;])
  | (?P<WS>[ \t]+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER | IDENT | OP | EOL
    text: str
    loc: SourceLocation


def _tokenize_line(text: str, line_no: int) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    comment = text.find("#")
    if comment >= 0:
        text = text[:comment]
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}",
                SourceLocation(line_no, pos + 1),
                expected={"number", "identifier", "operator"},
            )
        kind = m.lastgroup
        if kind != "WS":
            tokens.append(Token(kind, m.group(), SourceLocation(line_no, pos + 1)))
        pos = m.end()
    tokens.append(Token("EOL", "", SourceLocation(line_no, len(text) + 1)))
    return tokens


# ---------------------------------------------------------------------------
# Expression parser (recursive descent)
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOL":
            self.pos += 1
        return tok

    def at_op(self, *symbols: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.text in symbols

    def expect_op(self, symbol: str) -> Token:
        tok = self.peek()
        if tok.kind == "OP" and tok.text == symbol:
            return self.advance()
        raise ParseError(
            f"expected {symbol!r}, found {tok.text or 'end of line'!r}",
            tok.loc, expected={symbol},
        )

    # expr := term (('+'|'-') term)*
    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.at_op("+", "-"):
            op = self.advance()
            right = self.parse_term()
            node = BinOp(op.text, node, right, op.loc)
        return node

    # term := factor (('*'|'/') factor)*
    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.at_op("*", "/"):
            op = self.advance()
            right = self.parse_factor()
            node = BinOp(op.text, node, right, op.loc)
        return node

    # factor := '-' factor | power   (unary minus binds looser than '^')
    def parse_factor(self) -> Expr:
        if self.at_op("-"):
            op = self.advance()
            return Neg(self.parse_factor(), op.loc)
        return self.parse_power()

    # power := atom ['^' factor]    (right-associative; '-x' allowed in exponent)
    def parse_power(self) -> Expr:
        node = self.parse_atom()
        if self.at_op("^"):
            op = self.advance()
            right = self.parse_factor()
            node = BinOp("^", node, right, op.loc)
        return node

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return Num(float(tok.text), tok.loc)
        if tok.kind == "IDENT":
            self.advance()
            if self.at_op("("):
                self.advance()
                args = [self.parse_expr()]
                while self.at_op(","):
                    self.advance()
                    args.append(self.parse_expr())
                self.expect_op(")")
                return Call(tok.text, tuple(args), tok.loc)
            return Var(tok.text, tok.loc)
        if self.at_op("("):
            self.advance()
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ParseError(
            f"expected a value, found {tok.text or 'end of line'!r}",
            tok.loc, expected={"number", "identifier", "("},
        )


def parse_expression(text: str, line_no: int = 1) -> Expr:
    """Parse a standalone expression (used by tests and the evaluator docs)."""
    parser = _Parser(_tokenize_line(text, line_no))
    node = parser.parse_expr()
    tok = parser.peek()
    if tok.kind != "EOL":
        raise ParseError(
            f"unexpected trailing {tok.text!r}", tok.loc, expected={"end of line"}
        )
    return node


# ---------------------------------------------------------------------------
# Model-definition parser
# ---------------------------------------------------------------------------

def parse_model(source: str) -> ModelDefinition:
    """Parse and validate a full model definition.

    Lexical/syntax problems raise ``ParseError`` with a location and the set
    of acceptable tokens; semantic problems are collected and raised together
    as one ``SemanticError`` listing every offense.
    """
    names_seen: list[str] = []
    states: list[StateDecl] = []
    params: list[ParamDecl] = []
    equations: dict[str, Expr] = {}
    semantic: list[str] = []

    for line_no, raw in enumerate(source.splitlines(), start=1):
        tokens = _tokenize_line(raw, line_no)
        parser = _Parser(tokens)
        while parser.peek().kind != "EOL":
            if parser.at_op(";"):
                parser.advance()
                continue
            _parse_statement(parser, names_seen, states, params, equations, semantic)
            tok = parser.peek()
            if tok.kind == "EOL":
                break
            if parser.at_op(";"):
                continue
            raise ParseError(
                f"unexpected {tok.text!r} after statement",
                tok.loc, expected={";", "end of line"},
            )

    model_name = names_seen[0] if names_seen else None
    if len(names_seen) > 1:
        semantic.append("multiple 'model' lines")

    state_names = [s.name for s in states]
    param_names = [p.name for p in params]
    declared = set(state_names) | set(param_names) | {RESERVED_TIME}

    for name, count in _counts(state_names).items():
        if count > 1:
            semantic.append(f"duplicate state declaration for {name}")
    for name, count in _counts(param_names).items():
        if count > 1:
            semantic.append(f"duplicate parameter declaration for {name}")
    for name in set(state_names) & set(param_names):
        semantic.append(f"{name} declared as both state and parameter")
    for name in (set(state_names) | set(param_names)) & {RESERVED_TIME}:
        semantic.append(f"{RESERVED_TIME!r} is reserved for time and cannot be declared")

    for state in states:
        if state.name not in equations:
            semantic.append(f"missing equation for {state.name}")
    for name in equations:
        if name not in state_names:
            semantic.append(f"equation for undeclared state {name}")

    for name, expr in equations.items():
        for issue in _expression_issues(expr, declared):
            semantic.append(issue)

    if semantic:
        raise SemanticError(sorted(set(semantic)))

    return ModelDefinition(
        name=model_name or "unnamed",
        states=tuple(states),
        params=tuple(params),
        equations=dict(equations),
    )


def _parse_statement(parser: _Parser, names_seen, states, params, equations, semantic):
    tok = parser.peek()
    if tok.kind != "IDENT":
        raise ParseError(
            f"expected a directive, found {tok.text or 'end of line'!r}",
            tok.loc, expected={"model", "state", "param", "d<state>/dt"},
        )
    head = tok.text
    if head == "model":
        parser.advance()
        name_tok = parser.peek()
        if name_tok.kind != "IDENT" and not (name_tok.kind == "NUMBER"):
            raise ParseError("expected a model name", name_tok.loc, expected={"identifier"})
        # allow kebab-case names: ident ('-' ident)*
        parts = [parser.advance().text]
        while parser.at_op("-"):
            parser.advance()
            nxt = parser.peek()
            if nxt.kind not in ("IDENT", "NUMBER"):
                raise ParseError("expected a name fragment after '-'",
                                 nxt.loc, expected={"identifier"})
            parts.append(parser.advance().text)
        names_seen.append("-".join(parts))
        return
    if head == "state":
        parser.advance()
        name_tok = parser.peek()
        if name_tok.kind != "IDENT":
            raise ParseError("expected a state name", name_tok.loc, expected={"identifier"})
        parser.advance()
        parser.expect_op("=")
        value = _parse_signed_number(parser)
        states.append(StateDecl(name_tok.text, value))
        return
    if head == "param":
        parser.advance()
        name_tok = parser.peek()
        if name_tok.kind != "IDENT":
            raise ParseError("expected a parameter name", name_tok.loc,
                             expected={"identifier"})
        parser.advance()
        default = None
        if parser.at_op("="):
            parser.advance()
            default = _parse_signed_number(parser)
        nonneg = False
        nxt = parser.peek()
        if nxt.kind == "IDENT" and nxt.text == "nonneg":
            parser.advance()
            nonneg = True
        params.append(ParamDecl(name_tok.text, default, nonneg))
        return
    if head.startswith("d") and len(head) > 1:
        parser.advance()
        parser.expect_op("/")
        dt_tok = parser.peek()
        if not (dt_tok.kind == "IDENT" and dt_tok.text == "dt"):
            raise ParseError("expected 'dt' after '/'", dt_tok.loc, expected={"dt"})
        parser.advance()
        parser.expect_op("=")
        expr = parser.parse_expr()
        state_name = head[1:]
        if state_name in equations:
            semantic.append(f"duplicate equation for {state_name}")
        else:
            equations[state_name] = expr
        return
    raise ParseError(
        f"unknown directive {head!r}", tok.loc,
        expected={"model", "state", "param", "d<state>/dt"},
    )


def _parse_signed_number(parser: _Parser) -> float:
    sign = 1.0
    if parser.at_op("-"):
        parser.advance()
        sign = -1.0
    tok = parser.peek()
    if tok.kind != "NUMBER":
        raise ParseError("expected a number", tok.loc, expected={"number"})
    parser.advance()
    return sign * float(tok.text)


def _counts(names):
    out: dict[str, int] = {}
    for n in names:
        out[n] = out.get(n, 0) + 1
    return out


def _expression_issues(expr: Expr, declared: set[str]):
    if isinstance(expr, Num):
        return
    if isinstance(expr, Var):
        if expr.name not in declared:
            yield f"undeclared identifier {expr.name} at {expr.loc}"
        return
    if isinstance(expr, Neg):
        yield from _expression_issues(expr.operand, declared)
        return
    if isinstance(expr, BinOp):
        yield from _expression_issues(expr.left, declared)
        yield from _expression_issues(expr.right, declared)
        return
    if isinstance(expr, Call):
        if expr.func not in FUNCTIONS:
            yield f"unknown function {expr.func} at {expr.loc}"
        elif len(expr.args) != FUNCTIONS[expr.func]:
            yield (
                f"function {expr.func} takes {FUNCTIONS[expr.func]} argument(s), "
                f"got {len(expr.args)} at {expr.loc}"
            )
        for arg in expr.args:
            yield from _expression_issues(arg, declared)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def eval_expr(expr: Expr, bindings) -> float:
    """Evaluate an expression under IEEE double semantics.

    Unbound identifiers raise ``BindingError``; division by zero and domain
    violations (negative base with fractional exponent, ln/sqrt of a
    negative) raise ``EvaluationError`` carrying the source location.
    """
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return float(bindings[expr.name])
        except KeyError:
            raise BindingError(f"unbound identifier {expr.name!r} at {expr.loc}") from None
    if isinstance(expr, Neg):
        return -eval_expr(expr.operand, bindings)
    if isinstance(expr, BinOp):
        left = eval_expr(expr.left, bindings)
        right = eval_expr(expr.right, bindings)
        op = expr.op
        try:
            if op == "+":
                return left + right
            if op == "-":
                return left - right
            if op == "*":
                return left * right
            if op == "/":
                if right == 0.0:
                    raise EvaluationError(f"division by zero at {expr.loc}", expr.loc)
                return left / right
            if op == "^":
                if left < 0.0 and right != math.floor(right):
                    raise EvaluationError(
                        f"negative base with non-integer exponent at {expr.loc}", expr.loc
                    )
                return left**right
        except OverflowError:
            raise EvaluationError(f"overflow in {op!r} at {expr.loc}", expr.loc) from None
        except ZeroDivisionError:
            raise EvaluationError(f"division by zero at {expr.loc}", expr.loc) from None
        raise EvaluationError(f"unknown operator {op!r} at {expr.loc}", expr.loc)
    if isinstance(expr, Call):
        args = [eval_expr(a, bindings) for a in expr.args]
        try:
            if expr.func == "exp":
                return math.exp(args[0])
            if expr.func == "ln":
                return math.log(args[0])
            if expr.func == "sqrt":
                return math.sqrt(args[0])
            if expr.func == "tanh":
                return math.tanh(args[0])
            if expr.func == "min":
                return min(args)
            if expr.func == "max":
                return max(args)
        except (ValueError, OverflowError) as exc:
            raise EvaluationError(f"{exc} in {expr.func}() at {expr.loc}", expr.loc) from None
        raise EvaluationError(f"unknown function {expr.func!r} at {expr.loc}", expr.loc)
    raise EvaluationError(f"unknown node {expr!r}", None)


def expression_reads_time(expr: Expr) -> bool:
    if isinstance(expr, Var):
        return expr.name == RESERVED_TIME
    if isinstance(expr, Neg):
        return expression_reads_time(expr.operand)
    if isinstance(expr, BinOp):
        return expression_reads_time(expr.left) or expression_reads_time(expr.right)
    if isinstance(expr, Call):
        return any(expression_reads_time(a) for a in expr.args)
    return False


# ---------------------------------------------------------------------------
# Pretty printer (round-trips through parse_expression)
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def format_expr(expr: Expr, parent_prec: int = 0) -> str:
    if isinstance(expr, Num):
        text = repr(expr.value)
        return text
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        inner = format_expr(expr.operand, _PREC["neg"])
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PREC["neg"] else text
    if isinstance(expr, BinOp):
        prec = _PREC[expr.op]
        if expr.op == "^":
            left = format_expr(expr.left, prec + 1)   # parens on nested left
            right = format_expr(expr.right, _PREC["neg"])  # right-assoc, allow unary
        else:
            left = format_expr(expr.left, prec)
            right = format_expr(expr.right, prec + 1)
        text = f"{left} {expr.op} {right}" if prec == 1 else f"{left}{expr.op}{right}"
        return f"({text})" if parent_prec > prec else text
    if isinstance(expr, Call):
        args = ", ".join(format_expr(a, 0) for a in expr.args)
        return f"{expr.func}({args})"
    raise TypeError(f"unknown node {expr!r}")


def format_model(defn: ModelDefinition) -> str:
    lines = [f"model {defn.name}"]
    for state in defn.states:
        lines.append(f"state {state.name} = {state.initial!r}")
    for param in defn.params:
        text = f"param {param.name}"
        if param.default is not None:
            text += f" = {param.default!r}"
        if param.nonneg:
            text += " nonneg"
        lines.append(text)
    for state in defn.states:
        lines.append(f"d{state.name}/dt = {format_expr(defn.equations[state.name])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

def compile_model(defn: ModelDefinition) -> ModelSystem:
    """Turn a validated definition into an executable ``ModelSystem``."""
    state_names = tuple(s.name for s in defn.states)
    exprs = [defn.equations[name] for name in state_names]
    time_dependent = any(expression_reads_time(e) for e in exprs)

    def rhs(t, values, params):
        bindings = {RESERVED_TIME: float(t)}
        for name, value in zip(state_names, values):
            bindings[name] = float(value)
        for key in param_names:
            bindings[key] = float(params[key])
        return np.array([eval_expr(e, bindings) for e in exprs])

    param_names = tuple(p.name for p in defn.params)
    schema = tuple(
        ParamSpec(p.name, 0.0 if p.nonneg else None, False, p.default)
        for p in defn.params
    )
    equation = " ; ".join(
        f"d{name}/dt = {format_expr(defn.equations[name])}" for name in state_names
    )
    return ModelSystem(
        name=defn.name,
        state_names=state_names,
        param_schema=schema,
        rhs=rhs,
        time_dependent=time_dependent,
        equation=equation,
        kind=None,
    )


def default_initial_state(defn: ModelDefinition):
    from .core import StateVector

    return StateVector(tuple(s.name for s in defn.states),
                       [s.initial for s in defn.states])
