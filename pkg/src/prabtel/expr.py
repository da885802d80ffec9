"""Scalar expression language for problem data functions.

The data functions phi(t), psi(x), M(t) and the smooth forcing factor are
supplied as text expressions in the variables ``t`` and ``x``. This module
parses them with a recursive-descent parser, evaluates them on floats or
numpy arrays, and differentiates them symbolically (the Caputo-Prabhakar
derivative needs y').

Grammar (public contract, also documented in the CLI help)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | atom ('^' factor)?
    atom   := number | 't' | 'x' | 'pi' | 'e' | ident '(' args ')' | '(' expr ')'

'^' is right-associative and binds tighter than unary minus, so ``-t^2``
means ``-(t^2)``. There is no implicit multiplication: ``2t`` is a parse
error. Functions: exp, ln, sin, cos, sqrt, abs (one argument) and
pow (two arguments).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalError, NonDifferentiable, ParseError

__all__ = [
    "Num",
    "Var",
    "Neg",
    "Bin",
    "Call",
    "ExprAst",
    "ExprFunction",
    "parse",
    "evaluate",
    "differentiate",
    "render",
    "simplify",
]

_FUNCTION_ARITY = {
    "exp": 1,
    "ln": 1,
    "sin": 1,
    "cos": 1,
    "sqrt": 1,
    "abs": 1,
    "pow": 2,
}

_CONSTANTS = {"pi": np.pi, "e": np.e}


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = 0


@dataclass(frozen=True)
class Var:
    name: str  # 't' or 'x'
    pos: int = 0


@dataclass(frozen=True)
class Neg:
    child: "ExprAst"
    pos: int = 0


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    left: "ExprAst"
    right: "ExprAst"
    pos: int = 0


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple
    pos: int = 0


ExprAst = Union[Num, Var, Neg, Bin, Call]


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # 'num', 'ident', 'op', 'end'
    text: str
    pos: int


def _tokenize(text: str) -> list:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            # exponent part: 1e-3, 2.5E+10
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            tokens.append(_Token("num", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], i))
            i = j
            continue
        if c in "+-*/^(),":
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        raise ParseError(i, f"a valid token, found {c!r}")
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            return self.advance()
        raise ParseError(tok.pos, f"{op!r}")

    def parse(self) -> ExprAst:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(tok.pos, "end of input")
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.advance()
                rhs = self.term()
                node = Bin(tok.text, node, rhs, tok.pos)
            else:
                return node

    def term(self) -> ExprAst:
        node = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.advance()
                rhs = self.factor()
                node = Bin(tok.text, node, rhs, tok.pos)
            else:
                return node

    def factor(self) -> ExprAst:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.factor(), tok.pos)
        node = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            rhs = self.factor()  # right-associative
            node = Bin("^", node, rhs, tok.pos)
        return node

    def atom(self) -> ExprAst:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text), tok.pos)
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                if name not in _FUNCTION_ARITY:
                    raise ParseError(tok.pos, f"a known function, found {name!r}")
                self.advance()
                args = [self.expr()]
                while self.peek().kind == "op" and self.peek().text == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect_op(")")
                arity = _FUNCTION_ARITY[name]
                if len(args) != arity:
                    raise ParseError(
                        tok.pos, f"{arity} argument(s) for {name}, found {len(args)}"
                    )
                return Call(name, tuple(args), tok.pos)
            if name in ("t", "x"):
                return Var(name, tok.pos)
            if name in _CONSTANTS:
                return Num(float(_CONSTANTS[name]), tok.pos)
            raise ParseError(tok.pos, f"'t', 'x', a constant or a function, found {name!r}")
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(tok.pos, "a number, variable, function or '('")


def parse(text: str) -> ExprAst:
    """Parse expression text into an immutable AST.

    Raises ParseError (carrying the byte offset and an expectation message)
    on malformed input.
    """
    if not text or not text.strip():
        raise ParseError(0, "a non-empty expression")
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _apply(fn, pos: int, what: str, *args):
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            out = fn(*args)
    except FloatingPointError as exc:
        raise EvalError(f"{what} at offset {pos}: {exc}") from None
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise EvalError(f"{what} at offset {pos}: {exc}") from None
    return out


def evaluate(ast: ExprAst, t=0.0, x=0.0):
    """Evaluate an AST at scalar or numpy-array arguments.

    Scalars in, float out; arrays in, array out (broadcasting applies).
    Domain faults (division by zero, ln of a non-positive number, fractional
    power of a negative base) raise EvalError naming the offending offset.
    """
    scalar = np.isscalar(t) and np.isscalar(x)
    result = _eval_node(ast, np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    if scalar:
        return float(result)
    return result


def _eval_node(ast: ExprAst, t, x):
    if isinstance(ast, Num):
        return np.float64(ast.value)
    if isinstance(ast, Var):
        return t if ast.name == "t" else x
    if isinstance(ast, Neg):
        return -_eval_node(ast.child, t, x)
    if isinstance(ast, Bin):
        lhs = _eval_node(ast.left, t, x)
        rhs = _eval_node(ast.right, t, x)
        if ast.op == "+":
            return _apply(np.add, ast.pos, "addition", lhs, rhs)
        if ast.op == "-":
            return _apply(np.subtract, ast.pos, "subtraction", lhs, rhs)
        if ast.op == "*":
            return _apply(np.multiply, ast.pos, "multiplication", lhs, rhs)
        if ast.op == "/":
            return _apply(np.divide, ast.pos, "division", lhs, rhs)
        if ast.op == "^":
            return _apply(np.power, ast.pos, "power", lhs, rhs)
        raise EvalError(f"unknown operator {ast.op!r}")
    if isinstance(ast, Call):
        vals = [_eval_node(a, t, x) for a in ast.args]
        if ast.fn == "exp":
            return _apply(np.exp, ast.pos, "exp", vals[0])
        if ast.fn == "ln":
            return _apply(np.log, ast.pos, "ln", vals[0])
        if ast.fn == "sin":
            return _apply(np.sin, ast.pos, "sin", vals[0])
        if ast.fn == "cos":
            return _apply(np.cos, ast.pos, "cos", vals[0])
        if ast.fn == "sqrt":
            return _apply(np.sqrt, ast.pos, "sqrt", vals[0])
        if ast.fn == "abs":
            return _apply(np.abs, ast.pos, "abs", vals[0])
        if ast.fn == "pow":
            return _apply(np.power, ast.pos, "pow", vals[0], vals[1])
        raise EvalError(f"unknown function {ast.fn!r}")
    raise EvalError(f"unknown node {ast!r}")


# ---------------------------------------------------------------------------
# Simplification and differentiation
# ---------------------------------------------------------------------------

def _is_num(ast: ExprAst, value=None) -> bool:
    if not isinstance(ast, Num):
        return False
    return value is None or ast.value == value


def simplify(ast: ExprAst) -> ExprAst:
    """Light structural simplification: constant folding plus the unit and
    absorbing-element identities (0*e -> 0, 1*e -> e, e+0 -> e, e^1 -> e)."""
    if isinstance(ast, (Num, Var)):
        return ast
    if isinstance(ast, Neg):
        child = simplify(ast.child)
        if isinstance(child, Num):
            return Num(-child.value, ast.pos)
        if isinstance(child, Neg):
            return child.child
        return Neg(child, ast.pos)
    if isinstance(ast, Bin):
        left = simplify(ast.left)
        right = simplify(ast.right)
        op = ast.op
        if isinstance(left, Num) and isinstance(right, Num):
            try:
                folded = evaluate(Bin(op, left, right, ast.pos))
            except EvalError:
                return Bin(op, left, right, ast.pos)
            return Num(folded, ast.pos)
        if op == "+":
            if _is_num(left, 0.0):
                return right
            if _is_num(right, 0.0):
                return left
        elif op == "-":
            if _is_num(right, 0.0):
                return left
            if _is_num(left, 0.0):
                return simplify(Neg(right, ast.pos))
        elif op == "*":
            if _is_num(left, 0.0) or _is_num(right, 0.0):
                return Num(0.0, ast.pos)
            if _is_num(left, 1.0):
                return right
            if _is_num(right, 1.0):
                return left
        elif op == "/":
            if _is_num(left, 0.0) and not _is_num(right, 0.0):
                return Num(0.0, ast.pos)
            if _is_num(right, 1.0):
                return left
        elif op == "^":
            if _is_num(right, 1.0):
                return left
            if _is_num(right, 0.0):
                return Num(1.0, ast.pos)
        return Bin(op, left, right, ast.pos)
    if isinstance(ast, Call):
        return Call(ast.fn, tuple(simplify(a) for a in ast.args), ast.pos)
    return ast


def differentiate(ast: ExprAst, var: str) -> ExprAst:
    """Symbolic derivative with respect to 't' or 'x', lightly simplified.

    abs is rejected with NonDifferentiable (it has no derivative at 0).
    """
    if var not in ("t", "x"):
        raise ValueError(f"differentiation variable must be 't' or 'x', got {var!r}")
    return simplify(_diff(ast, var))


def _diff(ast: ExprAst, var: str) -> ExprAst:
    if isinstance(ast, Num):
        return Num(0.0, ast.pos)
    if isinstance(ast, Var):
        return Num(1.0 if ast.name == var else 0.0, ast.pos)
    if isinstance(ast, Neg):
        return Neg(_diff(ast.child, var), ast.pos)
    if isinstance(ast, Bin):
        u, v = ast.left, ast.right
        du, dv = _diff(u, var), _diff(v, var)
        p = ast.pos
        if ast.op in ("+", "-"):
            return Bin(ast.op, du, dv, p)
        if ast.op == "*":
            return Bin("+", Bin("*", du, v, p), Bin("*", u, dv, p), p)
        if ast.op == "/":
            num = Bin("-", Bin("*", du, v, p), Bin("*", u, dv, p), p)
            return Bin("/", num, Bin("^", v, Num(2.0, p), p), p)
        if ast.op == "^":
            return _diff_power(u, v, du, dv, p)
        raise NonDifferentiable(f"operator {ast.op!r}")
    if isinstance(ast, Call):
        p = ast.pos
        if ast.fn == "pow":
            u, v = ast.args
            return _diff_power(u, v, _diff(u, var), _diff(v, var), p)
        (u,) = ast.args
        du = _diff(u, var)
        if ast.fn == "exp":
            outer = Call("exp", (u,), p)
        elif ast.fn == "ln":
            return Bin("/", du, u, p)
        elif ast.fn == "sin":
            outer = Call("cos", (u,), p)
        elif ast.fn == "cos":
            outer = Neg(Call("sin", (u,), p), p)
        elif ast.fn == "sqrt":
            return Bin("/", du, Bin("*", Num(2.0, p), Call("sqrt", (u,), p), p), p)
        elif ast.fn == "abs":
            raise NonDifferentiable("abs is not differentiable at 0")
        else:
            raise NonDifferentiable(f"function {ast.fn!r}")
        return Bin("*", outer, du, p)
    raise NonDifferentiable(f"node {ast!r}")


def _diff_power(u: ExprAst, v: ExprAst, du: ExprAst, dv: ExprAst, p: int) -> ExprAst:
    if isinstance(v, Num):
        # d(u^c) = c * u^(c-1) * u'
        return Bin(
            "*",
            Bin("*", Num(v.value, p), Bin("^", u, Num(v.value - 1.0, p), p), p),
            du,
            p,
        )
    if isinstance(u, Num):
        # d(a^v) = a^v * ln(a) * v'
        return Bin(
            "*",
            Bin("*", Bin("^", u, v, p), Call("ln", (u,), p), p),
            dv,
            p,
        )
    # general: u^v * (v' ln u + v u'/u)
    tail = Bin(
        "+",
        Bin("*", dv, Call("ln", (u,), p), p),
        Bin("*", v, Bin("/", du, u, p), p),
        p,
    )
    return Bin("*", Bin("^", u, v, p), tail, p)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

# precedence levels for parenthesization
_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _prec(ast: ExprAst) -> int:
    if isinstance(ast, (Num, Var, Call)):
        if isinstance(ast, Num) and ast.value < 0:
            return _PREC_NEG
        return _PREC_ATOM
    if isinstance(ast, Neg):
        return _PREC_NEG
    if isinstance(ast, Bin):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[ast.op]
    raise ValueError(f"unknown node {ast!r}")


def _wrap(child: ExprAst, min_prec: int) -> str:
    text = render(child)
    if _prec(child) < min_prec:
        return f"({text})"
    return text


def render(ast: ExprAst) -> str:
    """Render an AST back to canonical expression text.

    parse(render(ast)) evaluates identically to ast.
    """
    if isinstance(ast, Num):
        return repr(ast.value)
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Neg):
        return "-" + _wrap(ast.child, _PREC_NEG)
    if isinstance(ast, Bin):
        if ast.op in ("+", "-"):
            # right side of '-' needs strictly higher precedence
            left = _wrap(ast.left, _PREC_ADD)
            right = _wrap(ast.right, _PREC_ADD + (1 if ast.op == "-" else 0))
            return f"{left} {ast.op} {right}"
        if ast.op in ("*", "/"):
            left = _wrap(ast.left, _PREC_MUL)
            right = _wrap(ast.right, _PREC_MUL + (1 if ast.op == "/" else 0))
            return f"{left}{ast.op}{right}"
        # '^' is right-associative and binds tighter than unary minus
        left = _wrap(ast.left, _PREC_POW + 1)
        right = _wrap(ast.right, _PREC_POW)
        return f"{left}^{right}"
    if isinstance(ast, Call):
        args = ", ".join(render(a) for a in ast.args)
        return f"{ast.fn}({args})"
    raise ValueError(f"unknown node {ast!r}")


# ---------------------------------------------------------------------------
# Callable wrapper
# ---------------------------------------------------------------------------

class ExprFunction:
    """Callable wrapper around a parsed expression.

    Instances evaluate on floats or arrays via ``fn(t=..., x=...)``, report
    whether they are structurally zero, and expose symbolic derivatives as
    new ExprFunction objects.
    """

    def __init__(self, source, ast: ExprAst = None):
        if ast is None:
            ast = parse(source)
        self.source = source if isinstance(source, str) else render(ast)
        self.ast = simplify(ast)

    @classmethod
    def from_ast(cls, ast: ExprAst) -> "ExprFunction":
        return cls(render(ast), ast)

    def __call__(self, t=0.0, x=0.0):
        return evaluate(self.ast, t=t, x=x)

    def derivative(self, var: str) -> "ExprFunction":
        return ExprFunction.from_ast(differentiate(self.ast, var))

    @property
    def is_zero(self) -> bool:
        return _is_num(self.ast, 0.0)

    def __repr__(self) -> str:
        return f"ExprFunction({self.source!r})"
