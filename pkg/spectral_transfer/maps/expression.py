"""Copyright (C) 2021-2025 Katelynn Cadwallader.

This file is part of Spectral Transfer.

Spectral Transfer is free software; you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation; either version 3, or (at your option)
any later version.

Spectral Transfer is distributed in the hope that it will be useful, but WITHOUT
ANY WARRANTY; without even the implied warranty of MERCHANTABILITY
or FITNESS FOR A PARTICULAR PURPOSE.  See the GNU General Public
License for more details.

You should have received a copy of the GNU General Public License
along with Spectral Transfer; see the file COPYING.  If not, write to the Free
Software Foundation, 51 Franklin Street - Fifth Floor, Boston, MA
02110-1301, USA.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Union

from lark import Lark, Token, Transformer, UnexpectedCharacters, UnexpectedInput, UnexpectedToken

from spectral_transfer._enums import Direction, DomainKind
from spectral_transfer.errors import MapSemanticError, MapSyntaxError

from . import dual

if TYPE_CHECKING:
    from collections.abc import Callable

__all__ = (
    "FUNCTIONS",
    "BinaryOp",
    "BranchSpec",
    "Constant",
    "Expression",
    "Function",
    "LiftSpec",
    "MapDocument",
    "UnaryOp",
    "Variable",
    "parse_document",
    "parse_expression",
)

LOGGER = logging.getLogger(__name__)

GRAMMAR = r"""
start: header (branches | lift | invlift)
observable: expr

header: "domain" DOMAIN_KIND bound bound
DOMAIN_KIND: "periodic" | "interval"

branches: branch+
branch: "branch" "[" expr "," expr "]" "expr" expr deriv?
lift: "lift" expr deriv?
invlift: "invlift" INT expr deriv?
deriv: "deriv" expr

?bound: SIGNED_NUMBER -> number
      | "pi" -> pi
      | "(" expr ")"

?expr: sum
?sum: product
    | sum "+" product -> add
    | sum "-" product -> sub
?product: unary
    | product "*" unary -> mul
    | product "/" unary -> div
?unary: power
    | "-" unary -> neg
    | "+" unary
?power: atom
    | atom "^" unary -> pow
?atom: NUMBER -> number
     | "x" -> var
     | "pi" -> pi
     | FUNC "(" expr ")" -> call
     | "(" expr ")"

FUNC: "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" | "abs" | "acos" | "asin"

%import common.INT
%import common.NUMBER
%import common.SIGNED_NUMBER
%import common.WS
%import common.SH_COMMENT
%ignore WS
%ignore SH_COMMENT
"""

FUNCTIONS: dict[str, Callable[[Any], Any]] = {
    "sin": dual.sin,
    "cos": dual.cos,
    "tan": dual.tan,
    "exp": dual.exp,
    "log": dual.log,
    "sqrt": dual.sqrt,
    "abs": dual.absolute,
    "acos": dual.arccos,
    "asin": dual.arcsin,
}


@dataclass(frozen=True, slots=True)
class Constant:
    value: float


@dataclass(frozen=True, slots=True)
class Variable:
    pass


@dataclass(frozen=True, slots=True)
class UnaryOp:
    op: str
    operand: Node


@dataclass(frozen=True, slots=True)
class BinaryOp:
    op: str
    left: Node
    right: Node


@dataclass(frozen=True, slots=True)
class Function:
    name: str
    argument: Node


Node = Union[Constant, Variable, UnaryOp, BinaryOp, Function]


def _evaluate(tree: Node, x: Any) -> Any:
    match tree:
        case Constant(value):
            return value
        case Variable():
            return x
        case UnaryOp(_, operand):
            return -_evaluate(operand, x)
        case BinaryOp(op, left, right):
            lhs = _evaluate(left, x)
            rhs = _evaluate(right, x)
            match op:
                case "+":
                    return lhs + rhs
                case "-":
                    return lhs - rhs
                case "*":
                    return lhs * rhs
                case "/":
                    return lhs / rhs
                case _:
                    return lhs**rhs
        case Function(name, argument):
            return FUNCTIONS[name](_evaluate(argument, x))


def _walk(tree: Node) -> list[Node]:
    match tree:
        case UnaryOp(_, operand) | Function(_, operand):
            return [tree, *_walk(operand)]
        case BinaryOp(_, left, right):
            return [tree, *_walk(left), *_walk(right)]
        case _:
            return [tree]


@dataclass(frozen=True, slots=True)
class Expression:
    """A compiled expression in the single variable ``x``.

    Calling it evaluates the tree on floats, complex numbers, numpy arrays, dual numbers
    or interval arrays alike.
    """

    tree: Node
    source: str = field(default="", compare=False)

    def __call__(self, x: Any) -> Any:
        return _evaluate(self.tree, x)

    @property
    def depends_on_x(self) -> bool:
        return any(isinstance(node, Variable) for node in _walk(self.tree))

    @property
    def functions(self) -> set[str]:
        return {node.name for node in _walk(self.tree) if isinstance(node, Function)}

    def constant_value(self, what: str) -> float:
        """Evaluate a constant expression such as an interval endpoint.

        Raises
        ------
        MapSemanticError
            The expression refers to ``x``.

        """
        if self.depends_on_x:
            raise MapSemanticError("%s must be a constant expression, got %r", what, self.source)
        return float(self(0.0))


@dataclass(frozen=True, slots=True)
class BranchSpec:
    lo: Expression
    hi: Expression
    expr: Expression
    deriv: Expression | None = None


@dataclass(frozen=True, slots=True)
class LiftSpec:
    expr: Expression
    deriv: Expression | None = None
    direction: Direction = Direction.forward
    beta: int | None = None


@dataclass(frozen=True, slots=True)
class MapDocument:
    """The parsed form of a map-definition document, before any semantic checks."""

    kind: DomainKind
    bounds: tuple[Expression, Expression]
    branches: tuple[BranchSpec, ...] = ()
    lift: LiftSpec | None = None
    source: str = field(default="", compare=False)


class _TreeBuilder(Transformer[Token, Any]):
    def __init__(self, text: str) -> None:
        super().__init__()
        self._text = text

    def number(self, children: list[Token]) -> Constant:
        return Constant(float(children[0]))

    def var(self, _: list[Token]) -> Variable:
        return Variable()

    def pi(self, _: list[Token]) -> Constant:
        return Constant(math.pi)

    def neg(self, children: list[Node]) -> UnaryOp:
        return UnaryOp("-", children[0])

    def add(self, children: list[Node]) -> BinaryOp:
        return BinaryOp("+", children[0], children[1])

    def sub(self, children: list[Node]) -> BinaryOp:
        return BinaryOp("-", children[0], children[1])

    def mul(self, children: list[Node]) -> BinaryOp:
        return BinaryOp("*", children[0], children[1])

    def div(self, children: list[Node]) -> BinaryOp:
        return BinaryOp("/", children[0], children[1])

    def pow(self, children: list[Node]) -> BinaryOp:
        return BinaryOp("^", children[0], children[1])

    def call(self, children: list[Any]) -> Function:
        return Function(str(children[0]), children[1])

    def observable(self, children: list[Node]) -> Expression:
        return Expression(children[0], self._text.strip())

    def deriv(self, children: list[Node]) -> Expression:
        return Expression(children[0], "deriv")

    def branch(self, children: list[Any]) -> BranchSpec:
        lo, hi, expr, *rest = children
        return BranchSpec(Expression(lo, "branch start"), Expression(hi, "branch end"), Expression(expr, "expr"), rest[0] if rest else None)

    def branches(self, children: list[BranchSpec]) -> tuple[BranchSpec, ...]:
        return tuple(children)

    def lift(self, children: list[Any]) -> LiftSpec:
        expr, *rest = children
        return LiftSpec(Expression(expr, "lift"), rest[0] if rest else None)

    def invlift(self, children: list[Any]) -> LiftSpec:
        beta, expr, *rest = children
        return LiftSpec(Expression(expr, "invlift"), rest[0] if rest else None, Direction.inverse, int(beta))

    def header(self, children: list[Any]) -> tuple[DomainKind, tuple[Expression, Expression]]:
        kind, lo, hi = children
        return DomainKind(str(kind)), (Expression(lo, "domain start"), Expression(hi, "domain end"))

    def start(self, children: list[Any]) -> MapDocument:
        (kind, bounds), body = children
        if isinstance(body, LiftSpec):
            return MapDocument(kind, bounds, lift=body, source=self._text)
        return MapDocument(kind, bounds, branches=body, source=self._text)


_PARSER = Lark(GRAMMAR, parser="lalr", start=["start", "observable"], maybe_placeholders=False)


def _parse(text: str, start: str) -> Any:
    try:
        tree = _PARSER.parse(text, start=start)
    except UnexpectedToken as e:
        raise MapSyntaxError(e.line, e.column, e.accepts or e.expected) from None
    except UnexpectedCharacters as e:
        raise MapSyntaxError(e.line, e.column, e.allowed or set()) from None
    except UnexpectedInput as e:
        raise MapSyntaxError(e.line, e.column, ["<end of input>"]) from None
    return _TreeBuilder(text).transform(tree)


def parse_document(text: str) -> MapDocument:
    """Parse a map-definition document.

    Parameters
    ----------
    text: :class:`str`
        The document, starting with a ``domain`` header.

    Returns
    -------
    :class:`MapDocument`
        The syntax tree of the document.

    Raises
    ------
    MapSyntaxError
        With the line, column and expected tokens of the first offending token.

    """
    document: MapDocument = _parse(text, "start")
    LOGGER.debug(
        "<%s> | Parsed map document | kind: %s | branches: %s | lift: %s",
        "parse_document",
        document.kind,
        len(document.branches),
        document.lift is not None,
    )
    return document


def parse_expression(text: str) -> Expression:
    """Parse a single expression in ``x``, as used for observables."""
    return _parse(text, "observable")
