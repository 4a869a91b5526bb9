"""
Small arithmetic expressions over point coordinates.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Names are x (same as x0), x0..x9 and s. Evaluation is vectorized with numpy.
"""

import re
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Dict, List, Tuple, Union

import numpy as np

from chainlab.core.errors import InvalidParameter

FUNCTIONS: Dict[str, Callable] = {
    "abs": np.abs,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "min": lambda *a: reduce(np.minimum, a),
    "max": lambda *a: reduce(np.maximum, a),
}

TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|([A-Za-z_]\w*)|(.))")
VARIABLE = re.compile(r"^(x\d?|s)$")


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Node", ...]


@dataclass(frozen=True)
class Unary:
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Number, Name, Call, Unary, Binary]


def tokenize(text: str) -> List[Tuple[str, str]]:
    tokens = []
    position = 0
    text = text.strip()
    while position < len(text):
        match = TOKEN.match(text, position)
        if match is None or match.end() == position:
            break
        number, name, symbol = match.groups()
        if number is not None:
            tokens.append(("num", number))
        elif name is not None:
            tokens.append(("name", name))
        elif symbol.strip():
            if symbol not in "+-*/^(),":
                raise InvalidParameter(f"Unexpected character {symbol!r} in expression", {"expression": text})
            tokens.append(("op", symbol))
        position = match.end()
    return tokens


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def parse(self) -> Node:
        if not self.tokens:
            raise InvalidParameter("Empty expression")
        node = self.expr()
        if self.pos != len(self.tokens):
            self.fail(f"unexpected {self.tokens[self.pos][1]!r}")
        return node

    def fail(self, message: str):
        raise InvalidParameter(f"Bad expression: {message}", {"expression": self.text})

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, value: str):
        kind, text = self.peek()
        if text != value:
            self.fail(f"expected {value!r}")
        self.pos += 1

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.tokens[self.pos][1]
            self.pos += 1
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.tokens[self.pos][1]
            self.pos += 1
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[1] == "-":
            self.pos += 1
            return Unary(self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        if self.peek()[1] == "^":
            self.pos += 1
            node = Binary("^", node, self.unary())
        return node

    def atom(self) -> Node:
        kind, text = self.peek()
        if kind is None:
            self.fail("unexpected end")
        self.pos += 1
        if kind == "num":
            return Number(float(text))
        if kind == "name":
            if self.peek()[1] == "(":
                if text not in FUNCTIONS:
                    self.fail(f"unknown function {text!r}")
                self.pos += 1
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.pos += 1
                    args.append(self.expr())
                self.take(")")
                return Call(text, tuple(args))
            if not VARIABLE.match(text):
                self.fail(f"unknown variable {text!r}")
            return Name("x0" if text == "x" else text)
        if text == "(":
            node = self.expr()
            self.take(")")
            return node
        self.fail(f"unexpected {text!r}")


def evaluate(node: Node, variables: Dict[str, np.ndarray]):
    if isinstance(node, Number):
        return node.value
    if isinstance(node, Name):
        if node.name not in variables:
            raise InvalidParameter(f"Variable {node.name} is not available here")
        return variables[node.name]
    if isinstance(node, Unary):
        return -evaluate(node.operand, variables)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](*(evaluate(a, variables) for a in node.args))
    left = evaluate(node.left, variables)
    right = evaluate(node.right, variables)
    with np.errstate(divide="ignore", invalid="ignore"):
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            return np.divide(left, right)
        return np.power(left, right)


def compile_expression(text: str) -> Callable[..., np.ndarray]:
    """Parse once; the returned callable takes keyword arrays such as x0=..., s=..."""
    tree = Parser(text).parse()

    def function(**variables) -> np.ndarray:
        sample = next(iter(variables.values()), np.zeros(1))
        value = evaluate(tree, {k: np.asarray(v, dtype=float) for k, v in variables.items()})
        return np.broadcast_to(np.asarray(value, dtype=float), np.shape(sample)).copy()

    return function


def evaluate_on_coords(text: str, coords: np.ndarray) -> np.ndarray:
    """Evaluate over the rows of a coordinate array."""
    function = compile_expression(text)
    coords = np.asarray(coords, dtype=float).reshape(coords.shape[0], -1)
    return function(**{f"x{k}": coords[:, k] for k in range(coords.shape[1])})
