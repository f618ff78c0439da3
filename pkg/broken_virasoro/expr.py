# Copyright 2026 pairsys.ai (DBA Goodmem.ai)
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Expression language for field profiles, lifts and base functions.

Expressions are immutable trees over the variables ``x``, ``t`` and
``p1`` ... ``p9``. They are parsed from text, printed back, differentiated
symbolically in any variable and evaluated on floats or numpy arrays.

Grammar::

  expr   := term (('+' | '-') term)*
  term   := unary (('*' | '/') unary)*
  unary  := '-' unary | factor
  factor := base ('^' '-'? int)?
  base   := number | ident | ident '(' expr ')' | '(' expr ')'

Example usage::

  from broken_virasoro.expr import evaluate, parse

  u = parse("sin(2*(x - p1))")
  evaluate(u.derivative("x"), {"x": 0.3, "p1": 0.0})
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from functools import cached_property, singledispatch
from typing import (
    Callable,
    Dict,
    FrozenSet,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Tuple,
    Union,
)

import numpy as np

logger = logging.getLogger(__name__)

Value = Union[float, np.ndarray]
Binding = Mapping[str, Value]
Evaluator = Callable[[Binding], Value]

FUNCTION_NAMES: Tuple[str, ...] = ("sin", "cos", "exp", "log", "atan")
BREAK_VARIABLES: Tuple[str, ...] = tuple(f"p{i}" for i in range(1, 10))
VARIABLES: Tuple[str, ...] = ("x", "t") + BREAK_VARIABLES
CONSTANTS: Dict[str, float] = {"pi": math.pi}

_NUMPY_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "atan": np.arctan,
}


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class ExpressionSyntaxError(ValueError):
  """Raised when text does not conform to the expression grammar."""

  def __init__(self, message: str, text: str, position: int) -> None:
    super().__init__(f"{message} at position {position} in {text!r}")
    self.text = text
    self.position = position


class UnknownIdentifierError(ExpressionSyntaxError):
  """Raised when text names a variable or function outside the grammar."""

  def __init__(self, name: str, text: str, position: int) -> None:
    super().__init__(f"Unknown identifier {name!r}", text, position)
    self.name = name


class UnboundVariableError(ValueError):
  """Raised when evaluation meets a free variable missing from the binding."""

  def __init__(self, name: str) -> None:
    super().__init__(f"Variable {name!r} is not bound")
    self.name = name


class ExpressionDomainError(ValueError):
  """Raised when evaluation leaves the real domain of a subterm."""

  def __init__(self, subterm: "Expression", reason: str) -> None:
    super().__init__(f"{reason} in subterm {unparse(subterm)!r}")
    self.subterm = subterm
    self.reason = reason


# ---------------------------------------------------------------------------
# Expression nodes
# ---------------------------------------------------------------------------


class Expression:
  """Base class of all expression nodes.

  Nodes are immutable and compare structurally. Derivatives, compiled
  evaluators and free-variable sets are cached on the node, so expressions
  that are reused (field profiles, lift pieces) pay for them once.
  """

  precedence = 5

  def _fields(self) -> Tuple[object, ...]:
    raise NotImplementedError

  @cached_property
  def _hash(self) -> int:
    return hash((type(self).__name__,) + self._fields())

  def __hash__(self) -> int:
    return self._hash

  def __eq__(self, other: object) -> bool:
    if self is other:
      return True
    if type(self) is not type(other):
      return False
    assert isinstance(other, Expression)
    return self._hash == other._hash and self._fields() == other._fields()

  def __str__(self) -> str:
    return unparse(self)

  # -- arithmetic for programmatic construction ------------------------------

  def __add__(self, other: "Operand") -> "Expression":
    return add(self, as_expression(other))

  def __radd__(self, other: "Operand") -> "Expression":
    return add(as_expression(other), self)

  def __sub__(self, other: "Operand") -> "Expression":
    return sub(self, as_expression(other))

  def __rsub__(self, other: "Operand") -> "Expression":
    return sub(as_expression(other), self)

  def __mul__(self, other: "Operand") -> "Expression":
    return mul(self, as_expression(other))

  def __rmul__(self, other: "Operand") -> "Expression":
    return mul(as_expression(other), self)

  def __truediv__(self, other: "Operand") -> "Expression":
    return div(self, as_expression(other))

  def __rtruediv__(self, other: "Operand") -> "Expression":
    return div(as_expression(other), self)

  def __neg__(self) -> "Expression":
    return neg(self)

  def __pow__(self, exponent: int) -> "Expression":
    return power(self, exponent)

  # -- cached calculus --------------------------------------------------------

  @cached_property
  def _derivatives(self) -> Dict[str, "Expression"]:
    return {}

  def derivative(self, variable: str, order: int = 1) -> "Expression":
    """Returns the exact derivative of the given order in ``variable``."""
    result = self
    for _ in range(order):
      result = result._first_derivative(variable)
    return result

  def _first_derivative(self, variable: str) -> "Expression":
    cached = self._derivatives.get(variable)
    if cached is None:
      cached = _differentiate(self, variable)
      self._derivatives[variable] = cached
    return cached

  @cached_property
  def compiled(self) -> Evaluator:
    """A closure evaluating this expression against a binding."""
    return _compile(self)

  @cached_property
  def free_variables(self) -> FrozenSet[str]:
    return _free_variables(self)


Operand = Union[Expression, float, int]


@dataclass(frozen=True, eq=False)
class Const(Expression):
  value: float

  def __post_init__(self) -> None:
    value = float(self.value)
    if not math.isfinite(value):
      raise ValueError(f"Constant must be finite, got {self.value!r}")
    object.__setattr__(self, "value", value)

  def _fields(self) -> Tuple[object, ...]:
    return (self.value,)


@dataclass(frozen=True, eq=False)
class Var(Expression):
  name: str

  def __post_init__(self) -> None:
    if self.name not in VARIABLES:
      raise ValueError(
          f"Unknown variable {self.name!r}; expected one of {', '.join(VARIABLES)}"
      )

  def _fields(self) -> Tuple[object, ...]:
    return (self.name,)


@dataclass(frozen=True, eq=False)
class Binary(Expression):
  left: Expression
  right: Expression

  symbol = "?"

  def _fields(self) -> Tuple[object, ...]:
    return (self.left, self.right)


class Add(Binary):
  symbol = "+"
  precedence = 1


class Sub(Binary):
  symbol = "-"
  precedence = 1


class Mul(Binary):
  symbol = "*"
  precedence = 2


class Div(Binary):
  symbol = "/"
  precedence = 2


@dataclass(frozen=True, eq=False)
class Neg(Expression):
  operand: Expression

  precedence = 3

  def _fields(self) -> Tuple[object, ...]:
    return (self.operand,)


@dataclass(frozen=True, eq=False)
class Pow(Expression):
  base: Expression
  exponent: int

  precedence = 4

  def __post_init__(self) -> None:
    if isinstance(self.exponent, bool) or not isinstance(self.exponent, int):
      raise ValueError(f"Exponent must be an integer, got {self.exponent!r}")

  def _fields(self) -> Tuple[object, ...]:
    return (self.base, self.exponent)


@dataclass(frozen=True, eq=False)
class Func(Expression):
  name: str
  arg: Expression

  def __post_init__(self) -> None:
    if self.name not in FUNCTION_NAMES:
      raise ValueError(
          f"Unknown function {self.name!r}; expected one of {', '.join(FUNCTION_NAMES)}"
      )

  def _fields(self) -> Tuple[object, ...]:
    return (self.name, self.arg)


# ---------------------------------------------------------------------------
# Smart constructors (constant folding only)
# ---------------------------------------------------------------------------


def _is_const(e: Expression, value: Optional[float] = None) -> bool:
  if not isinstance(e, Const):
    return False
  return value is None or e.value == value


def as_expression(value: Union[Operand, str]) -> Expression:
  """Coerces numbers and expression text to an Expression."""
  if isinstance(value, Expression):
    return value
  if isinstance(value, str):
    return parse(value)
  return Const(float(value))


def add(a: Expression, b: Expression) -> Expression:
  if isinstance(a, Const) and isinstance(b, Const):
    return Const(a.value + b.value)
  if _is_const(a, 0.0):
    return b
  if _is_const(b, 0.0):
    return a
  return Add(a, b)


def sub(a: Expression, b: Expression) -> Expression:
  if isinstance(a, Const) and isinstance(b, Const):
    return Const(a.value - b.value)
  if _is_const(b, 0.0):
    return a
  if _is_const(a, 0.0):
    return neg(b)
  return Sub(a, b)


def mul(a: Expression, b: Expression) -> Expression:
  if isinstance(a, Const) and isinstance(b, Const):
    return Const(a.value * b.value)
  if _is_const(a, 0.0) or _is_const(b, 0.0):
    return Const(0.0)
  if _is_const(a, 1.0):
    return b
  if _is_const(b, 1.0):
    return a
  if _is_const(a, -1.0):
    return neg(b)
  if _is_const(b, -1.0):
    return neg(a)
  return Mul(a, b)


def div(a: Expression, b: Expression) -> Expression:
  if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
    return Const(a.value / b.value)
  if _is_const(a, 0.0) and not _is_const(b, 0.0):
    return Const(0.0)
  if _is_const(b, 1.0):
    return a
  return Div(a, b)


def neg(a: Expression) -> Expression:
  if isinstance(a, Const):
    return Const(-a.value)
  if isinstance(a, Neg):
    return a.operand
  return Neg(a)


def power(base: Expression, exponent: int) -> Expression:
  if exponent == 0:
    return Const(1.0)
  if exponent == 1:
    return base
  if isinstance(base, Const) and not (base.value == 0.0 and exponent < 0):
    return Const(base.value**exponent)
  return Pow(base, exponent)


def apply(name: str, arg: Expression) -> Expression:
  """Applies a named unary function, folding constant arguments."""
  if isinstance(arg, Const):
    if name != "log" or arg.value > 0.0:
      return Const(float(_NUMPY_FUNCTIONS[name](arg.value)))
  return Func(name, arg)


def sin(arg: Operand) -> Expression:
  return apply("sin", as_expression(arg))


def cos(arg: Operand) -> Expression:
  return apply("cos", as_expression(arg))


def exp(arg: Operand) -> Expression:
  return apply("exp", as_expression(arg))


def log(arg: Operand) -> Expression:
  return apply("log", as_expression(arg))


def atan(arg: Operand) -> Expression:
  return apply("atan", as_expression(arg))


X = Var("x")
T = Var("t")


def p(index: int) -> Var:
  """The break variable ``p<index>`` (1-based)."""
  return Var(f"p{index}")


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------


def differentiate(e: Expression, variable: str, order: int = 1) -> Expression:
  """Returns the exact symbolic derivative of ``e`` in ``variable``.

  Args:
    e: The expression to differentiate.
    variable: One of ``x``, ``t``, ``p1`` ... ``p9``.
    order: How many times to differentiate.

  Returns:
    The derivative, itself an Expression.

  Raises:
    ValueError: If ``variable`` is not a grammar variable or ``order`` < 0.
  """
  if variable not in VARIABLES:
    raise ValueError(f"Cannot differentiate in unknown variable {variable!r}")
  if order < 0:
    raise ValueError(f"Derivative order must be non-negative, got {order}")
  return e.derivative(variable, order)


@singledispatch
def _differentiate(e: Expression, variable: str) -> Expression:
  raise TypeError(f"Cannot differentiate a {type(e).__name__}")


@_differentiate.register
def _(e: Const, variable: str) -> Expression:
  return Const(0.0)


@_differentiate.register
def _(e: Var, variable: str) -> Expression:
  return Const(1.0 if e.name == variable else 0.0)


@_differentiate.register
def _(e: Add, variable: str) -> Expression:
  return add(e.left.derivative(variable), e.right.derivative(variable))


@_differentiate.register
def _(e: Sub, variable: str) -> Expression:
  return sub(e.left.derivative(variable), e.right.derivative(variable))


@_differentiate.register
def _(e: Mul, variable: str) -> Expression:
  return add(
      mul(e.left.derivative(variable), e.right),
      mul(e.left, e.right.derivative(variable)),
  )


@_differentiate.register
def _(e: Div, variable: str) -> Expression:
  numerator = sub(
      mul(e.left.derivative(variable), e.right),
      mul(e.left, e.right.derivative(variable)),
  )
  return div(numerator, power(e.right, 2))


@_differentiate.register
def _(e: Neg, variable: str) -> Expression:
  return neg(e.operand.derivative(variable))


@_differentiate.register
def _(e: Pow, variable: str) -> Expression:
  inner = e.base.derivative(variable)
  return mul(mul(Const(e.exponent), power(e.base, e.exponent - 1)), inner)


@_differentiate.register
def _(e: Func, variable: str) -> Expression:
  inner = e.arg.derivative(variable)
  if _is_const(inner, 0.0):
    return Const(0.0)
  if e.name == "sin":
    return mul(cos(e.arg), inner)
  if e.name == "cos":
    return neg(mul(sin(e.arg), inner))
  if e.name == "exp":
    return mul(e, inner)
  if e.name == "log":
    return div(inner, e.arg)
  # atan
  return div(inner, add(Const(1.0), power(e.arg, 2)))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def evaluate(e: Expression, binding: Binding) -> Value:
  """Evaluates ``e`` with the variables in ``binding``.

  Bindings may hold floats or numpy arrays; arrays broadcast elementwise.

  Raises:
    UnboundVariableError: If a free variable of ``e`` is missing.
    ExpressionDomainError: On division by zero or log of a non-positive value.
  """
  for name in sorted(e.free_variables):
    if name not in binding:
      raise UnboundVariableError(name)
  with np.errstate(over="ignore", invalid="ignore"):
    value = e.compiled(binding)
  if np.ndim(value) == 0:
    return float(value)
  return value


@singledispatch
def _compile(e: Expression) -> Evaluator:
  raise TypeError(f"Cannot compile a {type(e).__name__}")


@_compile.register
def _(e: Const) -> Evaluator:
  value = e.value
  return lambda env: value


@_compile.register
def _(e: Var) -> Evaluator:
  name = e.name
  return lambda env: env[name]


@_compile.register
def _(e: Add) -> Evaluator:
  left, right = e.left.compiled, e.right.compiled
  return lambda env: left(env) + right(env)


@_compile.register
def _(e: Sub) -> Evaluator:
  left, right = e.left.compiled, e.right.compiled
  return lambda env: left(env) - right(env)


@_compile.register
def _(e: Mul) -> Evaluator:
  left, right = e.left.compiled, e.right.compiled
  return lambda env: left(env) * right(env)


@_compile.register
def _(e: Div) -> Evaluator:
  left, right = e.left.compiled, e.right.compiled

  def run(env: Binding) -> Value:
    denominator = right(env)
    if np.any(denominator == 0):
      raise ExpressionDomainError(e, "Division by zero")
    return left(env) / denominator

  return run


@_compile.register
def _(e: Neg) -> Evaluator:
  operand = e.operand.compiled
  return lambda env: -operand(env)


@_compile.register
def _(e: Pow) -> Evaluator:
  base, exponent = e.base.compiled, e.exponent
  if exponent >= 0:
    return lambda env: base(env) ** exponent

  def run(env: Binding) -> Value:
    value = base(env)
    if np.any(value == 0):
      raise ExpressionDomainError(e, "Negative power of zero")
    return 1.0 / value ** (-exponent)

  return run


@_compile.register
def _(e: Func) -> Evaluator:
  arg = e.arg.compiled
  function = _NUMPY_FUNCTIONS[e.name]
  if e.name != "log":
    return lambda env: function(arg(env))

  def run(env: Binding) -> Value:
    value = arg(env)
    if np.any(value <= 0):
      raise ExpressionDomainError(e, "Logarithm of a non-positive value")
    return function(value)

  return run


# ---------------------------------------------------------------------------
# Structural helpers
# ---------------------------------------------------------------------------


@singledispatch
def _free_variables(e: Expression) -> FrozenSet[str]:
  raise TypeError(f"Unsupported node {type(e).__name__}")


@_free_variables.register
def _(e: Const) -> FrozenSet[str]:
  return frozenset()


@_free_variables.register
def _(e: Var) -> FrozenSet[str]:
  return frozenset((e.name,))


@_free_variables.register
def _(e: Binary) -> FrozenSet[str]:
  return e.left.free_variables | e.right.free_variables


@_free_variables.register
def _(e: Neg) -> FrozenSet[str]:
  return e.operand.free_variables


@_free_variables.register
def _(e: Pow) -> FrozenSet[str]:
  return e.base.free_variables


@_free_variables.register
def _(e: Func) -> FrozenSet[str]:
  return e.arg.free_variables


def free_variables(e: Expression) -> FrozenSet[str]:
  """Returns the names of the variables occurring in ``e``."""
  return e.free_variables


def substitute(e: Expression, mapping: Mapping[str, Operand]) -> Expression:
  """Replaces variables by expressions, folding constants on the way."""
  replacements = {name: as_expression(value) for name, value in mapping.items()}
  if not replacements or not (e.free_variables & replacements.keys()):
    return e
  return _substitute(e, replacements)


def _substitute(e: Expression, mapping: Mapping[str, Expression]) -> Expression:
  if not (e.free_variables & mapping.keys()):
    return e
  if isinstance(e, Var):
    return mapping[e.name]
  if isinstance(e, Add):
    return add(_substitute(e.left, mapping), _substitute(e.right, mapping))
  if isinstance(e, Sub):
    return sub(_substitute(e.left, mapping), _substitute(e.right, mapping))
  if isinstance(e, Mul):
    return mul(_substitute(e.left, mapping), _substitute(e.right, mapping))
  if isinstance(e, Div):
    return div(_substitute(e.left, mapping), _substitute(e.right, mapping))
  if isinstance(e, Neg):
    return neg(_substitute(e.operand, mapping))
  if isinstance(e, Pow):
    return power(_substitute(e.base, mapping), e.exponent)
  if isinstance(e, Func):
    return apply(e.name, _substitute(e.arg, mapping))
  raise TypeError(f"Unsupported node {type(e).__name__}")


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def _format_number(value: float) -> str:
  if value.is_integer() and abs(value) < 1e15:
    return str(int(value))
  return repr(value)


def unparse(e: Expression) -> str:
  """Prints ``e`` in the grammar; ``parse(unparse(e)) == e``."""
  return _unparse(e)


@singledispatch
def _unparse(e: Expression) -> str:
  raise TypeError(f"Cannot print a {type(e).__name__}")


@_unparse.register
def _(e: Const) -> str:
  text = _format_number(e.value)
  return text if e.value >= 0 else f"({text})"


@_unparse.register
def _(e: Var) -> str:
  return e.name


@_unparse.register
def _(e: Binary) -> str:
  left = _unparse(e.left)
  if e.left.precedence < e.precedence:
    left = f"({left})"
  right = _unparse(e.right)
  if e.right.precedence <= e.precedence:
    right = f"({right})"
  return f"{left} {e.symbol} {right}"


@_unparse.register
def _(e: Neg) -> str:
  operand = e.operand
  if isinstance(operand, Const):
    return f"-({_format_number(operand.value)})"
  text = _unparse(operand)
  if operand.precedence < e.precedence:
    text = f"({text})"
  return f"-{text}"


@_unparse.register
def _(e: Pow) -> str:
  base = _unparse(e.base)
  if e.base.precedence <= e.precedence:
    base = f"({base})"
  return f"{base}^{e.exponent}"


@_unparse.register
def _(e: Func) -> str:
  return f"{e.name}({_unparse(e.arg)})"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class _Token(NamedTuple):
  kind: str
  text: str
  position: int


_TOKEN_PATTERN = re.compile(
    r"""
    (?P<space>\s+)
    | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> List[_Token]:
  tokens: List[_Token] = []
  position = 0
  while position < len(text):
    match = _TOKEN_PATTERN.match(text, position)
    if match is None:
      raise ExpressionSyntaxError(
          f"Unexpected character {text[position]!r}", text, position
      )
    kind = match.lastgroup
    assert kind is not None
    if kind != "space":
      tokens.append(_Token(kind, match.group(), position))
    position = match.end()
  tokens.append(_Token("end", "", len(text)))
  return tokens


class _Parser:
  """Recursive-descent parser over a token list."""

  def __init__(self, text: str) -> None:
    self._text = text
    self._tokens = _tokenize(text)
    self._index = 0

  def _peek(self, offset: int = 0) -> _Token:
    index = min(self._index + offset, len(self._tokens) - 1)
    return self._tokens[index]

  def _advance(self) -> _Token:
    token = self._tokens[self._index]
    self._index += 1
    return token

  def _expect(self, text: str) -> None:
    token = self._peek()
    if token.text != text:
      found = token.text or "end of input"
      raise ExpressionSyntaxError(
          f"Expected {text!r} but found {found!r}", self._text, token.position
      )
    self._advance()

  def parse(self) -> Expression:
    result = self._expr()
    token = self._peek()
    if token.kind != "end":
      raise ExpressionSyntaxError(
          f"Unexpected token {token.text!r}", self._text, token.position
      )
    return result

  def _expr(self) -> Expression:
    result = self._term()
    while self._peek().text in ("+", "-"):
      op = self._advance().text
      right = self._term()
      result = Add(result, right) if op == "+" else Sub(result, right)
    return result

  def _term(self) -> Expression:
    result = self._unary()
    while self._peek().text in ("*", "/"):
      op = self._advance().text
      right = self._unary()
      result = Mul(result, right) if op == "*" else Div(result, right)
    return result

  def _unary(self) -> Expression:
    if self._peek().text != "-":
      return self._factor()
    # A minus directly on a literal is a negative constant, unless the
    # literal is raised to a power: -2^2 is -(2^2).
    if self._peek(1).kind == "number" and self._peek(2).text != "^":
      self._advance()
      return Const(-float(self._advance().text))
    self._advance()
    return Neg(self._unary())

  def _factor(self) -> Expression:
    base = self._base()
    if self._peek().text != "^":
      return base
    self._advance()
    sign = 1
    if self._peek().text == "-":
      self._advance()
      sign = -1
    token = self._peek()
    if token.kind != "number" or not token.text.isdigit():
      raise ExpressionSyntaxError(
          "Exponent must be an integer literal", self._text, token.position
      )
    self._advance()
    return Pow(base, sign * int(token.text))

  def _base(self) -> Expression:
    token = self._peek()
    if token.kind == "number":
      self._advance()
      return Const(float(token.text))
    if token.text == "(":
      self._advance()
      inner = self._expr()
      self._expect(")")
      return inner
    if token.kind == "ident":
      self._advance()
      if token.text in FUNCTION_NAMES:
        self._expect("(")
        arg = self._expr()
        self._expect(")")
        return Func(token.text, arg)
      if token.text in VARIABLES:
        return Var(token.text)
      if token.text in CONSTANTS:
        return Const(CONSTANTS[token.text])
      raise UnknownIdentifierError(token.text, self._text, token.position)
    found = token.text or "end of input"
    raise ExpressionSyntaxError(
        f"Unexpected token {found!r}", self._text, token.position
    )


def parse(text: str) -> Expression:
  """Parses expression text.

  Args:
    text: Expression source, e.g. ``"x*p1 + 2"``.

  Returns:
    The expression tree, without any folding beyond negative literals.

  Raises:
    ExpressionSyntaxError: With the position of the offending token.
    UnknownIdentifierError: For names outside the grammar.
  """
  return _Parser(text).parse()
