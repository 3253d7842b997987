"""Forward-mode automatic differentiation with a fixed number of partial derivatives.

An ``Evaluation`` pairs a value with the vector of its partial derivatives with respect
to the primary variables of one cell (or one well). The value may be a plain float or a
numpy array; with an array, every entry is an independent evaluation and ``derivs`` has
shape ``value.shape + (N,)``. This lets one call evaluate a property for all cells.

The number of derivatives ``N`` is a class attribute. ``Evaluation`` itself is the
black-oil cell specialization (N=3); ``evaluation_type(n)`` returns the cached
specialization for other counts. Mixing specializations is a contract violation.

Non-smooth points (abs, min, max): the derivative of the first argument's side is used,
so ``abs'(0) = +1`` and ties in ``minimum``/``maximum`` select the first operand.
"""

from functools import cache
from typing import Any

import numpy as np

from .errors import EvaluationError


def _column(value: Any) -> np.ndarray:
    """Append a trailing axis so values broadcast against derivative arrays."""
    return np.asarray(value, dtype=float)[..., None]


def _as_value(value: Any) -> float | np.ndarray:
    array = np.asarray(value, dtype=float)
    return float(array) if array.ndim == 0 else array


class Evaluation:
    """A value paired with N partial derivatives."""

    NUM_DERIVS = 3
    __slots__ = ("value", "derivs")
    # defer mixed ndarray arithmetic to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, value: Any, derivs: Any = None):
        self.value = _as_value(value)
        shape = np.shape(self.value) + (self.NUM_DERIVS,)
        if derivs is None:
            self.derivs = np.zeros(shape)
        else:
            derivs = np.asarray(derivs, dtype=float)
            if derivs.shape != shape:
                raise ValueError(
                    f"derivative array of shape {derivs.shape} does not match "
                    f"value shape {np.shape(self.value)} with {self.NUM_DERIVS} derivatives"
                )
            self.derivs = derivs

    # -- construction ---------------------------------------------------------

    @classmethod
    def constant(cls, value: Any) -> "Evaluation":
        """Lift a real (or array of reals) to an evaluation with zero derivatives."""
        return cls(value)

    @classmethod
    def variable(cls, value: Any, index: int) -> "Evaluation":
        """Seed the ``index``-th primary variable."""
        if not 0 <= index < cls.NUM_DERIVS:
            raise ValueError(
                f"variable index {index} outside [0, {cls.NUM_DERIVS}) for {cls.__name__}"
            )
        result = cls(value)
        result.derivs[..., index] = 1.0
        return result

    @classmethod
    def stack(cls, items: list["Evaluation"]) -> "Evaluation":
        """Stack evaluations along a new leading axis."""
        lifted = [cls._lift(item) for item in items]
        return cls(
            np.stack([np.asarray(item.value) for item in lifted]),
            np.stack([item.derivs for item in lifted]),
        )

    @classmethod
    def _lift(cls, other: Any) -> "Evaluation":
        if isinstance(other, Evaluation):
            if type(other) is not cls:
                raise ValueError(
                    f"cannot combine {cls.__name__} ({cls.NUM_DERIVS} derivatives) with "
                    f"{type(other).__name__} ({other.NUM_DERIVS} derivatives)"
                )
            return other
        return cls.constant(other)

    def constant_copy(self) -> "Evaluation":
        """Same values, derivatives dropped."""
        return type(self)(np.copy(self.value))

    def derivative(self, index: int) -> float | np.ndarray:
        return _as_value(self.derivs[..., index])

    # -- container protocol ---------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return np.shape(self.value)

    def __len__(self) -> int:
        return len(self.value)

    def __getitem__(self, index: Any) -> "Evaluation":
        return type(self)(np.asarray(self.value)[index], self.derivs[index])

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.value!r}, {self.derivs.tolist()!r})"

    # -- comparisons act on values --------------------------------------------

    def __lt__(self, other: Any):
        return self.value < value_of(other)

    def __le__(self, other: Any):
        return self.value <= value_of(other)

    def __gt__(self, other: Any):
        return self.value > value_of(other)

    def __ge__(self, other: Any):
        return self.value >= value_of(other)

    # -- arithmetic -----------------------------------------------------------

    def __neg__(self) -> "Evaluation":
        return type(self)(-np.asarray(self.value), -self.derivs)

    def __pos__(self) -> "Evaluation":
        return self

    def __add__(self, other: Any) -> "Evaluation":
        other = self._lift(other)
        return type(self)(
            np.add(self.value, other.value), np.add(self.derivs, other.derivs)
        )

    def __radd__(self, other: Any) -> "Evaluation":
        return self._lift(other).__add__(self)

    def __sub__(self, other: Any) -> "Evaluation":
        other = self._lift(other)
        return type(self)(
            np.subtract(self.value, other.value), np.subtract(self.derivs, other.derivs)
        )

    def __rsub__(self, other: Any) -> "Evaluation":
        return self._lift(other).__sub__(self)

    def __mul__(self, other: Any) -> "Evaluation":
        other = self._lift(other)
        return type(self)(
            np.multiply(self.value, other.value),
            self.derivs * _column(other.value) + other.derivs * _column(self.value),
        )

    def __rmul__(self, other: Any) -> "Evaluation":
        return self._lift(other).__mul__(self)

    def __truediv__(self, other: Any) -> "Evaluation":
        other = self._lift(other)
        if np.any(np.asarray(other.value) == 0.0):
            raise EvaluationError("div", "division by zero")
        quotient = np.divide(self.value, other.value)
        derivs = (self.derivs - _column(quotient) * other.derivs) / _column(other.value)
        return type(self)(quotient, derivs)

    def __rtruediv__(self, other: Any) -> "Evaluation":
        return self._lift(other).__truediv__(self)

    def __pow__(self, exponent: Any) -> "Evaluation":
        if isinstance(exponent, Evaluation):
            exponent = self._lift(exponent)
            if np.any(exponent.derivs):
                return _pow_general(self, exponent)
            exponent = exponent.value
        return _pow_real_exponent(self, exponent)

    def __rpow__(self, base: Any) -> "Evaluation":
        return _pow_general(self._lift(base), self)

    def __abs__(self) -> "Evaluation":
        return elementary("abs", self)


@cache
def evaluation_type(num_derivs: int) -> type[Evaluation]:
    """Return the ``Evaluation`` specialization with ``num_derivs`` derivatives."""
    if num_derivs < 1:
        raise ValueError(f"number of derivatives must be positive, got {num_derivs}")
    if num_derivs == Evaluation.NUM_DERIVS:
        return Evaluation
    return type(
        f"Evaluation{num_derivs}",
        (Evaluation,),
        {"NUM_DERIVS": num_derivs, "__slots__": ()},
    )


def value_of(x: Any) -> float | np.ndarray:
    """Value part of an evaluation, or the argument itself for plain numbers."""
    return x.value if isinstance(x, Evaluation) else x


def _pow_real_exponent(base: Evaluation, exponent: Any) -> Evaluation:
    value = np.asarray(base.value)
    exponent = np.asarray(exponent, dtype=float)
    non_integer = exponent != np.round(exponent)
    if np.any((value < 0.0) & non_integer):
        raise EvaluationError("pow", "negative base with non-integer exponent")
    if np.any((value == 0.0) & (exponent < 1.0)):
        raise EvaluationError("pow", "derivative undefined at zero base")
    result = np.power(value, exponent)
    slope = exponent * np.power(value, exponent - 1.0)
    return type(base)(result, _column(slope) * base.derivs)


def _pow_general(base: Evaluation, exponent: Evaluation) -> Evaluation:
    value = np.asarray(base.value)
    if np.any(value <= 0.0):
        raise EvaluationError("pow", "non-positive base with variable exponent")
    result = np.power(value, exponent.value)
    derivs = _column(result) * (
        exponent.derivs * _column(np.log(value))
        + base.derivs * _column(np.asarray(exponent.value) / value)
    )
    return type(base)(result, derivs)


def _unary(tag: str, a: Evaluation) -> Evaluation:
    value = np.asarray(a.value)
    if tag == "exp":
        result = np.exp(value)
        slope = result
    elif tag == "log":
        if np.any(value <= 0.0):
            raise EvaluationError("log", "argument must be positive")
        result = np.log(value)
        slope = 1.0 / value
    elif tag == "sqrt":
        if np.any(value < 0.0):
            raise EvaluationError("sqrt", "argument must be non-negative")
        if np.any(value == 0.0):
            raise EvaluationError("sqrt", "derivative undefined at zero")
        result = np.sqrt(value)
        slope = 0.5 / result
    elif tag == "abs":
        result = np.abs(value)
        slope = np.where(value >= 0.0, 1.0, -1.0)
    else:
        raise ValueError(f"unknown unary function tag '{tag}'")
    return type(a)(result, _column(slope) * a.derivs)


def where(condition: Any, a: Any, b: Any) -> Any:
    """Select ``a`` where ``condition`` holds, else ``b``; derivatives follow the values."""
    if not isinstance(a, Evaluation) and not isinstance(b, Evaluation):
        return _as_value(np.where(condition, a, b))
    cls = type(a) if isinstance(a, Evaluation) else type(b)
    a = cls._lift(a)
    b = cls._lift(b)
    condition = np.asarray(condition, dtype=bool)
    value = np.where(condition, a.value, b.value)
    derivs = np.where(condition[..., None], a.derivs, b.derivs)
    return cls(value, np.broadcast_to(derivs, np.shape(value) + (cls.NUM_DERIVS,)).copy())


def maximum(a: Any, b: Any) -> Any:
    """Elementwise max; ties select ``a``."""
    return where(np.asarray(value_of(a)) >= np.asarray(value_of(b)), a, b)


def minimum(a: Any, b: Any) -> Any:
    """Elementwise min; ties select ``a``."""
    return where(np.asarray(value_of(a)) <= np.asarray(value_of(b)), a, b)


_BINARY = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "pow": lambda a, b: a**b,
    "min": minimum,
    "max": maximum,
}
_UNARY = ("exp", "log", "sqrt", "abs")


def elementary(tag: str, a: Any, b: Any = None) -> Any:
    """Apply the function named by ``tag`` to one or two operands.

    Plain reals are accepted everywhere; the result is then a plain real as well.

    Raises:
        EvaluationError: argument outside the function's domain
        ValueError: unknown tag or missing operand
    """
    if tag in _UNARY:
        if isinstance(a, Evaluation):
            return _unary(tag, a)
        return _unary(tag, Evaluation.constant(a)).value
    if tag not in _BINARY:
        raise ValueError(f"unknown function tag '{tag}'")
    if b is None:
        raise ValueError(f"function '{tag}' needs two operands")
    if not isinstance(a, Evaluation) and not isinstance(b, Evaluation):
        return value_of(_BINARY[tag](Evaluation.constant(a), Evaluation.constant(b)))
    return _BINARY[tag](a, b)


def exp(x: Any) -> Any:
    return elementary("exp", x)


def log(x: Any) -> Any:
    return elementary("log", x)


def sqrt(x: Any) -> Any:
    return elementary("sqrt", x)
