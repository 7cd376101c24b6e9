import ast
import operator
from typing import Callable

import numpy as np

from app.utils.exceptions import ConfigurationError

_BINARY = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCTIONS = {"cos": np.cos, "sin": np.sin, "exp": np.exp}
_CONSTANTS = {"pi": np.pi}


def _compile(node: ast.AST) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(node, ast.Expression):
        return _compile(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        constant = float(node.value)
        return lambda x: np.full_like(x, constant)
    if isinstance(node, ast.Name):
        if node.id == "x":
            return lambda x: x
        if node.id in _CONSTANTS:
            constant = _CONSTANTS[node.id]
            return lambda x: np.full_like(x, constant)
        raise ConfigurationError(f"Unknown name '{node.id}' in expression")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        op, left, right = _BINARY[type(node.op)], _compile(node.left), _compile(node.right)
        return lambda x: op(left(x), right(x))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        op, operand = _UNARY[type(node.op)], _compile(node.operand)
        return lambda x: op(operand(x))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCTIONS:
        if len(node.args) != 1 or node.keywords:
            raise ConfigurationError(f"{node.func.id}() takes exactly one argument")
        function, argument = _FUNCTIONS[node.func.id], _compile(node.args[0])
        return lambda x: function(argument(x))
    raise ConfigurationError(f"Unsupported syntax in expression: {ast.dump(node)[:60]}")


def parse_expression(source: str) -> Callable:
    """
    Turn an expression over ``x`` (numbers, ``pi``, + - * / ** and cos/sin/exp) into a
    vectorised function. Scalars in give floats out.
    """
    try:
        tree = ast.parse(source.replace("^", "**"), mode="eval")
    except SyntaxError as error:
        raise ConfigurationError(f"Cannot parse expression '{source}': {error.msg}") from error
    compiled = _compile(tree)

    def evaluate(x):
        values = np.asarray(x, dtype=np.float64)
        result = compiled(np.atleast_1d(values))
        return float(result[0]) if values.ndim == 0 else result

    evaluate.__doc__ = source
    return evaluate
