"""The ``.cfg`` system description format.

Line oriented, ``#`` starts a comment, three sections::

    [params]
    resolution = 3^-6

    [vertices]
    v | 0 | 1                 # id | lower corner | upper corner

    [edges]
    1 v v | 1/3 | 0           # id source range | matrix rows (;) | offset
    2 v v | 1/3 | 2/3

Numbers may be arithmetic expressions over ``+ - * / ^ **``, ``sqrt``,
``pi`` and parentheses.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..mw_graph import MWGraph, validate_mw

SECTIONS = ("params", "vertices", "edges")

_BINARY = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_CONSTANTS = {"pi": math.pi}
_FUNCS = {"sqrt": np.sqrt, "cos": np.cos, "sin": np.sin, "exp": np.exp, "abs": np.abs}


def evaluate(text: str, names: dict | None = None):
    """Evaluate an arithmetic expression without ``eval``.

    ``names`` binds extra variables, which may be numpy arrays; the result
    is then an array.  Without names the result is a float.
    """
    scope = dict(_CONSTANTS, **(names or {}))
    try:
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
        value = _walk(tree.body, scope)
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError, OverflowError) as err:
        raise ValueError(f"bad number {text.strip()!r}: {err}") from None
    return float(value) if names is None else value


def _walk(node, scope):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        return _BINARY[type(node.op)](_walk(node.left, scope), _walk(node.right, scope))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_walk(node.operand, scope))
    if isinstance(node, ast.Name) and node.id in scope:
        return scope[node.id]
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_walk(node.args[0], scope))
    raise ValueError(f"unsupported expression {ast.dump(node)}")


def numbers(text: str) -> list:
    return [evaluate(tok) for tok in text.split()]


@dataclass
class SystemConfig:
    vertices: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    source: str = ""

    def number(self, key: str, default=None):
        raw = self.params.get(key)
        return default if raw is None else evaluate(raw)

    def build(self) -> MWGraph:
        return validate_mw(self.vertices, self.edges)


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_config(text: str) -> SystemConfig:
    """Parse config text; all problems are collected before raising.

    Raises ``ConfigError`` whose ``errors`` attribute lists every problem,
    each with its line number and the offending field.
    """
    cfg = SystemConfig(source=text)
    errors = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                errors.append(ConfigError(f"unknown section [{section}]", lineno, "section"))
            continue
        try:
            if section == "params":
                key, sep, value = line.partition("=")
                if not sep or not key.strip():
                    raise ConfigError("expected key = value", lineno, "params")
                cfg.params[key.strip()] = value.strip()
            elif section == "vertices":
                cfg.vertices.append(_vertex(line, lineno))
            elif section == "edges":
                cfg.edges.append(_edge(line, lineno))
            elif section is None:
                raise ConfigError("content before the first section header", lineno)
        except ConfigError as err:
            errors.append(err)
    if errors:
        err = ConfigError("; ".join(str(e) for e in errors))
        err.line, err.field, err.errors = errors[0].line, errors[0].field, errors
        raise err
    return cfg


def _vertex(line: str, lineno: int) -> tuple:
    parts = [p.strip() for p in line.split("|")]
    if len(parts) != 3 or not parts[0]:
        raise ConfigError("vertex line needs 'id | lo | hi'", lineno, "vertex")
    vid = parts[0]
    try:
        lo, hi = numbers(parts[1]), numbers(parts[2])
    except ValueError as err:
        raise ConfigError(str(err), lineno, f"vertex {vid}") from None
    if len(lo) != len(hi) or not lo:
        raise ConfigError("corner lengths differ", lineno, f"vertex {vid}")
    return vid, lo, hi


def _edge(line: str, lineno: int) -> tuple:
    parts = [p.strip() for p in line.split("|")]
    head = parts[0].split()
    if len(parts) != 3 or len(head) != 3:
        raise ConfigError("edge line needs 'id source range | matrix | offset'", lineno, "edge")
    name, src, rng = head
    try:
        rows = [numbers(r) for r in parts[1].split(";")]
        offset = numbers(parts[2])
    except ValueError as err:
        raise ConfigError(str(err), lineno, f"edge {name}") from None
    if not rows or any(len(r) != len(rows[0]) for r in rows) or len(rows) != len(rows[0]):
        raise ConfigError("matrix rows must form a square matrix", lineno, f"edge {name}")
    if len(offset) != len(rows):
        raise ConfigError("offset length does not match the matrix", lineno, f"edge {name}")
    return name, src, rng, np.array(rows), np.array(offset)


def load_config(path) -> SystemConfig:
    return parse_config(Path(path).read_text())


def load_system(path) -> tuple:
    """(config, validated MWGraph)."""
    cfg = load_config(path)
    return cfg, cfg.build()


def format_config(cfg: SystemConfig) -> str:
    """Serialise a config; numbers are written with full precision."""
    def nums(xs):
        return " ".join(repr(float(x)) for x in np.ravel(xs))

    out = []
    if cfg.params:
        out.append("[params]")
        out += [f"{k} = {v}" for k, v in cfg.params.items()]
        out.append("")
    out.append("[vertices]")
    out += [f"{v} | {nums(lo)} | {nums(hi)}" for v, lo, hi in cfg.vertices]
    out.append("")
    out.append("[edges]")
    for name, src, rng, mat, off in cfg.edges:
        rows = "; ".join(nums(r) for r in np.atleast_2d(mat))
        out.append(f"{name} {src} {rng} | {rows} | {nums(off)}")
    return "\n".join(out) + "\n"

