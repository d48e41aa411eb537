"""Model oracles: named analytic models and a line-based subprocess protocol.

A model oracle is a pure deterministic map from feature rows to scores.  The
subprocess flavor lets any external runtime serve a model: the command is
launched once; each request batch is written to its stdin as one line of
comma-separated decimals per row followed by a blank line, and exactly one
decimal per input row is read back.  Numbers use '.' decimals and 17
significant digits, so values round-trip exactly.
"""

from __future__ import annotations

import re
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .games import GameError
from .synthetic import QuadraticModel


class OracleProtocolError(RuntimeError):
    """The scoring subprocess violated the batch protocol."""


@dataclass(frozen=True)
class AnalyticModel:
    """In-process model with a readable name."""

    name: str
    arity: int
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.arity:
            raise GameError(f"model {self.name!r} expects {self.arity} features, "
                            f"got {X.shape[1]}")
        return np.asarray(self.fn(X), dtype=np.float64).reshape(X.shape[0])


def _resolve_index(token: str, arity: int, names: Sequence[str] | None) -> int:
    if names and token in names:
        return list(names).index(token)
    match = re.fullmatch(r"x(\d+)", token)
    if not match:
        raise GameError(f"cannot resolve feature {token!r}")
    idx = int(match.group(1))
    if not 0 <= idx < arity:
        raise GameError(f"feature index {idx} out of range for arity {arity}")
    return idx


def parse_analytic_model(spec: str, arity: int,
                         feature_names: Sequence[str] | None = None) -> AnalyticModel:
    """Parse model specs like ``bilinear:3*x1*x2``, ``linear:1,0.5,-2``,
    ``product``, ``sum`` or ``const:2.5``.

    ``x<k>`` tokens resolve against the dataset's column names first, then as
    0-based indices.
    """
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "linear":
        coefs = np.array([float(tok) for tok in rest.split(",")], dtype=np.float64)
        if coefs.size != arity:
            raise GameError(f"linear model needs {arity} coefficients, got {coefs.size}")
        q = QuadraticModel.linear_model(coefs)
        return AnalyticModel(spec, arity, q)
    if kind == "bilinear":
        match = re.fullmatch(r"\s*([-+0-9.eE]+)\s*\*\s*(\w+)\s*\*\s*(\w+)\s*", rest)
        if not match:
            raise GameError(f"bad bilinear spec {spec!r}; expected COEF*xI*xJ")
        coef = float(match.group(1))
        i = _resolve_index(match.group(2), arity, feature_names)
        j = _resolve_index(match.group(3), arity, feature_names)
        q = QuadraticModel.bilinear(i, j, coef, arity)
        return AnalyticModel(spec, arity, q)
    if kind == "product":
        return AnalyticModel(spec, arity, lambda X: np.prod(X, axis=1))
    if kind == "sum":
        return AnalyticModel(spec, arity, lambda X: np.sum(X, axis=1))
    if kind == "const":
        c = float(rest)
        return AnalyticModel(spec, arity, lambda X: np.full(X.shape[0], c))
    raise GameError(f"unknown analytic model {spec!r}; kinds: linear, bilinear, "
                    "product, sum, const")


class SubprocessModel:
    """Scores rows through an external command speaking the batch protocol.

    The command is started once and reused; calls are serialized behind a
    lock, so the oracle is safe to share between explanation workers.
    """

    def __init__(self, command: str | list[str], arity: int,
                 batch_size: int = 4096, name: str | None = None):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.arity = arity
        self.batch_size = int(batch_size)
        self.name = name or " ".join(self.command)
        self._lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, bufsize=1)
        except OSError as exc:
            raise OracleProtocolError(f"cannot launch {self.name!r}: {exc}") from exc

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.arity:
            raise GameError(f"oracle {self.name!r} expects {self.arity} features, "
                            f"got {X.shape[1]}")
        out = np.empty(X.shape[0], dtype=np.float64)
        with self._lock:
            for start in range(0, X.shape[0], self.batch_size):
                batch = X[start:start + self.batch_size]
                out[start:start + batch.shape[0]] = self._score_batch(batch, start)
        return out

    def _score_batch(self, batch: np.ndarray, offset: int) -> np.ndarray:
        if self._proc.poll() is not None:
            raise OracleProtocolError(f"oracle {self.name!r} exited with code "
                                      f"{self._proc.returncode}")
        lines = "\n".join(",".join(f"{v:.17g}" for v in row) for row in batch)
        try:
            self._proc.stdin.write(lines + "\n\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise OracleProtocolError(
                f"oracle {self.name!r} closed its input at batch offset {offset}") from exc
        out = np.empty(batch.shape[0], dtype=np.float64)
        for k in range(batch.shape[0]):
            line = self._proc.stdout.readline()
            if line == "":
                raise OracleProtocolError(
                    f"oracle {self.name!r} sent {k} of {batch.shape[0]} scores "
                    f"for the batch at offset {offset}")
            try:
                out[k] = float(line.strip())
            except ValueError as exc:
                raise OracleProtocolError(
                    f"oracle {self.name!r} sent a non-numeric line "
                    f"{line.strip()!r} at row {offset + k}") from exc
        return out

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            self._proc.wait(timeout=10)

    def __enter__(self) -> "SubprocessModel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
