"""Sample containers, reproducible RNG streams and deterministic CSV output."""

from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = [
    "SeriesSample",
    "block_rng",
    "worker_count",
    "write_csv",
    "format_value",
    "BLOCK_SIZE",
]

# paths are simulated in fixed blocks; the block index picks the RNG stream, so
# output does not depend on how blocks are scheduled
BLOCK_SIZE = 4096


def block_rng(seed, block):
    """Generator for block ``block`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(int(block),))
    return np.random.Generator(np.random.PCG64(ss))


def worker_count():
    """Thread cap from ``SEMISD_THREADS`` (default: all cores)."""
    raw = os.environ.get("SEMISD_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass
class SeriesSample:
    """Simulated output.

    For a time series ``values`` has shape ``(n,)``. For subordinated paths
    ``values`` and ``directing`` have shape ``(paths, len(times))``.
    """

    values: np.ndarray
    config: Any = None
    seed: int = 0
    burn_in: int = 0
    times: np.ndarray | None = None
    directing: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    @property
    def is_path_sample(self):
        return self.times is not None

    def config_echo(self):
        cfg = self.config
        if hasattr(cfg, "to_dict"):
            cfg = cfg.to_dict()
        return {"config": cfg, "seed": int(self.seed), "burn_in": int(self.burn_in),
                **self.meta}

    def columns(self):
        """Column names and arrays for CSV output."""
        if not self.is_path_sample:
            return ["index", "value"], [np.arange(len(self.values)), self.values]
        paths, steps = self.values.shape
        pid = np.repeat(np.arange(paths), steps)
        t = np.tile(np.asarray(self.times, dtype=float), paths)
        return (["path_id", "t", "T_value", "X_value"],
                [pid, t, self.directing.ravel(), self.values.ravel()])

    def to_csv(self, target=None):
        names, cols = self.columns()
        return write_csv(target, names, cols, header=self.config_echo())


def format_value(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(target, names, cols, header=None):
    """Write columns as CSV with LF endings and an optional ``#`` JSON header.

    Floats use ``repr`` so identical arrays give identical bytes. Returns the
    text when ``target`` is None.
    """
    buf = io.StringIO()
    if header is not None:
        buf.write("# " + json.dumps(header, sort_keys=True, default=_json_default) + "\n")
    buf.write(",".join(names) + "\n")
    cols = [np.asarray(c) for c in cols]
    fmts = [(lambda x: str(int(x))) if np.issubdtype(c.dtype, np.integer)
            else (lambda x: repr(float(x))) for c in cols]
    for row in zip(*cols):
        buf.write(",".join(f(x) for f, x in zip(fmts, row)))
        buf.write("\n")
    text = buf.getvalue()
    if target is None:
        return text
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if hasattr(obj, "value"):
        return obj.value
    return str(obj)
