"""Scenario files: a Hilbert space, a state, dynamics, projection steps and queries.

Example::

    {
      "dim": 2,
      "t0": 0.0,
      "state": {"pure": [[0.7071067811865476, 0], [0.7071067811865476, 0]]},
      "hamiltonian": [[0, 0], [0, 0]],
      "steps": [
        {"t": 1.0, "space": {"members": [{"basis": [[1, 0]]}, {"basis": [[0, 1]]}]}}
      ],
      "queries": [{"kind": "classify"}]
    }

``hamiltonian``, ``t0`` and ``queries`` are optional; ``sample_space`` is
accepted as a synonym for a step's ``space``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import numerics as nm
from .errors import CQTError
from .histories import Family
from .serialize import (
    FormatError,
    canonical,
    read_matrix,
    read_sample_space,
    read_state,
)
from .static import FrameworkStatic, SampleSpace, StateDensity

QUERY_KINDS = ("probability", "classify", "truth", "noncontextuality")
BUNDLED_PREFIX = "@"


@dataclass(frozen=True, eq=False)
class Scenario:
    dim: int
    state: StateDensity
    hamiltonian: np.ndarray
    t0: float
    times: tuple[float, ...]
    spaces: tuple[SampleSpace, ...]
    queries: tuple[dict, ...]
    source: dict

    @classmethod
    def from_dict(cls, tree: Any) -> "Scenario":
        if not isinstance(tree, dict):
            raise FormatError("", "scenario must be a JSON object")
        tree = canonical(tree)
        dim = tree.get("dim")
        if not isinstance(dim, int) or dim < 1:
            raise FormatError("dim", "expected a positive integer")
        t0 = tree.get("t0", 0.0)
        if not isinstance(t0, (int, float)) or isinstance(t0, bool):
            raise FormatError("t0", "expected a number")
        if "state" not in tree:
            raise FormatError("state", "missing")
        state = read_state(tree["state"], "state", dim)
        if "hamiltonian" in tree and tree["hamiltonian"] is not None:
            h = read_matrix(tree["hamiltonian"], "hamiltonian", dim)
            try:
                h = nm.require_hermitian(h, name="hamiltonian")
            except CQTError as exc:
                raise FormatError("hamiltonian", str(exc)) from exc
        else:
            h = np.zeros((dim, dim), dtype=complex)
        steps = tree.get("steps", [])
        if not isinstance(steps, list):
            raise FormatError("steps", "expected a list")
        times, spaces = [], []
        prev = float(t0)
        for i, st in enumerate(steps):
            p = f"steps[{i}]"
            if not isinstance(st, dict):
                raise FormatError(p, "expected an object with 't' and 'space'")
            t = st.get("t")
            if not isinstance(t, (int, float)) or isinstance(t, bool):
                raise FormatError(f"{p}.t", "expected a number")
            if not t > prev:
                raise FormatError(f"{p}.t", f"time {t} does not exceed the previous time {prev}")
            prev = float(t)
            key = "space" if "space" in st else "sample_space"
            if key not in st:
                raise FormatError(f"{p}.space", "missing")
            times.append(float(t))
            spaces.append(read_sample_space(st[key], f"{p}.{key}", dim))
        queries = tree.get("queries", [])
        if not isinstance(queries, list):
            raise FormatError("queries", "expected a list")
        for i, q in enumerate(queries):
            if not isinstance(q, dict) or q.get("kind") not in QUERY_KINDS:
                raise FormatError(f"queries[{i}].kind", f"expected one of {', '.join(QUERY_KINDS)}")
        return cls(dim, state, h, float(t0), tuple(times), tuple(spaces), tuple(queries), tree)

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        return cls.from_dict(read_json(path))

    def to_dict(self) -> dict:
        return self.source

    def dumps(self) -> str:
        return json.dumps(self.source, indent=2, sort_keys=True) + "\n"

    @property
    def hash(self) -> str:
        blob = json.dumps(self.source, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def family(self) -> Family:
        if not self.spaces:
            raise FormatError("steps", "at least one step is needed for a history analysis")
        return Family.build(self.state, self.spaces, self.times, self.hamiltonian, self.t0)

    def state_at(self, step: int | None) -> StateDensity:
        """State evolved to the time of ``step`` (0-based), or the initial state."""
        if step is None:
            return self.state
        return self.state.evolved(nm.propagator(self.hamiltonian, self.times[step], self.t0))

    def framework(self, step: int) -> FrameworkStatic:
        return FrameworkStatic(self.spaces[step])


def read_json(path: str | Path) -> Any:
    """Parse JSON, turning syntax errors into ``file:line:col`` diagnostics."""
    path = resolve(path)
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc


def bundled_names() -> list[str]:
    root = resources.files("cqt") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve(path: str | Path) -> Path:
    """Map ``@name`` to a bundled scenario file; other paths pass through."""
    s = str(path)
    if s.startswith(BUNDLED_PREFIX):
        name = s[len(BUNDLED_PREFIX) :]
        p = resources.files("cqt") / "scenarios" / f"{name}.json"
        if not p.is_file():
            raise FormatError("", f"no bundled scenario {name!r} (have: {', '.join(bundled_names())})")
        return Path(str(p))
    return Path(s)
