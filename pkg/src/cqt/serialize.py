"""JSON-compatible encodings of complex numbers, matrices, subspaces and states.

Complex scalars are ``[re, im]`` pairs (a bare real number is also read);
matrices are row-major nested lists.  Readers raise :class:`FormatError`
carrying the path of the offending field, e.g. ``steps[1].sample_space``.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .errors import CQTError
from .lattice import Subspace
from .static import SampleSpace, StateDensity, validate_sample_space


class FormatError(CQTError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def read_complex(x, path: str = "") -> complex:
    if _is_number(x):
        return complex(float(x), 0.0)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(_is_number(v) for v in x):
        z = complex(float(x[0]), float(x[1]))
        if not np.isfinite(z):
            raise FormatError(path, "non-finite number")
        return z
    raise FormatError(path, f"expected a number or [re, im] pair, got {x!r}")


def read_vector(x, path: str = "", dim: int | None = None) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise FormatError(path, "expected a non-empty list of complex entries")
    v = np.array([read_complex(c, f"{path}[{i}]") for i, c in enumerate(x)], dtype=complex)
    if dim is not None and v.size != dim:
        raise FormatError(path, f"expected {dim} entries, got {v.size}")
    return v


def read_matrix(x, path: str = "", dim: int | None = None) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise FormatError(path, "expected a non-empty list of rows")
    rows = [read_vector(r, f"{path}[{i}]") for i, r in enumerate(x)]
    width = rows[0].size
    for i, r in enumerate(rows):
        if r.size != width:
            raise FormatError(f"{path}[{i}]", f"row has {r.size} entries, expected {width}")
    m = np.stack(rows)
    if dim is not None and m.shape != (dim, dim):
        raise FormatError(path, f"expected a {dim}x{dim} matrix, got {m.shape[0]}x{m.shape[1]}")
    return m


def write_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def write_vector(v) -> list:
    return [write_complex(z) for z in np.asarray(v).ravel()]


def write_matrix(m) -> list:
    return [write_vector(row) for row in np.asarray(m)]


def read_subspace(x, path: str = "", dim: int | None = None) -> Subspace:
    """Read ``{"basis": [...]}`` or ``{"projector": [[...]]}``."""
    if not isinstance(x, dict):
        raise FormatError(path, "expected an object with 'basis' or 'projector'")
    dim = x.get("ambient_dim", dim)
    if "ambient_dim" in x and not isinstance(x["ambient_dim"], int):
        raise FormatError(f"{path}.ambient_dim", "expected an integer")
    try:
        if "projector" in x:
            return Subspace.from_projector(read_matrix(x["projector"], f"{path}.projector", dim))
        if "basis" in x:
            vecs = x["basis"]
            if not isinstance(vecs, list):
                raise FormatError(f"{path}.basis", "expected a list of vectors")
            if not vecs:
                if dim is None:
                    raise FormatError(path, "empty basis needs ambient_dim")
                return Subspace.zero(dim)
            cols = [read_vector(v, f"{path}.basis[{i}]", dim) for i, v in enumerate(vecs)]
            return Subspace.span(cols)
    except FormatError:
        raise
    except (CQTError, ValueError) as exc:
        raise FormatError(path, str(exc)) from exc
    raise FormatError(path, "expected 'basis' or 'projector'")


def write_subspace(s: Subspace) -> dict:
    return {"ambient_dim": s.ambient_dim, "basis": [write_vector(s.basis[:, k]) for k in range(s.rank)]}


def read_sample_space(x, path: str = "", dim: int | None = None) -> SampleSpace:
    """Read ``{"dim": d, "members": [subspace, ...]}``."""
    if not isinstance(x, dict) or "members" not in x:
        raise FormatError(path, "expected an object with 'members'")
    dim = x.get("dim", dim)
    members = x["members"]
    if not isinstance(members, list) or not members:
        raise FormatError(f"{path}.members", "expected a non-empty list")
    subs = [read_subspace(m, f"{path}.members[{i}]", dim) for i, m in enumerate(members)]
    try:
        return validate_sample_space(subs)
    except CQTError as exc:
        raise FormatError(path, str(exc)) from exc


def write_sample_space(s: SampleSpace) -> dict:
    return {"dim": s.ambient_dim, "members": [write_subspace(m) for m in s.members]}


def read_state(x, path: str = "", dim: int | None = None) -> StateDensity:
    """Read ``{"pure": vector}`` or ``{"mixed": matrix}``."""
    if not isinstance(x, dict) or not ({"pure", "mixed"} & set(x)):
        raise FormatError(path, "expected an object with 'pure' or 'mixed'")
    try:
        if "pure" in x:
            return StateDensity.pure(read_vector(x["pure"], f"{path}.pure", dim))
        return StateDensity(read_matrix(x["mixed"], f"{path}.mixed", dim))
    except FormatError:
        raise
    except (CQTError, ValueError) as exc:
        raise FormatError(path, str(exc)) from exc


def write_state(rho: StateDensity) -> dict:
    if rho.is_pure():
        return {"pure": write_vector(rho.state_vector())}
    return {"mixed": write_matrix(rho.matrix)}


def canonical(tree: Any) -> Any:
    """Normalize numbers in a JSON tree so that reloading is an identity."""
    if isinstance(tree, dict):
        return {str(k): canonical(v) for k, v in tree.items()}
    if isinstance(tree, (list, tuple)):
        return [canonical(v) for v in tree]
    if isinstance(tree, (bool, str)) or tree is None:
        return tree
    if isinstance(tree, (int, np.integer)):
        return int(tree)
    if isinstance(tree, (float, np.floating)):
        return float(tree)
    if isinstance(tree, (complex, np.complexfloating)):
        return write_complex(tree)
    raise TypeError(f"cannot serialize {type(tree).__name__}")
