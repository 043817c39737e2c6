"""System-spec files (JSON) and CSV output.

System-spec layout (row-major matrix nesting; "f" may be omitted for f = 0):

    { "n": int, "m": int,
      "A": [[...]],
      "B": {"prefix": [[[...]]], "tail": [[...]]},
      "f": {"prefix": [[...]], "tail": [...]},
      "phi": [[...]] }            # phi listed from k = -m to k = 0

All floats in CSV output are printed with 17 significant digits so a
round trip through text reproduces the exact double.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DelayExpError, SystemSpecError
from .systems import (
    DEFAULT_RCOND_THRESHOLD,
    DelaySystem,
    InitialFunction,
    MatrixSequence,
    VectorSequence,
)


def _require(mapping, key, path):
    if key not in mapping:
        raise SystemSpecError(f"missing required field '{path}'", field=path)
    return mapping[key]


def _as_int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SystemSpecError(f"field '{path}': expected an integer, got {value!r}", field=path)
    return value


def system_from_dict(data, rcond_threshold: float = DEFAULT_RCOND_THRESHOLD) -> DelaySystem:
    """Build a validated DelaySystem from the system-spec mapping."""
    if not isinstance(data, dict):
        raise SystemSpecError(f"system spec must be an object, got {type(data).__name__}")
    n = _as_int(_require(data, "n", "n"), "n")
    m = _as_int(_require(data, "m", "m"), "m")
    if n < 1:
        raise SystemSpecError(f"field 'n': must be >= 1, got {n}", field="n")

    b_raw = _require(data, "B", "B")
    if not isinstance(b_raw, dict):
        raise SystemSpecError("field 'B': expected an object with 'prefix' and 'tail'", field="B")
    f_raw = data.get("f")
    if f_raw is not None and not isinstance(f_raw, dict):
        raise SystemSpecError("field 'f': expected an object with 'prefix' and 'tail'", field="f")

    try:
        a = np.array(_require(data, "A", "A"), dtype=float)
    except (TypeError, ValueError) as exc:
        raise SystemSpecError(f"field 'A': not a numeric matrix ({exc})", field="A") from exc

    def matrix_seq(raw, path):
        prefix_raw = raw.get("prefix", [])
        tail_raw = _require(raw, "tail", f"{path}.tail")
        try:
            prefix = tuple(np.array(mat, dtype=float) for mat in prefix_raw)
            tail = np.array(tail_raw, dtype=float)
        except (TypeError, ValueError) as exc:
            raise SystemSpecError(f"field '{path}': not numeric ({exc})", field=path) from exc
        return MatrixSequence(prefix=prefix, tail=tail)

    def vector_seq(raw, path):
        if raw is None:
            return VectorSequence.zero(n)
        prefix_raw = raw.get("prefix", [])
        tail_raw = raw.get("tail")
        try:
            prefix = tuple(np.array(vec, dtype=float) for vec in prefix_raw)
            tail = np.zeros(n) if tail_raw is None else np.array(tail_raw, dtype=float)
        except (TypeError, ValueError) as exc:
            raise SystemSpecError(f"field '{path}': not numeric ({exc})", field=path) from exc
        return VectorSequence(prefix=prefix, tail=tail)

    try:
        phi_values = np.array(_require(data, "phi", "phi"), dtype=float)
    except (TypeError, ValueError) as exc:
        raise SystemSpecError(f"field 'phi': not a numeric array ({exc})", field="phi") from exc

    try:
        b = matrix_seq(b_raw, "B")
        f = vector_seq(f_raw, "f")
        phi = InitialFunction(m=m, values=phi_values)
        system = DelaySystem(A=a, m=m, B=b, f=f, phi=phi, rcond_threshold=rcond_threshold)
    except SystemSpecError:
        raise
    except DelayExpError as exc:
        raise SystemSpecError(str(exc)) from exc
    if system.dim != n:
        raise SystemSpecError(
            f"field 'n': declared n={n} but A is {system.dim}x{system.dim}", field="n"
        )
    return system


def system_to_dict(system: DelaySystem) -> dict:
    return {
        "n": system.dim,
        "m": system.m,
        "A": system.A.tolist(),
        "B": {
            "prefix": [mat.tolist() for mat in system.B.prefix],
            "tail": system.B.tail.tolist(),
        },
        "f": {
            "prefix": [vec.tolist() for vec in system.f.prefix],
            "tail": system.f.tail.tolist(),
        },
        "phi": system.phi.values.tolist(),
    }


def load_system(path, rcond_threshold: float = DEFAULT_RCOND_THRESHOLD) -> DelaySystem:
    """Read and validate a system-spec file; SystemSpecError on any problem."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SystemSpecError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SystemSpecError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    return system_from_dict(data, rcond_threshold=rcond_threshold)


def save_system(system: DelaySystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_dict(system), fh, indent=2)
        fh.write("\n")


def format_float(value: float) -> str:
    """17-significant-digit decimal: round-trips any finite double."""
    return format(float(value), ".17g")


def write_trajectory_csv(path, trajectory) -> None:
    n = trajectory.dim
    header = "k," + ",".join(f"x_{i + 1}" for i in range(n))
    lines = [header]
    for k in trajectory.ks():
        row = trajectory.value(k)
        lines.append(f"{k}," + ",".join(format_float(v) for v in row))
    _write_lines(path, lines)


def read_trajectory_csv(path, m: int):
    """Inverse of write_trajectory_csv (m must be supplied; CSV stores only k)."""
    from .systems import Trajectory

    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    rows = [[float(tok) for tok in line.split(",")[1:]] for line in lines[1:]]
    return Trajectory(m=m, states=np.array(rows))


def write_diff_csv(path, report) -> None:
    lines = ["k,abs_err,rel_err"]
    for k, abs_err, rel_err in zip(report.ks(), report.abs_err, report.rel_err):
        lines.append(f"{k},{format_float(abs_err)},{format_float(rel_err)}")
    _write_lines(path, lines)


def write_fundamental_csv(path, fundamental) -> None:
    """Phi(k) as "k,row,col,value" blocks for k = -m-1 .. k_max."""
    n = fundamental.dim
    lines = ["k,row,col,value"]
    for k in fundamental.ks():
        mat = fundamental.value(k)
        for i in range(n):
            for j in range(n):
                lines.append(f"{k},{i},{j},{format_float(mat[i, j])}")
    _write_lines(path, lines)


def write_bench_csv(path, rows) -> None:
    lines = ["n,m,k,method,seconds"]
    for n, m, k, method, seconds in rows:
        lines.append(f"{n},{m},{k},{method},{format_float(seconds)}")
    _write_lines(path, lines)


def _write_lines(path, lines) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
