"""Reading and writing system descriptions in JSON or TOML.

A file holds ``n``, ``h`` and any of

``atoms``      list of ``{tau, B}`` (``B`` an ``n x n`` matrix or a scalar when ``n = 1``)
``densities``  list of ``{a, b, poly}``; ``poly[p]`` multiplies ``(s - a)**p``
``terms``      list of ``{coef, out, factors}`` with ``factors = [[theta, component], ...]``
``lip_global`` global Lipschitz constant of the nonlinearity
``lip_ball``   ``{coef, power}`` meaning ``Lip_rho(R) <= coef * rho**power``
``label``      free text

Linear ``terms`` (one factor) are merged into the atoms.
"""

from __future__ import annotations

import hashlib
import json
import re
import sys
from pathlib import Path
from typing import Union

import numpy as np

from .errors import InvalidSystem, SystemFileError
from .model import DDESystem, PolynomialDDE, PolyTerm, _to_description, linearize

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

__all__ = ["load_system", "parse_system", "dump_system", "save_system", "file_digest"]

_TOML_POS = re.compile(r"line (\d+), column (\d+)")


def file_digest(path: Union[str, Path]) -> str:
    """SHA-256 of the file contents."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _locate(text: str, key: str):
    """Line and column of the first occurrence of ``key`` (best effort)."""
    for i, line in enumerate(text.splitlines(), start=1):
        m = re.search(rf'(^|[\s"{{,]){re.escape(key)}("?\s*[:=])', line)
        if m:
            return i, m.start(0) + 1 + (m.group(1) != "")
    return None, None


def _matrix(value, n: int, where: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0 and n == 1:
        arr = arr.reshape(1, 1)
    if arr.shape != (n, n):
        raise InvalidSystem(f"{where}: expected an {n}x{n} matrix, got shape {arr.shape}")
    return arr


def _build(data: dict) -> DDESystem:
    for key in ("n", "h"):
        if key not in data:
            raise InvalidSystem(f"missing required field {key!r}")
    n, h = int(data["n"]), float(data["h"])
    terms: list[PolyTerm] = []
    for k, at in enumerate(data.get("atoms", [])):
        B = _matrix(at["B"], n, f"atoms[{k}]")
        for i, j in zip(*np.nonzero(B)):
            terms.append(PolyTerm(float(B[i, j]), int(i), ((-float(at["tau"]), int(j)),)))
    for t in data.get("terms", []):
        factors = tuple((float(th), int(c)) for th, c in t.get("factors", []))
        terms.append(PolyTerm(float(t["coef"]), int(t.get("out", 0)), factors))
    dens = []
    for k, d in enumerate(data.get("densities", [])):
        poly = [_matrix(m, n, f"densities[{k}].poly") for m in d["poly"]]
        dens.append((float(d["a"]), float(d["b"]), poly))
    lip_ball = None
    if "lip_ball" in data:
        c, p = float(data["lip_ball"]["coef"]), float(data["lip_ball"]["power"])
        lip_ball = lambda rho, c=c, p=p: c * rho**p  # noqa: E731
    lip = data.get("lip_global")
    desc = PolynomialDDE(
        n=n,
        h=h,
        terms=tuple(terms),
        densities=tuple(dens),
        label=str(data.get("label", "")),
        lip_global=None if lip is None else float(lip),
        lip_ball=lip_ball,
    )
    return linearize(desc)


def parse_system(text: str, fmt: str = "json") -> DDESystem:
    """Build a :class:`DDESystem` from JSON or TOML text.

    Raises
    ------
    SystemFileError
        With line and column for syntax errors and, where it can be
        located, for invalid fields.
    """
    try:
        data = json.loads(text) if fmt == "json" else tomllib.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFileError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    except tomllib.TOMLDecodeError as exc:
        m = _TOML_POS.search(str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise SystemFileError(f"invalid TOML: {exc}", line, col) from exc
    if not isinstance(data, dict):
        raise SystemFileError("top level must be an object", 1, 1)
    try:
        return _build(data)
    except (InvalidSystem, KeyError, TypeError, ValueError) as exc:
        msg = str(exc) if not isinstance(exc, KeyError) else f"missing field {exc.args[0]!r}"
        key = None
        m = re.search(r"'(\w+)'|^(\w+)", msg)
        for cand in ("atoms", "densities", "terms", "lip_ball", "h", "n"):
            if cand in msg:
                key = cand
                break
        if key is None and m:
            key = m.group(1) or m.group(2)
        line, col = _locate(text, key) if key else (None, None)
        raise SystemFileError(f"invalid system: {msg}", line, col) from exc


def load_system(path: Union[str, Path]) -> DDESystem:
    """Read a ``.json`` or ``.toml`` system file."""
    path = Path(path)
    fmt = "toml" if path.suffix.lower() == ".toml" else "json"
    return parse_system(path.read_text(), fmt)


def dump_system(system: DDESystem) -> dict:
    """JSON-ready description (``lip_ball`` callables are not serialized)."""
    desc = _to_description(system)
    out: dict = {"label": desc.label, "n": desc.n, "h": desc.h}
    out["terms"] = [
        {"coef": t.coef, "out": t.out, "factors": [[float(th), int(c)] for th, c in t.factors]}
        for t in desc.terms
    ]
    out["densities"] = [
        {"a": a, "b": b, "poly": np.asarray(c).tolist()} for a, b, c in desc.densities
    ]
    if desc.lip_global is not None:
        out["lip_global"] = desc.lip_global
    return out


def save_system(system: DDESystem, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(dump_system(system), indent=2, sort_keys=True) + "\n")
