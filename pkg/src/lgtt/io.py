"""
File formats and run manifests.

* polynomial and family files: JSON documents with ``vars``, ``terms`` and,
  for families, ``deformers``, ``t`` and ``tau`` (see :mod:`lgtt.poly`);
* complex CSV: every complex column ``c`` is stored as ``c_re,c_im``;
* thimble CSV: ``s, re_z, im_z, re_tauf, im_tauf``;
* probe CSV: ``radius, min_value`` and the argmin point as re/im pairs;
* tensor CSV: one row ``a, b, c, re, im`` per entry (1-based indices);
* Milnor algebra text: ``mu``, basis exponents and the reduction table
  ``x_i * e_a -> normal form``;
* eigenfield text: ``key: value`` grid metadata, then whitespace columns
  ``x y abs_psi`` followed by re/im of every component, row-major ``[iy, ix]``;
* reports: JSON objects (complex numbers as ``[re, im]``) or aligned
  ``key: value`` text;
* manifests: ``<output>.manifest.json`` next to every numeric output.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .poly import DeformationFamily, LaurentPolynomial

__all__ = [
    "RunManifest",
    "load_family",
    "save_family",
    "write_complex_csv",
    "read_complex_csv",
    "write_thimble_csv",
    "read_thimble_csv",
    "write_probe_csv",
    "write_tensor_csv",
    "read_tensor_csv",
    "write_milnor_algebra",
    "write_eigenfield",
    "read_eigenfield",
    "to_jsonable",
    "write_report",
    "read_report",
    "format_text",
    "file_digest",
]


def load_family(path) -> DeformationFamily:
    """Read a polynomial or family file; a bare polynomial becomes a family without deformers."""
    d = json.loads(Path(path).read_text())
    if "vars" not in d or "terms" not in d:
        raise ValueError(f"{path}: missing 'vars' or 'terms'")
    return DeformationFamily.from_dict(d)


def save_family(path, family) -> None:
    d = family.to_dict()
    Path(path).write_text(json.dumps(d, indent=2) + "\n")


# --------------------------------------------------------------------------
# CSV

def write_complex_csv(path, rows, columns: Sequence[str] | None = None, index: Sequence | None = None,
                      index_name: str = "row") -> None:
    """Write a complex matrix; row ``i`` becomes ``index[i], c0_re, c0_im, ...``."""
    A = np.atleast_2d(np.asarray(rows, dtype=complex))
    columns = list(columns) if columns is not None else [f"c{j + 1}" for j in range(A.shape[1])]
    index = list(index) if index is not None else list(range(1, A.shape[0] + 1))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([index_name] + [f"{c}_{p}" for c in columns for p in ("re", "im")])
        for i, row in zip(index, A):
            w.writerow([i] + [repr(float(x)) for z in row for x in (z.real, z.imag)])


def read_complex_csv(path):
    """Inverse of :func:`write_complex_csv`; returns ``(matrix, columns, index)``."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        head = next(r)
        body = [row for row in r if row]
    names = head[1:]
    if len(names) % 2 or any(not (a.endswith("_re") and b.endswith("_im")) for a, b in zip(names[::2], names[1::2])):
        raise ValueError(f"{path}: columns are not re/im pairs")
    cols = [a[:-3] for a in names[::2]]
    vals = np.array([[float(x) for x in row[1:]] for row in body]).reshape(len(body), -1)
    return vals[:, ::2] + 1j * vals[:, 1::2], cols, [row[0] for row in body]


THIMBLE_COLUMNS = ("s", "re_z", "im_z", "re_tauf", "im_tauf")


def write_thimble_csv(path, thimble) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(THIMBLE_COLUMNS)
        for row in thimble.table():
            w.writerow([repr(float(x)) for x in row])


def read_thimble_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        head = tuple(next(r))
        if head != THIMBLE_COLUMNS:
            raise ValueError(f"{path}: unexpected header {head}")
        return np.array([[float(x) for x in row] for row in r if row])


def write_probe_csv(path, probe) -> None:
    """Radial probe table of a tameness certificate."""
    n = len(probe.argmin[0]) if probe.argmin else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["radius", "min_value"] + [f"x{i + 1}_{p}" for i in range(n) for p in ("re", "im")])
        for r, v, z in probe.rows():
            w.writerow([repr(float(r)), repr(float(v))] + [repr(float(x)) for c in z for x in (complex(c).real, complex(c).imag)])


def write_tensor_csv(path, A) -> None:
    A = np.asarray(A, dtype=complex)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"i{k + 1}" for k in range(A.ndim)] + ["re", "im"])
        for idx in np.ndindex(A.shape):
            w.writerow([i + 1 for i in idx] + [repr(float(A[idx].real)), repr(float(A[idx].imag))])


def read_tensor_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        head = next(r)
        rows = [row for row in r if row]
    k = len(head) - 2
    idx = np.array([[int(x) - 1 for x in row[:k]] for row in rows])
    A = np.zeros(tuple(idx.max(axis=0) + 1), dtype=complex)
    for i, row in zip(idx, rows):
        A[tuple(i)] = float(row[k]) + 1j * float(row[k + 1])
    return A


def write_milnor_algebra(path, algebra) -> None:
    """Structured text: polynomial, ``mu``, basis exponents and the reduction table."""
    f = algebra.source
    lines = [f"polynomial: {f.to_string()}", f"vars: {' '.join(f.vars)}", f"mu: {algebra.mu}"]
    if algebra.finite:
        lines.append("basis:")
        lines += [f"  e{a + 1}: {list(e)}  {lab}" for a, (e, lab) in
                  enumerate(zip(algebra.monomial_basis, algebra.basis_labels()))]
        lines.append("reduction:")
        for v in f.vars:
            x = LaurentPolynomial.monomial(f.vars, tuple(int(u == v) for u in f.vars))
            for a, b in enumerate(algebra.basis_polynomials()):
                lines.append(f"  {v} * e{a + 1} -> {algebra.normal_form(x * b).to_string()}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_eigenfield(path, field, eigenvalue=None) -> None:
    """Grid metadata and row-major samples of a :class:`lgtt.spectral.FormField`."""
    g = field.grid
    z = g.mesh().ravel()
    cols = [z.real, z.imag, field.modulus().ravel()]
    names = ["x", "y", "abs_psi"]
    for k, c in enumerate(field.components):
        cols += [c.real.ravel(), c.imag.ravel()]
        names += [f"c{k + 1}_re", f"c{k + 1}_im"]
    head = [f"degree: {field.degree}", f"R: {g.R!r}", f"h: {g.h!r}", f"side: {g.side}",
            "order: row-major [iy, ix]"]
    if eigenvalue is not None:
        head.append(f"eigenvalue: {float(np.real(eigenvalue))!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(head) + "\n\n" + " ".join(names) + "\n")
        np.savetxt(fh, np.column_stack(cols), fmt="%.17g")


def read_eigenfield(path):
    """Inverse of :func:`write_eigenfield`; returns ``(FormField, metadata)``."""
    from .spectral import FormField, SpectralGrid

    text = Path(path).read_text()
    head, body = text.split("\n\n", 1)
    meta = dict(line.split(": ", 1) for line in head.splitlines())
    grid = SpectralGrid(float(meta["R"]), float(meta["h"]))
    data = np.loadtxt(body.splitlines()[1:], ndmin=2)
    n = grid.side
    comps = tuple((data[:, 3 + 2 * k] + 1j * data[:, 4 + 2 * k]).reshape(n, n)
                  for k in range((data.shape[1] - 3) // 2))
    return FormField(int(meta["degree"]), comps, grid), meta


# --------------------------------------------------------------------------
# reports

def to_jsonable(x):
    """Convert numpy arrays, complex numbers, Fractions and dataclasses to JSON values."""
    from fractions import Fraction

    if isinstance(x, Mapping):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if hasattr(x, "__dataclass_fields__"):
        return {k: to_jsonable(getattr(x, k)) for k in x.__dataclass_fields__}
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return str(x)


def write_report(path, report: Mapping) -> None:
    Path(path).write_text(json.dumps(to_jsonable(report), indent=2, allow_nan=True) + "\n")


def read_report(path) -> dict:
    return json.loads(Path(path).read_text())


def _fmt(v) -> str:
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.10g}{'+' if v.imag >= 0 else '-'}{abs(v.imag):.10g}i"
    if isinstance(v, (float, np.floating)):
        return f"{v:.10g}"
    if isinstance(v, np.ndarray):
        if v.ndim == 2:
            return "\n" + "\n".join("  " + "  ".join(_fmt(x) for x in row) for row in v)
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def format_text(report: Mapping) -> str:
    """``key: value`` lines; matrices go on indented lines below their key."""
    return "".join(f"{k}: {_fmt(v)}\n" for k, v in report.items())


# --------------------------------------------------------------------------
# manifests

def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Provenance record written next to every numeric output."""

    command: list
    inputs: dict = field(default_factory=dict)          # path -> sha256
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    perturbations: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    version: str = __version__
    started: float = field(default_factory=time.time)
    elapsed: float = 0.0

    def add_input(self, path) -> None:
        self.inputs[str(path)] = file_digest(path)

    def finish(self) -> None:
        self.elapsed = time.time() - self.started

    def to_dict(self) -> dict:
        return to_jsonable(asdict(self))

    def write(self, output_path) -> Path:
        p = Path(str(output_path) + ".manifest.json")
        self.outputs = sorted(set(self.outputs) | {os.path.basename(str(output_path))})
        p.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return p

    @classmethod
    def read(cls, path) -> "RunManifest":
        d = json.loads(Path(path).read_text())
        return cls(**d)
