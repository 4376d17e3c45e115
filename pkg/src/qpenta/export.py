"""CSV exports: operator dumps, magnitude heatmaps, kernels and cocycle tables."""

from __future__ import annotations

import csv

import numpy as np

from .cocycles import write_cocycle_table
from .groups import XPoint
from .linalg import OperatorMatrix, WeightedComposition
from .pentagon import theta_from_group_cocycle, write_theta_table

FOOTER_LABEL = "row_sum_sq"


def _dense(obj) -> np.ndarray:
    if isinstance(obj, WeightedComposition):
        obj = obj.to_operator()
    if isinstance(obj, OperatorMatrix):
        return obj.matrix
    return np.atleast_2d(np.asarray(obj))


def export_heatmap(obj, path) -> np.ndarray:
    """Write the grid of entry magnitudes, then a footer row of per-row sums of squared magnitudes."""
    m = np.abs(_dense(obj))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in m:
            w.writerow([repr(float(x)) for x in row])
        w.writerow([FOOTER_LABEL] + [repr(float(x)) for x in (m ** 2).sum(axis=1)])
    return m


def read_heatmap(path) -> tuple[np.ndarray, np.ndarray]:
    """(grid, footer row sums) from a heatmap CSV."""
    rows, footer = [], None
    with open(path, encoding="utf-8") as fh:
        for rec in csv.reader(fh):
            if rec and rec[0] == FOOTER_LABEL:
                footer = np.array([float(x) for x in rec[1:]])
            elif rec:
                rows.append([float(x) for x in rec])
    return np.array(rows), footer


def export_operator(obj, path) -> int:
    """Dump the nonzero entries as row,col,re,im; returns the number of entries."""
    m = _dense(obj)
    r, c = np.nonzero(m)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "re", "im"])
        for i, j in zip(r, c):
            z = m[i, j]
            w.writerow([int(i), int(j), repr(float(z.real)), repr(float(z.imag))])
    return len(r)


def read_operator(path, shape) -> np.ndarray:
    m = np.zeros(shape, dtype=complex)
    with open(path, encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            m[int(rec["row"]), int(rec["col"])] = complex(float(rec["re"]), float(rec["im"]))
    return m


def fourier_delta_kernel(engine, x: XPoint) -> np.ndarray:
    """K_omega(f) for the f whose partial Fourier transform is the delta at x."""
    e = engine.X.basis(engine.X.index[x])
    return engine.kn_quantize(engine.fourier_inv.apply(e))


OPERATORS = {
    "fourier": lambda E: E.fourier,
    "omega": lambda E: E.omega_cocycle,
    "omega-trivial": lambda E: E.omega_trivial,
    "u-factor": lambda E: E.omega_phase_factor,
    "galois": lambda E: E.galois_formula,
    "galois-assembly": lambda E: E.galois_assembly,
    "w-hat": lambda E: E.w_hat,
    "mu": lambda E: E.theta_twist(),
    "mu-dmu": lambda E: E.dmu,
    "quantization": lambda E: E.quantization,
    "V": lambda E: E.V,
    "U": lambda E: E.U,
    "T": lambda E: E.T,
}


def _parse_point(backend, text: str) -> XPoint:
    """'q=2,xi=1' or 'q=1;2,xi=0;1' (semicolons separate product coordinates)."""
    fields = dict(part.split("=", 1) for part in text.split(","))

    def coord(s):
        vals = [int(c) for c in s.split(";")]
        return vals[0] if backend.rank == 1 else tuple(vals)

    return XPoint(coord(fields["q"]), coord(fields["xi"]))


def export_object(backend, omega, name: str, path) -> str:
    """Export a named object; returns a one-line description of what was written.

    Names: ``operator:<op>``, ``heatmap:<op>``, ``kernel:q=..,xi=..``,
    ``theta-table``, ``cocycle-table``; ``<op>`` is one of OPERATORS.
    """
    if name == "cocycle-table":
        write_cocycle_table(omega, path)
        return f"cocycle table for {omega.spec}"
    if name == "theta-table":
        n = write_theta_table(theta_from_group_cocycle(omega), path)
        return f"theta table with {n} rows"
    from .operators import FiniteEngine

    kind, _, arg = name.partition(":")
    E = FiniteEngine(backend, omega)
    if kind == "kernel":
        k = fourier_delta_kernel(E, _parse_point(backend, arg))
        export_heatmap(k, path)
        return f"kernel heatmap {k.shape[0]}x{k.shape[1]}"
    if kind in ("operator", "heatmap"):
        if arg not in OPERATORS:
            raise ValueError(f"unknown operator {arg!r}; choose from {', '.join(sorted(OPERATORS))}")
        op = OPERATORS[arg](E)
        if kind == "operator":
            n = export_operator(op, path)
            return f"{n} nonzero entries of {arg}"
        m = export_heatmap(op, path)
        return f"heatmap {m.shape[0]}x{m.shape[1]} of {arg}"
    raise ValueError(f"unknown export object {name!r}")
