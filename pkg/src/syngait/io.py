"""CSV/JSON readers and writers.

Numbers are written with 17 significant digits so every file reads back to
the exact same floats.
"""

import csv
import json
import os
from collections import OrderedDict

import numpy as np

from .exceptions import GridMismatch, IoError, NormViolation, ParseError
from .quaternion import NORM_TOL
from .sample import QtsSample

QTS_HEADER = ["subject_id", "t", "qw", "qx", "qy", "qz"]
COMPONENTS = ("qw", "qx", "qy", "qz")


def fmt(x):
    return f"{float(x):.17g}"


def _open_write(path):
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _open_read(path):
    try:
        return open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def read_header(path):
    with _open_read(path) as fh:
        return next(csv.reader(fh), [])


def read_qts_csv(path):
    """Read a long-format QTS file into a :class:`QtsSample`.

    Every subject must cover the same time grid. Quaternions are renormalized
    and each series is flipped, if needed, to start with a non-negative
    scalar part.
    """
    rows = OrderedDict()
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != QTS_HEADER:
            raise ParseError(f"expected header {','.join(QTS_HEADER)}, got {header}", line=1)
        for line, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 6:
                raise ParseError(f"expected 6 fields, got {len(rec)}", line=line)
            try:
                t = float(rec[1])
                q = [float(v) for v in rec[2:]]
            except ValueError as exc:
                raise ParseError(str(exc), line=line) from exc
            if not np.all(np.isfinite([t, *q])):
                raise ParseError("non-finite value", line=line)
            norm = float(np.linalg.norm(q))
            if abs(norm - 1.0) > NORM_TOL:
                raise NormViolation(f"line {line}: quaternion norm {norm:.9g} deviates from 1 by more than {NORM_TOL:g}")
            series = rows.setdefault(rec[0], {})
            if t in series:
                raise ParseError(f"duplicate time {rec[1]} for subject {rec[0]}", line=line)
            series[t] = q
    if len(rows) < 2:
        raise ParseError("file must contain at least two subjects")
    ids = list(rows)
    grid = np.array(sorted(rows[ids[0]]))
    values = []
    for sid in ids:
        ts = sorted(rows[sid])
        if len(ts) != grid.size or not np.array_equal(ts, grid):
            missing = sorted(set(grid) - set(ts))
            extra = sorted(set(ts) - set(grid))
            raise GridMismatch(f"subject {sid} does not share the common grid "
                               f"(missing t={missing[:5]}, unexpected t={extra[:5]})")
        q = np.array([rows[sid][t] for t in ts])
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        if q[0, 0] < 0:
            q = -q
        values.append(q)
    return QtsSample(grid=grid, values=np.stack(values), ids=ids)


def write_qts_csv(sample, path):
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(QTS_HEADER)
        for sid, series in zip(sample.ids, sample.values):
            for t, q in zip(sample.grid, series):
                w.writerow([sid, fmt(t), *map(fmt, q)])


def write_scores_csv(ids, scores, path):
    scores = np.asarray(scores, dtype=float)
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(["subject_id"] + [f"pc{k + 1}" for k in range(scores.shape[1])])
        for sid, row in zip(ids, scores):
            w.writerow([sid, *map(fmt, row)])


def read_scores_csv(path):
    """Return ``(ids, scores)`` from a ``subject_id,pc1,...`` file."""
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "subject_id" or len(header) < 2:
            raise ParseError("expected header subject_id,pc1,...", line=1)
        ids, rows = [], []
        for line, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(rec)}", line=line)
            try:
                rows.append([float(v) for v in rec[1:]])
            except ValueError as exc:
                raise ParseError(str(exc), line=line) from exc
            ids.append(rec[0])
    return ids, np.array(rows, dtype=float).reshape(len(rows), len(header) - 1)


def write_json(obj, path):
    with _open_write(path) as fh:
        json.dump(obj, fh, indent=2, allow_nan=False)
        fh.write("\n")


def model_summary(model):
    inertia = model.inertia_percent()
    return {
        "n_components": int(model.n_components),
        "n_points": int(model.grid.size),
        "degenerate": bool(model.degenerate),
        "eigenvalues": [float(v) for v in model.eigenvalues],
        "inertia_percent": [float(v) for v in inertia],
        "cumulative_inertia_percent": [float(v) for v in np.cumsum(inertia)],
        "zero_inertia_components": [k + 1 for k in np.flatnonzero(inertia == 0).tolist()],
    }


def write_tuning_csv(report, path):
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(["rank", "alpha0", "gamma", "tau", "mean_dmin", "mean_dmax", "passed"])
        for rank, r in enumerate(report.rows, start=1):
            w.writerow([rank, fmt(r.alpha0), r.gamma, r.tau, fmt(r.mean_dmin), fmt(r.mean_dmax), int(r.passed)])


def write_plotdata_qts(samples, path):
    """Long table ``source,subject_id,t,component,value`` for QTS curve plots."""
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(["source", "subject_id", "t", "component", "value"])
        for source, sample in samples.items():
            for sid, series in zip(sample.ids, sample.values):
                for c, name in enumerate(COMPONENTS):
                    for t, v in zip(sample.grid, series[:, c]):
                        w.writerow([source, sid, fmt(t), name, fmt(v)])


def write_plotdata_scores(score_sets, path):
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(["source", "subject_id", "pc1", "pc2"])
        for source, (ids, F) in score_sets.items():
            for sid, row in zip(ids, F):
                pc2 = row[1] if row.size > 1 else 0.0
                w.writerow([source, sid, fmt(row[0]), fmt(pc2)])


def write_plotdata_frobenius(report, path, method="syngait", run=0):
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(["method", "run", "k", "frobenius"])
        for k, v in sorted(report.frobenius.items()):
            w.writerow([method, run, k, fmt(v)])


def write_outputs(out_dir, original, synthetic, scores, synthetic_scores, model, report=None, method="syngait"):
    """Write the standard set of synthesis outputs into ``out_dir``."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out_dir}: {exc}") from exc
    path = lambda name: os.path.join(out_dir, name)  # noqa: E731
    write_qts_csv(synthetic, path("synthetic_qts.csv"))
    write_scores_csv(original.ids, scores, path("scores_original.csv"))
    write_scores_csv(synthetic.ids, synthetic_scores, path("scores_synthetic.csv"))
    write_json(model_summary(model), path("model_summary.json"))
    write_plotdata_qts({"original": original, method: synthetic}, path("plotdata_qts.csv"))
    write_plotdata_scores({"original": (original.ids, scores), method: (synthetic.ids, synthetic_scores)},
                          path("plotdata_scores.csv"))
    if report is not None:
        write_json(report.to_dict(), path("report.json"))
        write_plotdata_frobenius(report, path("plotdata_frobenius.csv"), method)
