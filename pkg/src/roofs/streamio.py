"""File-backed feature stream: batch files, response, ground truth, manifest.

All files are plain text. A batch file holds one feature per line as
``<feature_id>,<v_0>,...,<v_{n-1}>`` with full round-trip float
precision; the response file holds one value per line; the ground-truth
file is sectioned so solvers can never confuse it with solver input. The
manifest records the batch order and a checksum per batch file.
"""

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import FeatureBatch, FeatureIdSet, SampleIndexSet, SparseCoefficients
from .datagen import GroundTruth

__all__ = ["StreamManifest", "StreamError", "write_stream", "read_manifest",
           "iter_stream", "load_response", "write_ground_truth", "load_ground_truth",
           "MANIFEST_NAME", "RESPONSE_NAME", "GROUND_TRUTH_NAME"]

MANIFEST_NAME = "manifest.txt"
RESPONSE_NAME = "response.txt"
GROUND_TRUTH_NAME = "ground_truth.txt"
_FORMAT = "roofs-stream-1"
_ALGO = "sha256"


class StreamError(RuntimeError):
    """Manifest/batch integrity failure (missing file, checksum mismatch)."""


@dataclass
class StreamManifest:
    n: int
    p: int
    batch_files: list
    checksums: list
    algorithm: str = _ALGO


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(v):
    return repr(float(v))


def write_stream(design, y, truth, batch_size, out_dir):
    """Write batch files, response, ground truth and manifest to a directory.

    Returns the StreamManifest. Ground truth goes to its own clearly
    named file so stream consumers cannot read it by accident.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    y = np.asarray(y, dtype=np.float64)

    names, sums = [], []
    for batch in design.iter_batches(batch_size):
        name = f"batch_{batch.batch_index:04d}.txt"
        path = out / name
        with open(path, "w") as fh:
            for fid, row in zip(batch.ids.ids, batch.values):
                fh.write(str(int(fid)) + "," + ",".join(_fmt(v) for v in row) + "\n")
        names.append(name)
        sums.append(_digest(path))

    with open(out / RESPONSE_NAME, "w") as fh:
        for v in y:
            fh.write(_fmt(v) + "\n")

    write_ground_truth(truth, out / GROUND_TRUTH_NAME)

    manifest = StreamManifest(n=design.n, p=design.p, batch_files=names, checksums=sums)
    with open(out / MANIFEST_NAME, "w") as fh:
        fh.write(f"format = {_FORMAT}\n")
        fh.write(f"checksum = {manifest.algorithm}\n")
        fh.write(f"n = {manifest.n}\n")
        fh.write(f"p = {manifest.p}\n")
        for name, s in zip(names, sums):
            fh.write(f"batch = {name} {s}\n")
    return manifest


def read_manifest(stream_dir):
    path = Path(stream_dir) / MANIFEST_NAME
    if not path.exists():
        raise StreamError(f"missing manifest: {path}")
    n = p = None
    algo = _ALGO
    names, sums = [], []
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "n":
            n = int(value)
        elif key == "p":
            p = int(value)
        elif key == "checksum":
            algo = value
        elif key == "batch":
            parts = value.split()
            if len(parts) != 2:
                raise StreamError(f"{path}:{lineno}: malformed batch entry")
            names.append(parts[0])
            sums.append(parts[1])
        elif key == "format":
            if value != _FORMAT:
                raise StreamError(f"{path}: unsupported format {value!r}")
    if n is None or p is None:
        raise StreamError(f"{path}: manifest missing n or p")
    return StreamManifest(n=n, p=p, batch_files=names, checksums=sums, algorithm=algo)


def _parse_batch_file(path, n, batch_index):
    ids, rows = [], []
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != n + 1:
            raise StreamError(f"{path}:{lineno}: expected {n + 1} fields, got {len(parts)}")
        ids.append(int(parts[0]))
        rows.append([float(v) for v in parts[1:]])
    return FeatureBatch(batch_index, FeatureIdSet(ids), np.asarray(rows))


def iter_stream(stream_dir, verify=True):
    """Yield the batches of a written stream in manifest order."""
    stream_dir = Path(stream_dir)
    manifest = read_manifest(stream_dir)
    for k, (name, expect) in enumerate(zip(manifest.batch_files, manifest.checksums)):
        path = stream_dir / name
        if not path.exists():
            raise StreamError(f"missing batch file: {path}")
        if verify and _digest(path) != expect:
            raise StreamError(f"checksum mismatch for {path}")
        yield _parse_batch_file(path, manifest.n, k)


def load_response(stream_dir):
    path = Path(stream_dir) / RESPONSE_NAME
    if not path.exists():
        raise StreamError(f"missing response file: {path}")
    return np.array([float(line) for line in path.read_text().split()])


def write_ground_truth(truth, path):
    with open(path, "w") as fh:
        fh.write("[beta_star]\n")
        for fid in truth.psi_star.ids:
            fh.write(f"{int(fid)},{_fmt(truth.beta_star.get(int(fid)))}\n")
        fh.write("[s_star]\n")
        for i in truth.s_star.indices:
            fh.write(f"{int(i)}\n")
        fh.write("[u]\n")
        for i in np.nonzero(truth.u)[0]:
            fh.write(f"{int(i)},{_fmt(truth.u[i])}\n")


def load_ground_truth(stream_dir, n=None):
    """Read the ground-truth sections back; epsilon is not persisted and
    loads as zeros."""
    stream_dir = Path(stream_dir)
    path = stream_dir / GROUND_TRUTH_NAME
    if not path.exists():
        raise StreamError(f"missing ground truth file: {path}")
    if n is None:
        n = read_manifest(stream_dir).n
    beta, s_star, u = {}, [], np.zeros(n)
    section = None
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("["):
            section = line.strip("[]")
            continue
        if section == "beta_star":
            fid, _, w = line.partition(",")
            beta[int(fid)] = float(w)
        elif section == "s_star":
            s_star.append(int(line))
        elif section == "u":
            i, _, v = line.partition(",")
            u[int(i)] = float(v)
    coeffs = SparseCoefficients(beta)
    # membership is by the persisted uncorrupted list, not by u != 0
    s_set = SampleIndexSet(np.asarray(s_star, dtype=np.int64), n)
    return GroundTruth(
        beta_star=coeffs,
        u=u,
        epsilon=np.zeros(n),
        s_star=s_set,
        psi_star=coeffs.support(),
    )
