"""Instance file format and random instance generators.

The format is line oriented and diffable: a header line, then one row of
floats per point, with ``#`` lines ignored.  Floats are written with 17
significant digits so parse(serialize(x)) is exact for 64-bit values.

    ses <n> <d>          followed by n rows of d+1 floats (coords, radius)
    svm <n1> <n2> <d>    followed by n1 P-rows then n2 Q-rows of d floats
"""
from __future__ import annotations

import io
import numpy as np

from .ses import SesInstance
from .svm import SvmInstance


class InstanceFormatError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def serialize_ses(inst: SesInstance, comments: list[str] | None = None) -> str:
    out = io.StringIO()
    out.write(f"ses {inst.n} {inst.d}\n")
    for line in comments or []:
        out.write(f"# {line}\n")
    for row, r in zip(inst.centers, inst.radii):
        out.write(" ".join(_fmt(v) for v in row) + " " + _fmt(r) + "\n")
    return out.getvalue()


def serialize_svm(inst: SvmInstance, comments: list[str] | None = None) -> str:
    out = io.StringIO()
    out.write(f"svm {inst.n1} {inst.n2} {inst.d}\n")
    for line in comments or []:
        out.write(f"# {line}\n")
    for row in inst.P:
        out.write(" ".join(_fmt(v) for v in row) + "\n")
    for row in inst.Q:
        out.write(" ".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def parse(text: str) -> SesInstance | SvmInstance:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InstanceFormatError("empty instance file")
    header = lines[0].split()
    try:
        if header[0] == "ses":
            if len(header) != 3:
                raise InstanceFormatError(f"bad ses header: {lines[0]!r}")
            n, d = int(header[1]), int(header[2])
            rows = _float_rows(lines[1:], n, d + 1)
            return SesInstance(centers=rows[:, :d], radii=rows[:, d])
        if header[0] == "svm":
            if len(header) != 4:
                raise InstanceFormatError(f"bad svm header: {lines[0]!r}")
            n1, n2, d = int(header[1]), int(header[2]), int(header[3])
            rows = _float_rows(lines[1:], n1 + n2, d)
            return SvmInstance(P=rows[:n1], Q=rows[n1:])
    except (ValueError, IndexError) as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(str(exc)) from exc
    raise InstanceFormatError(f"unknown problem kind {header[0]!r}")


def _float_rows(lines: list[str], n: int, width: int) -> np.ndarray:
    if len(lines) != n:
        raise InstanceFormatError(f"expected {n} data rows, found {len(lines)}")
    rows = np.empty((n, width))
    for i, ln in enumerate(lines):
        parts = ln.split()
        if len(parts) != width:
            raise InstanceFormatError(
                f"row {i}: expected {width} values, found {len(parts)}")
        rows[i] = [float(p) for p in parts]
    if not np.isfinite(rows).all():
        raise InstanceFormatError("non-finite value in instance")
    return rows


def load(path: str) -> SesInstance | SvmInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


def save(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


SES_DISTS = ("uniform-ball", "gaussian", "sphere-surface")


def gen_ses(n: int, d: int, seed: int, dist: str = "gaussian") -> SesInstance:
    """Random point instance (all radii zero).  sphere-surface emits
    antipodal pairs of unit vectors, which pins the optimal radius to
    exactly 1 around the origin."""
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    if dist not in SES_DISTS:
        raise ValueError(f"dist must be one of {SES_DISTS}")
    rng = np.random.default_rng(seed)
    if dist == "gaussian":
        pts = rng.standard_normal((n, d))
    elif dist == "uniform-ball":
        dirs = rng.standard_normal((n, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        pts = dirs * rng.random(n)[:, None] ** (1.0 / d)
    else:
        k = n // 2
        dirs = rng.standard_normal((k + n % 2, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        pts = np.concatenate([dirs[:k], -dirs[:k], dirs[k:]])
    return SesInstance(centers=pts, radii=np.zeros(n))


def gen_svm(n1: int, n2: int, d: int, seed: int,
            gap: float = 1.0) -> tuple[SvmInstance, np.ndarray]:
    """Two unit-ball clusters with centers 2 + gap apart along a random
    direction, so the hulls are separated by at least ``gap``.  Returns the
    instance and the construction direction."""
    if n1 < 1 or n2 < 1 or d < 1:
        raise ValueError("need n1, n2 >= 1 and d >= 1")
    if gap <= 0:
        raise ValueError("gap must be positive")
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    offset = (1.0 + gap / 2.0) * direction

    def ball(k):
        dirs = rng.standard_normal((k, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return dirs * rng.random(k)[:, None] ** (1.0 / d)

    P = ball(n1) + offset
    Q = ball(n2) - offset
    return SvmInstance(P=P, Q=Q), direction


def gen_ses_text(n: int, d: int, seed: int, dist: str = "gaussian") -> str:
    inst = gen_ses(n, d, seed, dist)
    return serialize_ses(inst, comments=[f"gen-ses n={n} d={d} seed={seed} dist={dist}"])


def gen_svm_text(n1: int, n2: int, d: int, seed: int, gap: float = 1.0) -> str:
    inst, direction = gen_svm(n1, n2, d, seed, gap)
    dir_s = " ".join(_fmt(v) for v in direction)
    return serialize_svm(inst, comments=[
        f"gen-svm n1={n1} n2={n2} d={d} seed={seed} gap={_fmt(gap)}",
        f"direction {dir_s}",
    ])
