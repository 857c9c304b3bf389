"""Plain-text state files.

QSV holds a pure state::

    qsv 1 <n_qubits>
    <re> <im>            (2^n lines, qubit 1 = most significant bit)

QDM holds a density operator as its nonzero entries::

    qdm 1 <n_qubits>
    <row> <col> <re> <im>

Blank lines and ``#`` comments are ignored. Indices are 0-based.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import qstate as qs


class FormatError(ValueError):
    """The file does not follow the QSV/QDM layout."""


def _lines(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line.split()))
    return out


def _float(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise FormatError(f"line {lineno}: {tok!r} is not a number") from None


def _header(lines, kind: str) -> int:
    if not lines:
        raise FormatError("empty file")
    lineno, toks = lines[0]
    if len(toks) != 3 or toks[0] != kind or toks[1] != "1":
        raise FormatError(f"line {lineno}: expected header '{kind} 1 <n_qubits>'")
    try:
        n = int(toks[2])
    except ValueError:
        raise FormatError(f"line {lineno}: qubit count {toks[2]!r} is not an integer") from None
    if not 1 <= n <= qs.MAX_QUBITS:
        raise FormatError(f"line {lineno}: qubit count must be in 1..{qs.MAX_QUBITS}")
    return n


def parse_qsv(text: str) -> qs.PureState:
    lines = _lines(text)
    n = _header(lines, "qsv")
    body = lines[1:]
    if len(body) != 2**n:
        raise FormatError(f"expected {2**n} amplitude lines, found {len(body)}")
    amps = np.empty(2**n, dtype=complex)
    for k, (lineno, toks) in enumerate(body):
        if len(toks) != 2:
            raise FormatError(f"line {lineno}: expected '<re> <im>'")
        amps[k] = complex(_float(toks[0], lineno), _float(toks[1], lineno))
    return qs.PureState(n, amps)


def parse_qdm(text: str) -> qs.DensityOperator:
    lines = _lines(text)
    n = _header(lines, "qdm")
    d = 2**n
    m = np.zeros((d, d), dtype=complex)
    for lineno, toks in lines[1:]:
        if len(toks) != 4:
            raise FormatError(f"line {lineno}: expected '<row> <col> <re> <im>'")
        try:
            r, c = int(toks[0]), int(toks[1])
        except ValueError:
            raise FormatError(f"line {lineno}: row/col must be integers") from None
        if not (0 <= r < d and 0 <= c < d):
            raise FormatError(f"line {lineno}: index ({r}, {c}) outside a {d}x{d} matrix")
        m[r, c] = complex(_float(toks[2], lineno), _float(toks[3], lineno))
    return qs.DensityOperator(n, m)


def read_state(path) -> qs.State:
    """Read a QSV or QDM file, dispatching on its header."""
    text = Path(path).read_text()
    lines = _lines(text)
    if not lines:
        raise FormatError("empty file")
    kind = lines[0][1][0]
    if kind == "qsv":
        return parse_qsv(text)
    if kind == "qdm":
        return parse_qdm(text)
    raise FormatError(f"unknown file kind {kind!r}; expected 'qsv' or 'qdm'")


def format_qsv(state: qs.PureState) -> str:
    rows = [f"qsv 1 {state.n_qubits}"]
    rows += [f"{a.real:.17g} {a.imag:.17g}" for a in state.amplitudes]
    return "\n".join(rows) + "\n"


def format_qdm(rho: qs.DensityOperator) -> str:
    rows = [f"qdm 1 {rho.n_qubits}"]
    for r, c in zip(*np.nonzero(rho.matrix)):
        v = rho.matrix[r, c]
        rows.append(f"{r} {c} {v.real:.17g} {v.imag:.17g}")
    return "\n".join(rows) + "\n"


def write_state(path, state: qs.State) -> None:
    text = format_qsv(state) if isinstance(state, qs.PureState) else format_qdm(state)
    Path(path).write_text(text)
