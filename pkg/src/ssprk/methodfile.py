"""Text-file serialization for Runge-Kutta, IMEX, and Shu-Osher methods.

One method per UTF-8 file.  Header lines are ``key=value``; coefficient
blocks are introduced by a label line (``A:``, ``b:``, ``At:``, ``bt:``,
``alpha:``, ``beta:``, ``v:``) followed by rows of space-separated decimals.
Lines starting with ``#`` and blank lines are ignored.  Anything else is
rejected with its line number, as are dimension mismatches.

Floats are written with ``repr`` so that a save/load round trip reproduces
every value bit-exactly.
"""

import numpy as np

from .tableau import ButcherTableau, ImexTableau, ShuOsherForm, TableauError

__all__ = ["MethodFileError", "load_method", "save_method", "loads", "dumps"]

_HEADER_KEYS = {
    "name", "class", "s", "p", "p_lin", "pe", "pi",
    "ssp_coefficient", "k_designed", "r",
}
_CLASSES = ("explicit", "dirk", "sdirk", "full", "imex", "shu-osher")


class MethodFileError(ValueError):
    """Unparseable or inconsistent method file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _fmt(x):
    return repr(float(x))


def _fmt_row(row):
    return " ".join(_fmt(x) for x in np.atleast_1d(row))


def dumps(method):
    """Serialize a method to the text format; see `save_method`."""
    lines = []

    def header(key, value):
        if value is not None:
            lines.append(f"{key}={value}")

    if isinstance(method, ButcherTableau):
        header("name", method.name)
        header("class", method.structure)
        header("s", method.s)
        header("p", method.p)
        header("p_lin", method.p_lin)
        if method.ssp_coefficient is not None:
            header("ssp_coefficient", _fmt(method.ssp_coefficient))
        lines.append("A:")
        lines.extend(_fmt_row(row) for row in method.A)
        lines.append("b:")
        lines.append(_fmt_row(method.b))
    elif isinstance(method, ImexTableau):
        header("name", method.name)
        header("class", "imex")
        header("s", method.s)
        header("pe", method.pe)
        header("pi", method.pi)
        header("p_lin", method.p_lin)
        if method.k_designed is not None:
            header("k_designed", _fmt(method.k_designed))
        if method.ssp_coefficient is not None:
            header("ssp_coefficient", _fmt(method.ssp_coefficient))
        lines.append("A:")
        lines.extend(_fmt_row(row) for row in method.A)
        lines.append("b:")
        lines.append(_fmt_row(method.b))
        lines.append("At:")
        lines.extend(_fmt_row(row) for row in method.At)
        lines.append("bt:")
        lines.append(_fmt_row(method.bt))
    elif isinstance(method, ShuOsherForm):
        header("class", "shu-osher")
        header("s", method.s)
        if method.r is not None:
            header("r", _fmt(method.r))
        lines.append("alpha:")
        lines.extend(_fmt_row(row) for row in method.alpha)
        lines.append("beta:")
        lines.extend(_fmt_row(row) for row in method.beta)
        lines.append("v:")
        lines.append(_fmt_row(method.v))
    else:
        raise TypeError(f"cannot serialize {type(method).__name__}")
    return "\n".join(lines) + "\n"


def save_method(method, path):
    """Write a method to ``path``; `load_method` reads it back bit-exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(method))


def _parse_float(tok, lineno, field):
    try:
        return float(tok)
    except ValueError:
        raise MethodFileError(f"bad decimal {tok!r} in {field}", lineno)


def _parse_int(tok, lineno, field):
    try:
        return int(tok)
    except ValueError:
        raise MethodFileError(f"bad integer {tok!r} in {field}", lineno)


def loads(text):
    """Parse the text format; see `load_method`."""
    headers = {}
    blocks = {}
    current = None  # (label, rows, start line)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.endswith(":") and " " not in line:
            label = line[:-1]
            if label not in ("A", "b", "At", "bt", "alpha", "beta", "v"):
                raise MethodFileError(f"unknown block label {label!r}",
                                      lineno)
            if label in blocks:
                raise MethodFileError(f"duplicate block {label!r}", lineno)
            current = label
            blocks[label] = ([], lineno)
            continue
        if "=" in line and current is None:
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _HEADER_KEYS:
                raise MethodFileError(f"unknown header key {key!r}", lineno)
            if key in headers:
                raise MethodFileError(f"duplicate header key {key!r}", lineno)
            headers[key] = (value, lineno)
            continue
        toks = line.split()
        try:
            row = [float(t) for t in toks]
        except ValueError:
            where = (f"block {current!r}" if current is not None
                     else "header section")
            raise MethodFileError(f"unexpected content {line!r} in {where}",
                                  lineno)
        if current is None:
            raise MethodFileError(
                f"numeric row {line!r} outside any block", lineno)
        blocks[current][0].append((row, lineno))

    def need_header(key):
        if key not in headers:
            raise MethodFileError(f"missing required header {key!r}")
        return headers[key]

    cls_value, cls_line = need_header("class")
    if cls_value not in _CLASSES:
        raise MethodFileError(f"unknown class {cls_value!r}", cls_line)
    s_value, s_line = need_header("s")
    s = _parse_int(s_value, s_line, "s")
    if s <= 0:
        raise MethodFileError(f"stage count must be positive, got {s}",
                              s_line)

    def take_block(label, nrows, ncols):
        if label not in blocks:
            raise MethodFileError(f"missing block {label!r}")
        rows, start = blocks.pop(label)
        if len(rows) != nrows:
            raise MethodFileError(
                f"block {label!r} has {len(rows)} rows, expected {nrows}",
                start)
        for row, lineno in rows:
            if len(row) != ncols:
                raise MethodFileError(
                    f"row of length {len(row)} in block {label!r}, "
                    f"expected {ncols}", lineno)
        return np.array([row for row, _ in rows], dtype=float)

    def opt_int(key):
        if key not in headers:
            return None
        value, lineno = headers[key]
        return _parse_int(value, lineno, key)

    def opt_float(key):
        if key not in headers:
            return None
        value, lineno = headers[key]
        return _parse_float(value, lineno, key)

    name = headers.get("name", (None, None))[0]
    try:
        if cls_value == "imex":
            A = take_block("A", s, s)
            b = take_block("b", 1, s)[0]
            At = take_block("At", s, s)
            bt = take_block("bt", 1, s)[0]
            method = ImexTableau(
                A, b, At, bt, name=name, pe=opt_int("pe"), pi=opt_int("pi"),
                p_lin=opt_int("p_lin"), k_designed=opt_float("k_designed"),
                ssp_coefficient=opt_float("ssp_coefficient"))
        elif cls_value == "shu-osher":
            alpha = take_block("alpha", s + 1, s)
            beta = take_block("beta", s + 1, s)
            v = take_block("v", 1, s + 1)[0]
            method = ShuOsherForm(alpha, beta, v, r=opt_float("r"))
        else:
            A = take_block("A", s, s)
            b = take_block("b", 1, s)[0]
            method = ButcherTableau(
                A, b, cls_value, name=name, p=opt_int("p"),
                p_lin=opt_int("p_lin"),
                ssp_coefficient=opt_float("ssp_coefficient"))
    except TableauError as exc:
        raise MethodFileError(f"validation failed: {exc}")
    if blocks:
        label = next(iter(blocks))
        raise MethodFileError(f"unexpected block {label!r} for class "
                              f"{cls_value!r}", blocks[label][1])
    return method


def load_method(path):
    """Read a method file.

    Returns a `ButcherTableau`, `ImexTableau`, or `ShuOsherForm` according to
    the ``class=`` header.  Raises `MethodFileError` (with a line number
    where possible) on malformed input or dimension mismatches.
    """
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())
