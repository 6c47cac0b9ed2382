"""Plain-text readers and writers for matrices, states, Lindblad specs and
key-value experiment configs. Parse errors carry ``path:line`` locations."""

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigError


def parse_complex(token):
    """Parse ``1.0-0.5i`` style entries; bare reals and ``j`` suffixes are accepted too."""
    tok = token.strip()
    if tok.endswith("i"):
        tok = tok[:-1] + "j"
    try:
        val = complex(tok)
    except ValueError:
        raise ValueError(f"cannot parse complex entry {token!r}") from None
    if not (np.isfinite(val.real) and np.isfinite(val.imag)):
        raise ValueError(f"non-finite entry {token!r}")
    return val


def format_complex(z):
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _content_lines(text):
    """(line_number, stripped_text) for non-blank lines, with ``#`` comments removed."""
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((no, line))
    return out


def _read_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read file ({exc.strerror or exc})") from None


def _parse_rows(lines, start, nrows, ncols, path):
    rows = []
    for k in range(nrows):
        if start + k >= len(lines):
            last = lines[-1][0] if lines else 0
            raise ConfigError(f"{path}:{last}: expected {nrows} rows, found {k}")
        no, line = lines[start + k]
        toks = line.split()
        if len(toks) != ncols:
            raise ConfigError(f"{path}:{no}: expected {ncols} entries, found {len(toks)}")
        try:
            rows.append([parse_complex(t) for t in toks])
        except ValueError as exc:
            raise ConfigError(f"{path}:{no}: {exc}") from None
    if start + nrows < len(lines):
        raise ConfigError(f"{path}:{lines[start + nrows][0]}: unexpected trailing content")
    return np.array(rows, dtype=np.complex128).reshape(nrows, ncols)


def _parse_dim(lines, idx, path):
    if idx >= len(lines):
        raise ConfigError(f"{path}: missing dimension line")
    no, line = lines[idx]
    try:
        n = int(line)
    except ValueError:
        raise ConfigError(f"{path}:{no}: expected a positive integer dimension, got {line!r}") from None
    if n <= 0:
        raise ConfigError(f"{path}:{no}: dimension must be positive")
    return n


def parse_matrix(text, path="<string>"):
    lines = _content_lines(text)
    n = _parse_dim(lines, 0, path)
    return _parse_rows(lines, 1, n, n, path)


def parse_state(text, path="<string>"):
    """Return ``("density", matrix)`` or ``("vector", vector)``."""
    lines = _content_lines(text)
    if not lines:
        raise ConfigError(f"{path}: empty state file")
    no, header = lines[0]
    header = header.lower()
    if header not in ("density", "vector"):
        raise ConfigError(f"{path}:{no}: expected header 'density' or 'vector', got {header!r}")
    n = _parse_dim(lines, 1, path)
    if header == "density":
        return "density", _parse_rows(lines, 2, n, n, path)
    toks = [(lno, t) for lno, line in lines[2:] for t in line.split()]
    if len(toks) != n:
        at = lines[-1][0]
        raise ConfigError(f"{path}:{at}: expected {n} vector entries, found {len(toks)}")
    vals = []
    for lno, t in toks:
        try:
            vals.append(parse_complex(t))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lno}: {exc}") from None
    return "vector", np.array(vals, dtype=np.complex128)


def read_matrix(path):
    return parse_matrix(_read_text(path), str(path))


def read_state(path):
    from .spectral import InitialState
    kind, payload = parse_state(_read_text(path), str(path))
    try:
        if kind == "density":
            return InitialState.density(payload)
        return InitialState.pure(payload)
    except Exception as exc:
        raise type(exc)(f"{path}: {exc}") from None


def format_matrix(A):
    A = np.asarray(A)
    rows = [" ".join(format_complex(x) for x in row) for row in A]
    return "\n".join([str(A.shape[0])] + rows) + "\n"


def format_state(state):
    if state.kind == "pure_vector":
        body = [format_complex(x) for x in state.payload]
        return "\n".join(["vector", str(state.N)] + body) + "\n"
    return "density\n" + format_matrix(state.payload)


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to a temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_matrix(path, A):
    atomic_write(path, format_matrix(A))


def write_state(path, state):
    atomic_write(path, format_state(state))


# ---------------------------------------------------------------- Lindblad spec

PAULI_LETTERS = frozenset("IXYZ")


def _pauli_word(tok, n, path, no):
    word = tok.upper()
    if len(word) != n or not set(word) <= PAULI_LETTERS:
        raise ConfigError(f"{path}:{no}: invalid Pauli word {tok!r} for {n} qubit(s)")
    return word


def parse_lindblad(text, path="<string>"):
    """Parse the Lindblad text format.

    First content line is the qubit count. Then::

        H <coeff> <word>          Hamiltonian term, real coefficient
        L <coeff> <word>          jump operator sqrt(coeff) * word, coeff >= 0
        Lgroup <coeff>            jump operator sqrt(coeff) * sum of the terms below
          <amplitude> <word>      complex amplitude, e.g. 0.5 or 0+0.5i
        end
    """
    from .applications import JumpOperator, LindbladSpec

    lines = _content_lines(text)
    n = _parse_dim(lines, 0, path)
    ham, jumps = [], []
    group = None
    for no, line in lines[1:]:
        toks = line.split()
        key = toks[0]
        if group is not None:
            if key.lower() == "end":
                if not group[2]:
                    raise ConfigError(f"{path}:{no}: empty Lgroup block")
                jumps.append(JumpOperator(group[0], tuple(group[2])))
                group = None
                continue
            if len(toks) != 2:
                raise ConfigError(f"{path}:{no}: expected '<amplitude> <word>' inside Lgroup")
            try:
                amp = parse_complex(toks[0])
            except ValueError as exc:
                raise ConfigError(f"{path}:{no}: {exc}") from None
            group[2].append((amp, _pauli_word(toks[1], n, path, no)))
            continue
        if key == "Lgroup":
            if len(toks) != 2:
                raise ConfigError(f"{path}:{no}: expected 'Lgroup <rate>'")
            rate = _real(toks[1], path, no)
            if rate < 0:
                raise ConfigError(f"{path}:{no}: jump rate must be non-negative")
            group = (rate, no, [])
            continue
        if key not in ("H", "L") or len(toks) != 3:
            raise ConfigError(f"{path}:{no}: expected 'H <coeff> <word>', 'L <coeff> <word>' or 'Lgroup <coeff>'")
        coeff = _real(toks[1], path, no)
        word = _pauli_word(toks[2], n, path, no)
        if key == "H":
            ham.append((coeff, word))
        else:
            if coeff < 0:
                raise ConfigError(f"{path}:{no}: jump rate must be non-negative")
            jumps.append(JumpOperator(coeff, ((1.0 + 0j, word),)))
    if group is not None:
        raise ConfigError(f"{path}:{group[1]}: Lgroup block not closed with 'end'")
    return LindbladSpec(n, tuple(ham), tuple(jumps))


def _real(tok, path, no):
    try:
        val = float(tok)
    except ValueError:
        raise ConfigError(f"{path}:{no}: expected a real number, got {tok!r}") from None
    if not np.isfinite(val):
        raise ConfigError(f"{path}:{no}: non-finite value {tok!r}")
    return val


def read_lindblad(path):
    return parse_lindblad(_read_text(path), str(path))


# ---------------------------------------------------------------- configs

def parse_config(text, path="<string>"):
    """``key = value`` lines with ``#`` comments; returns ``{key: (value, line)}``."""
    out = {}
    for no, line in _content_lines(text):
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{no}: empty key")
        if key in out:
            raise ConfigError(f"{path}:{no}: duplicate key {key!r} (first set on line {out[key][1]})")
        out[key] = (val, no)
    return out


def read_config(path):
    return parse_config(_read_text(path), str(path))
