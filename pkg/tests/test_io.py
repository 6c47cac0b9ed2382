import numpy as np
import pytest
from hypothesis import given, strategies as st

from pencilspec.applications import vectorize_lindblad
from pencilspec.errors import ConfigError
from pencilspec.io import (atomic_write, format_complex, parse_complex, parse_config,
                           parse_lindblad, parse_matrix, parse_state, read_matrix, read_state,
                           write_matrix, write_state)
from pencilspec.spectral import InitialState

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@pytest.mark.parametrize("tok, val", [
    ("1.0-0.5i", 1 - 0.5j), ("2", 2), ("-3.5e-2+1e3i", -0.035 + 1000j), ("0.5j", 0.5j), ("1+0i", 1),
])
def test_parse_complex(tok, val):
    assert parse_complex(tok) == val


@pytest.mark.parametrize("tok", ["abc", "1+", "nan", "inf"])
def test_parse_complex_rejects(tok):
    with pytest.raises(ValueError):
        parse_complex(tok)


@given(finite, finite)
def test_complex_format_round_trip(re, im):
    z = complex(re, im)
    assert parse_complex(format_complex(z)) == z


def test_matrix_round_trip(tmp_path):
    A = np.array([[1.0, -0.5j], [2 + 1e-17j, np.pi]])
    write_matrix(tmp_path / "a.txt", A)
    assert np.array_equal(read_matrix(tmp_path / "a.txt"), A)


def test_matrix_parse_with_comments():
    A = parse_matrix("# header\n2\n1 0  # first row\n0 1.0-0.5i\n")
    assert np.array_equal(A, [[1, 0], [0, 1 - 0.5j]])


def test_matrix_errors_carry_line_numbers():
    with pytest.raises(ConfigError, match="m.txt:3"):
        parse_matrix("2\n1 0\n0\n", "m.txt")
    with pytest.raises(ConfigError, match="m.txt:2"):
        parse_matrix("2\n1 x\n0 1\n", "m.txt")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        read_matrix(tmp_path / "absent.txt")


def test_state_round_trip(tmp_path):
    psi = InitialState.pure([0.6, 0.8j])
    write_state(tmp_path / "v.txt", psi)
    back = read_state(tmp_path / "v.txt")
    assert back.kind == "pure_vector" and np.array_equal(back.payload, psi.payload)
    rho = InitialState.density(np.diag([0.25, 0.75]))
    write_state(tmp_path / "d.txt", rho)
    assert np.array_equal(read_state(tmp_path / "d.txt").payload, rho.payload)


def test_state_header_checked():
    with pytest.raises(ConfigError, match="header"):
        parse_state("matrix\n1\n1\n")
    kind, v = parse_state("vector\n3\n1 0\n0\n")
    assert kind == "vector" and len(v) == 3


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "out.json"
    atomic_write(p, "one")
    atomic_write(p, b"two")
    assert p.read_text() == "two"
    assert [f.name for f in tmp_path.iterdir()] == ["out.json"]


def test_lindblad_format():
    spec = parse_lindblad("""
        1
        H 0.5 Z
        L 0.2 X
        Lgroup 0.4
          0.5 X
          0+0.5i Y
        end
    """)
    assert spec.n_qubits == 1
    assert spec.hamiltonian_terms == ((0.5, "Z"),)
    assert len(spec.jump_operators) == 2
    lower = spec.jump_operators[1].matrix()
    assert np.allclose(lower, np.sqrt(0.4) * np.array([[0, 1], [0, 0]]))
    assert vectorize_lindblad(spec).shape == (4, 4)


@pytest.mark.parametrize("text, line", [
    ("1\nH 1 XX\n", 2),
    ("1\nL -1 X\n", 2),
    ("1\nQ 1 X\n", 2),
    ("1\nLgroup 1\n0.5 X\n", 2),
    ("1\nH 1 Z\nLgroup 1\nend\n", 4),
])
def test_lindblad_errors(text, line):
    with pytest.raises(ConfigError, match=f"spec:{line}"):
        parse_lindblad(text, "spec")


def test_config_parse():
    cfg = parse_config("# comment\nfamily = power\n\nR = 4 # probe\n")
    assert cfg == {"family": ("power", 2), "R": ("4", 4)}
    with pytest.raises(ConfigError, match="c:3: duplicate"):
        parse_config("a = 1\nb = 2\na = 3\n", "c")
    with pytest.raises(ConfigError, match="c:1"):
        parse_config("novalue\n", "c")
