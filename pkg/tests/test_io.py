import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pnlw import io
from pnlw.harmonics import SphereField, n_modes
from pnlw.random_basis import sample_haar, tail_from_samples
from pnlw.random_data import StatePair
from pnlw.solver import solve


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_field_round_trip(tmp_path_factory, n_max, seed):
    path = tmp_path_factory.mktemp("f") / "field.csv"
    f = SphereField(np.random.default_rng(seed).standard_normal(n_modes(n_max)))
    io.write_field(path, f)
    np.testing.assert_array_equal(io.read_field(path).coeffs, f.coeffs)


def test_field_header(tmp_path):
    io.write_field(tmp_path / "f.csv", SphereField(np.arange(5.0)))
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "n,k,coeff" and lines[1] == "1,1,0.0" and lines[-1] == "2,4,4.0"


def test_tail_round_trip(tmp_path):
    tail = tail_from_samples(np.random.default_rng(0).random(200), np.linspace(0, 1, 7))
    io.write_tail(tmp_path / "t.csv", tail)
    back = io.read_tail(tmp_path / "t.csv", n_samples=200)
    for name in ("levels", "survival", "ci_low", "ci_high"):
        np.testing.assert_array_equal(getattr(back, name), getattr(tail, name))


@pytest.mark.parametrize("seed", [None, 17])
def test_rotation_round_trip(tmp_path, seed):
    rot = sample_haar(9, np.random.default_rng(1))
    rot.n, rot.seed = 3, seed
    io.write_rotation(tmp_path / "q.csv", rot)
    back = io.read_rotation(tmp_path / "q.csv")
    np.testing.assert_array_equal(back.Q, rot.Q)
    assert back.n == 3 and back.seed == seed


def test_trajectory_round_trip(tmp_path):
    c = np.zeros(5)
    c[0] = 1.0
    traj = solve(StatePair(c, np.zeros(5)), (0, 0.5), 0.1)
    io.write_trajectory(tmp_path / "u.csv", traj)
    back = io.read_trajectory(tmp_path / "u.csv")
    np.testing.assert_array_equal(back.times, traj.times)
    np.testing.assert_array_equal(back.pos, traj.pos)
    np.testing.assert_array_equal(back.vel, traj.vel)
    assert (tmp_path / "u.csv").read_text().splitlines()[0].startswith("T,pos_1_1,pos_2_1")


def test_json_canonical(tmp_path):
    a = io.dumps({"b": np.float64(1.5), "a": np.arange(2)})
    b = io.dumps({"a": [0, 1], "b": 1.5})
    assert a == b
    io.write_json(tmp_path / "x.json", {"z": np.int64(3)})
    assert io.read_json(tmp_path / "x.json") == {"z": 3}


def test_json_rejects_objects():
    with pytest.raises(TypeError):
        io.dumps({"x": object()})
