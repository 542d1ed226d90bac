import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from qwalk.bloch import bloch_spectrum
from qwalk.errors import DomainError
from qwalk.lattice import Boundary, LatticeSpec, build_adjacency
from qwalk.spectral import (
    SPECTRUM_SLACK,
    decompose,
    default_tolerance,
    eigenvalues,
    group_degeneracies,
    write_spectrum_csv,
)

# roots of the 4-cycle characteristic polynomial l^4 - 8 l^3 + 20 l^2 - 16 l
FOUR_CYCLE = [0.0, 2.0, 2.0, 4.0]


def check_eigensystem(A, eig):
    n = A.shape[0]
    Q = eig.vectors
    bound = 1e-10 * max(np.abs(A).max(), 1) * max(np.sqrt(n), 1)
    assert np.abs(Q.T @ Q - np.eye(n)).max() <= bound
    assert np.abs(A @ Q - Q * eig.values).max() <= bound
    assert np.all(np.diff(eig.values) >= 0)


def test_four_cycle(eig_of):
    eig = eig_of(2)
    np.testing.assert_allclose(eig.values, FOUR_CYCLE, atol=1e-13)
    check_eigensystem(build_adjacency(LatticeSpec(2)).entries, eig)


def test_nine_open_bounds(eig_of):
    eig = eig_of(9)
    assert eig.values[0] == pytest.approx(0, abs=SPECTRUM_SLACK)
    assert eig.values[1] > 1e-3
    assert eig.values[-1] < 8


def test_three_periodic_matches_bloch(eig_of):
    expected = sorted(4 - 2 * np.cos(2 * np.pi * n / 3) - 2 * np.cos(2 * np.pi * l / 3)
                      for n in (1, 2, 3) for l in (1, 2, 3))
    np.testing.assert_allclose(eig_of(3, "periodic").values, expected, atol=1e-10)


@pytest.mark.parametrize("N", [1, 2, 3, 5, 8, 13])
@pytest.mark.parametrize("boundary", ["open", "periodic"])
def test_eigensystem_invariants(N, boundary, eig_of):
    if boundary == "periodic" and N < 3:
        return
    A = build_adjacency(LatticeSpec(N, Boundary(boundary))).entries
    eig = eig_of(N, boundary)
    check_eigensystem(A, eig)
    assert eig.values[0] >= -SPECTRUM_SLACK and eig.values[-1] <= 8 + SPECTRUM_SLACK


@pytest.mark.parametrize("N", [3, 7, 12])
def test_periodic_spectrum_against_bloch(N):
    A = build_adjacency(LatticeSpec(N, Boundary.PERIODIC))
    np.testing.assert_allclose(eigenvalues(A), bloch_spectrum(N), atol=1e-10, rtol=0)


@pytest.mark.parametrize("N", [3, 6, 11, 16])
def test_periodic_lies_above_open(N):
    op = eigenvalues(build_adjacency(LatticeSpec(N)))
    pbc = eigenvalues(build_adjacency(LatticeSpec(N, Boundary.PERIODIC)))
    assert np.all(pbc >= op - 1e-10)


@pytest.mark.parametrize("N", [2, 4, 10, 20])
def test_open_spectrum_zero_simple_and_below_eight(N):
    vals = eigenvalues(build_adjacency(LatticeSpec(N)))
    assert abs(vals[0]) < 1e-8
    assert vals[1] > 1e-8
    assert vals[-1] < 8 - 1e-6


def test_row_restricted_vectors_span_same_eigenspaces(eig_of):
    # rows of Q are basis dependent inside degenerate classes; projector pieces are not
    N = 6
    A = build_adjacency(LatticeSpec(N))
    full = eig_of(N)
    part = decompose(A, rows=[0, 35, 14])
    np.testing.assert_allclose(part.values, full.values, atol=1e-12)
    classes = group_degeneracies(full).classes
    for r in (0, 35, 14):
        for s in (0, 35, 14):
            a = [full.row(r)[c] @ full.row(s)[c] for c in classes]
            b = [part.row(r)[c] @ part.row(s)[c] for c in classes]
            np.testing.assert_allclose(a, b, atol=1e-12)


def test_values_only():
    eig = decompose(build_adjacency(LatticeSpec(4)), vectors=False)
    assert eig.vectors is None
    with pytest.raises(DomainError):
        eig.row(0)


def test_missing_row_is_rejected():
    eig = decompose(build_adjacency(LatticeSpec(4)), rows=[0])
    with pytest.raises(DomainError):
        eig.row(3)
    with pytest.raises(DomainError):
        eig.require_full()


def test_nonsymmetric_rejected():
    with pytest.raises(DomainError):
        decompose(np.array([[1.0, 2.0], [0.0, 1.0]]))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (7, 7), elements=st.floats(-10, 10)))
def test_random_symmetric_matrices(m):
    a = m + m.T
    eig = decompose(a)
    scale = max(np.abs(a).max(), 1)
    np.testing.assert_allclose(eig.values, np.linalg.eigvalsh(a), atol=1e-12 * scale * 7)
    Q = eig.vectors
    assert np.abs(Q.T @ Q - np.eye(7)).max() < 1e-12 * 7
    assert np.abs(a @ Q - Q * eig.values).max() < 1e-12 * scale * 7


def test_tridiagonal_and_diagonal_inputs():
    for a in (np.diag([3.0, -1.0, 2.0, 2.0]), np.diag([1.0, 2, 3, 4]) + np.diag([1.0, 0, 1], 1) + np.diag([1.0, 0, 1], -1)):
        eig = decompose(a)
        np.testing.assert_allclose(eig.values, np.linalg.eigvalsh(a), atol=1e-13)
        check_eigensystem(a, eig)


# --- degeneracy clustering


def test_group_four_cycle():
    part = group_degeneracies(np.array(FOUR_CYCLE), 1e-8)
    assert part.classes == [range(0, 1), range(1, 3), range(3, 4)]


def test_group_distinct():
    assert len(group_degeneracies(np.array([0.0, 1, 2, 3]), 0.5)) == 4


def test_group_chains_transitively():
    tau = 1e-3
    part = group_degeneracies(np.array([5, 5 + tau / 2, 5 + 2 * tau]), tau)
    assert len(part) == 2
    part = group_degeneracies(np.array([5, 5 + tau / 2, 5 + tau, 5 + 1.5 * tau]), tau)
    assert part.classes == [range(0, 4)]


@pytest.mark.parametrize("tau", [0.0, -1e-8])
def test_group_bad_tolerance(tau):
    with pytest.raises(DomainError):
        group_degeneracies(np.array([0.0, 1.0]), tau)


def test_group_default_tolerance(eig_of):
    eig = eig_of(4)
    assert group_degeneracies(eig).tolerance == default_tolerance(4.0) == 4e-8


@given(arrays(np.float64, st.integers(1, 40), elements=st.floats(0, 8)), st.floats(1e-9, 1.0))
def test_partition_invariants(vals, tau):
    vals = np.sort(vals)
    part = group_degeneracies(vals, tau)
    covered = [i for c in part.classes for i in c]
    assert covered == list(range(vals.size))
    for a, b in zip(part.classes, part.classes[1:]):
        assert vals[b.start] - vals[a.stop - 1] > tau
    for c in part.classes:
        assert np.all(np.diff(vals[c.start:c.stop]) <= tau)


def test_spectrum_csv(tmp_path):
    path = tmp_path / "s.csv"
    write_spectrum_csv([0.0, 2.0, 1 / 3], path)
    assert path.read_text() == "n,lambda\n0,0\n1,2\n2,0.33333333333333331\n"
