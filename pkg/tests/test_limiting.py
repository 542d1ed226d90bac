import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qwalk.errors import DomainError, InsufficientDataError
from qwalk.lattice import LatticeSpec, build_adjacency, mirror, special_nodes
from qwalk.limiting import (
    AsymmetryRecord,
    asymmetry_scan,
    fit_loglog,
    limiting_by_time_average,
    limiting_field,
    limiting_values,
    scaling_series,
    star_contrast,
    write_scan_csv,
)
from qwalk.spectral import decompose, group_degeneracies

from cache import eigensystem

# time averages of the 4-cycle probabilities: cos^4 t -> 3/8, (1 - cos 4t)/8 -> 1/8,
# (1 - cos 2t)^2 / 4 -> 3/8
FOUR_CYCLE_CHI = {(1, 1): 3 / 8, (2, 1): 1 / 8, (1, 2): 1 / 8, (2, 2): 3 / 8}


def chi(N, j):
    eig = eigensystem(N)
    return limiting_field(eig, group_degeneracies(eig), j)


def test_four_cycle_formula():
    field = chi(2, (1, 1))
    for k, v in FOUR_CYCLE_CHI.items():
        assert field.at(k) == pytest.approx(v, abs=1e-12)


def test_four_cycle_time_average():
    field = limiting_by_time_average(eigensystem(2), (1, 1), T=1e3, dt=0.01)
    for k, v in FOUR_CYCLE_CHI.items():
        assert field.at(k) == pytest.approx(v, abs=1e-3)


def test_symmetric_size_five():
    field = chi(5, (1, 1))
    assert field.at((1, 1)) == pytest.approx(field.at((5, 5)), abs=1e-12)


def test_asymmetric_size_six():
    field = chi(6, (1, 1))
    assert field.at((1, 1)) - field.at((6, 6)) > 1e-3


def test_formula_against_time_average_five():
    eig = eigensystem(5)
    formula = limiting_field(eig, group_degeneracies(eig), (1, 1))
    brute = limiting_by_time_average(eig, (1, 1), T=1e4, dt=0.01)
    assert np.abs(formula.values - brute.values).max() < 1e-3


def test_time_average_converges():
    eig = eigensystem(3)
    a = limiting_by_time_average(eig, (1, 1), T=500, dt=0.01).values
    b = limiting_by_time_average(eig, (1, 1), T=1000, dt=0.01).values
    assert np.abs(a - b).max() < 2e-3


def test_time_average_arguments():
    with pytest.raises(DomainError):
        limiting_by_time_average(eigensystem(2), (1, 1), T=0, dt=0.01)
    with pytest.raises(DomainError):
        limiting_by_time_average(eigensystem(2), (1, 1), T=1, dt=2)


@settings(deadline=None, max_examples=40)
@given(st.integers(1, 12).flatmap(lambda N: st.tuples(st.just(N), st.integers(1, N), st.integers(1, N))))
def test_normalisation_and_mirror_covariance(case):
    N, jx, jy = case
    field = chi(N, (jx, jy))
    assert field.values.sum() == pytest.approx(1, abs=1e-10)
    assert field.values.min() >= 0
    mirrored = chi(N, mirror((jx, jy), N))
    np.testing.assert_allclose(mirrored.values[::-1, ::-1], field.values, atol=1e-12)


@pytest.mark.parametrize("N", [3, 5, 9, 15])
def test_middle_source_is_inversion_symmetric(N):
    field = chi(N, special_nodes(N).middle)
    np.testing.assert_allclose(field.values[::-1, ::-1], field.values, atol=1e-12)


@pytest.mark.parametrize("N", [9, 15, 21])
def test_star_pattern(N):
    m = special_nodes(N).middle
    on, off = star_contrast(chi(N, m), m)
    assert on > off


def test_partition_mismatch():
    eig = eigensystem(3)
    other = group_degeneracies(eigensystem(4))
    with pytest.raises(DomainError):
        limiting_field(eig, other, (1, 1))


def test_values_from_partial_rows_match_full():
    N = 12
    full = chi(N, (1, 1))
    eig = decompose(build_adjacency(LatticeSpec(N)), rows=[0, 143, 5])
    part = group_degeneracies(eig)
    vals = limiting_values(eig, part, (1, 1), [0, 143, 5])
    np.testing.assert_allclose(vals, [full.at((1, 1)), full.at((12, 12)), full.at((6, 1))], atol=1e-12)


# --- scan


def test_scan_small():
    records = asymmetry_scan(1, 12)
    assert [r.N for r in records] == list(range(1, 13))
    assert [r.N for r in records if r.asymmetric] == [6, 12]
    six = records[5]
    assert six.diff_scaled == pytest.approx((six.chi_cc - six.chi_oc) * 36)
    assert not any(r.tolerance_sensitive for r in records)


def test_scan_parallel_matches_serial():
    assert asymmetry_scan(4, 9, jobs=2) == asymmetry_scan(4, 9)


def test_scan_flags_tolerance_sensitivity():
    # at a coarse tolerance, nearby distinct levels start merging and verdicts flip
    records = {r.N: r for r in asymmetry_scan(14, 14, tau=1e-3)}
    assert records[14].tolerance_sensitive


def test_scan_range_checks():
    with pytest.raises(DomainError):
        asymmetry_scan(0, 5)
    with pytest.raises(DomainError):
        asymmetry_scan(5, 61)
    with pytest.raises(DomainError):
        asymmetry_scan(6, 5)


def test_scan_csv(tmp_path):
    path = tmp_path / "scan.csv"
    write_scan_csv([AsymmetryRecord(6, 0.1, 0.05, 1.8, True, False)], path)
    assert path.read_text() == (
        "N,chi_cc,chi_oc,diff_scaled,asymmetric,tolerance_sensitive\n"
        "6,0.10000000000000001,0.050000000000000003,1.8,true,false\n"
    )


# --- scaling


def test_classical_equipartition_slope():
    res = scaling_series([5, 7, 9, 11])
    for p in res.points:
        assert p.classical == pytest.approx(1 / p.N**2, rel=1e-10)
    assert res.fit_classical.slope == pytest.approx(-2, abs=1e-8)
    assert res.fit_mm.points == 4


def test_scaling_matches_fields():
    res = scaling_series([3, 5, 7])
    for p in res.points:
        m = special_nodes(p.N).middle
        assert p.chi_mm == pytest.approx(chi(p.N, m).at(m), abs=1e-12)
        assert p.chi_oc == pytest.approx(chi(p.N, (1, 1)).at((p.N, p.N)), abs=1e-12)


def test_scaling_needs_three_points():
    with pytest.raises(InsufficientDataError):
        scaling_series([9])
    with pytest.raises(InsufficientDataError):
        fit_loglog([3, 5], [1.0, 2.0])


def test_scaling_rejects_even_middle():
    with pytest.raises(DomainError):
        scaling_series([5, 6, 7])


def test_fit_exact_power_law():
    Ns = np.array([3.0, 5, 9, 17])
    fit = fit_loglog(Ns, 2 * Ns**-1.5)
    assert fit.slope == pytest.approx(-1.5)
    assert fit.intercept == pytest.approx(np.log(2))
    assert fit.residual < 1e-12
