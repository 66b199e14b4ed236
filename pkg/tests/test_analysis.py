import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorscatter import (
    DomainError,
    InsufficientPoints,
    PotentialSpec,
    brute_force_transmission,
    find_resonances,
    k_sweep,
    rho_k_grid,
    saturation_metric,
    scaling_fit,
    transmission_closed_form,
)
from cantorscatter.analysis import bloch_bands, resonance_window
from helpers import specs

BINARY_FAMILY = PotentialSpec(2, 2.1, 0.0, 1.0, 2, 5.0, 25.0)


def test_sweep_free_particle():
    tab = k_sweep(BINARY_FAMILY.replace(V=0.0), 0.1, 8.0, 101)
    np.testing.assert_array_equal(tab.t, 1.0)
    assert tab.axis[0] == 0.1 and tab.axis[-1] == 8.0 and tab.axis.size == 101


def test_sweep_both_methods():
    tab = k_sweep(PotentialSpec(3, 4.5, 1.0, 0.5, 3, 5.0, 25.0), 0.1, 8.0, 700, method="both")
    assert tab.discrepancy <= 1e-8
    for t, r in ((tab.t, tab.r), (tab.t_oracle, tab.r_oracle)):
        assert np.all((t >= 0) & (t <= 1) & (r >= 0) & (r <= 1))
        assert np.max(np.abs(t + r - 1)) <= 1e-10
    assert np.all(np.diff(tab.axis) > 0)


def test_sweep_rejects_bad_input():
    with pytest.raises(DomainError):
        k_sweep(BINARY_FAMILY, 0.0, 1.0, 10)
    with pytest.raises(DomainError):
        k_sweep(BINARY_FAMILY, 1.0, 2.0, 1)
    with pytest.raises(DomainError):
        k_sweep(BINARY_FAMILY, 1.0, 2.0, 10, method="exact")


def test_binary_family_regression():
    # oracle values, closed form agrees to 3e-15
    k = np.array([0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    frozen = [1.3501130658811504e-12, 2.6416009268667413e-10, 7.741126159597652e-09, 8.977826856630977e-07,
              0.12449192376636004, 0.0028618407477973415, 0.04830263378475557, 0.9998800381651075,
              0.9998352256520922]
    np.testing.assert_allclose(brute_force_transmission(BINARY_FAMILY, k), frozen, rtol=1e-9)
    tab = k_sweep(BINARY_FAMILY, 0.5, 8.0, 16, method="both")
    np.testing.assert_allclose(tab.t[[0, 1, 3, 5, 7, 9, 11, 13, 15]], frozen, rtol=1e-8, atol=1e-14)


def test_sweep_workers_identical():
    spec = PotentialSpec(3, 4.5, 1.0, 0.5, 3, 5.0, 25.0)
    a = k_sweep(spec, 0.1, 8, 1500, method="both", workers=1)
    b = k_sweep(spec, 0.1, 8, 1500, method="both", workers=3)
    np.testing.assert_array_equal(a.t, b.t)
    np.testing.assert_array_equal(a.t_oracle, b.t_oracle)


def test_grid_single_node():
    spec = PotentialSpec(3, 5.0, 0.5, 0.0, 2, 25.0, 25.0)
    g = rho_k_grid(spec, 5.0, 5.0, 1, 3.3, 3.3, 1)
    assert g.t.shape == (1, 1)
    assert g.t[0, 0] == transmission_closed_form(spec, 3.3)


def test_grid_marks_invalid_rows():
    # the (1.25, 1.5) rho window violates rho**0.5 > N - 1 for N = 3 throughout
    g = rho_k_grid(PotentialSpec(3, 5.0, 0.5, 0.0, 2, 25.0, 25.0), 1.25, 1.5, 6, 6.0, 8.0, 20)
    assert not g.valid.any()
    assert np.isnan(g.t).all()
    g = rho_k_grid(PotentialSpec(3, 5.0, 0.5, 0.0, 2, 25.0, 25.0), 3.5, 4.5, 5, 6.0, 8.0, 20)
    np.testing.assert_array_equal(g.valid, g.rho_axis > 4.0)
    assert np.isnan(g.t[~g.valid]).all() and np.isfinite(g.t[g.valid]).all()


def test_null_regions_and_streaks():
    template = PotentialSpec(3, 10.0, 0.5, 0.0, 2, 25.0, 25.0)
    g = rho_k_grid(template, 9.0, 12.0, 26, 3.0, 5.0, 4001)
    assert g.valid.all()
    assert np.all((g.t > 0) & (g.t <= 1))
    null = (g.t < 1e-6).mean()
    hot = (g.t > 0.99).mean()
    assert null >= 0.2
    assert 0 < hot <= 0.1
    per_band = Counter()
    for rho in g.rho_axis[::5]:
        spec = template.replace(rho=float(rho))
        peaks = [p.k for p in find_resonances(spec, 3.0, 5.0, 8000, 0.99).peaks]
        for a, b in bloch_bands(spec, 3.0, 5.0, 40000):
            per_band[sum(a - 1e-3 <= k <= b + 1e-3 for k in peaks)] += 1
    assert per_band.most_common(1)[0][0] == template.N - 1


def test_mean_transmission_trend():
    template = PotentialSpec(3, 1.8, 0.5, 1.15, 1, 25.0, 25.0)
    means = [np.nanmean(rho_k_grid(template.replace(S=S), 1.55, 2.0, 51, 7.0, 10.0, 2001).t) for S in range(1, 7)]
    drops = [means[i] - means[i + 1] for i in range(1, 5) if means[i + 1] < means[i]]
    assert len(drops) <= 1 and all(d <= 1e-3 for d in drops)


def test_saturation_examples():
    fam = PotentialSpec(3, 2.0, 0.5, 1.0, 1, 25.0, 25.0)
    res = saturation_metric(fam, [6, 12], 1e-3, 4.0, 2000)
    assert res.pair(6, 6) == 0.0 and res.pair(12, 12) == 0.0
    fast = saturation_metric(fam.replace(nu=3.5), [6, 12], 1e-3, 4.0, 2000)
    assert fast.pair(6, 12) < res.pair(6, 12)
    fam = PotentialSpec(3, 3.5, 2.0, 0.0, 1, 25.0, 25.0)
    assert (saturation_metric(fam.replace(mu=9.0), [2, 4], 1e-3, 4.0, 2000).pair(2, 4)
            < saturation_metric(fam, [2, 4], 1e-3, 4.0, 2000).pair(2, 4))
    with pytest.raises(DomainError):
        saturation_metric(fam, [2, 2], 1e-3, 4.0, 10)


def test_saturated_beyond():
    res = saturation_metric(PotentialSpec(3, 2.0, 0.5, 3.5, 1, 25.0, 25.0), [2, 4, 6, 8], 1e-3, 4.0, 1000)
    s_star = res.saturated_beyond(0.05)
    assert s_star is not None
    i = res.stages.index(s_star)
    assert i < len(res.stages) - 1
    assert np.all(res.distance[i:, i:] <= 0.05)
    slow = saturation_metric(PotentialSpec(3, 3.5, 2.0, 0.0, 1, 25.0, 25.0), [1, 2, 3, 4], 1e-3, 4.0, 500)
    assert slow.saturated_beyond(0.05) is None


@settings(max_examples=25, deadline=None)
@given(specs(max_N=4, max_S=0), st.lists(st.integers(0, 5), min_size=3, max_size=4, unique=True))
def test_saturation_pseudometric(fam, stages):
    D = saturation_metric(fam, stages, 0.1, 2 * math.sqrt(fam.V), 300).distance
    assert np.all(np.diag(D) == 0)
    np.testing.assert_array_equal(D, D.T)
    n = len(stages)
    for i in range(n):
        for j in range(n):
            for m in range(n):
                assert D[i, j] <= D[i, m] + D[m, j] + 1e-12


def _analytic_single_barrier_slope(L, V, k):
    kt = np.sqrt(k * k - V + 0j)
    x = np.abs(0.5 * (k / kt - kt / k) * np.sin(kt * L)) ** 2
    R = x / (1 + x)
    keep = R >= 1e-14
    return np.polyfit(np.log(k[keep]), np.log(R[keep]), 1)[0]


def test_scaling_single_barrier_tail():
    spec = PotentialSpec(2, 3.5, 0.5, 1.5, 0, 1.0, 0.0)
    fit = scaling_fit(spec, 10.0, 100.0, 1e4, 400)
    ref = _analytic_single_barrier_slope(1.0, 10.0, np.geomspace(100.0, 1e4, 400))
    assert fit.slope == pytest.approx(ref, abs=1e-6)
    assert fit.n_used + fit.n_excluded == 400


def test_scaling_thin_barrier_inverse_square():
    # k L << 1 as well as k^2 >> V: R ~ (V L / 2k)^2
    fit = scaling_fit(PotentialSpec(2, 3.5, 0.5, 1.5, 0, 1e-4, 0.0), 10.0, 100.0, 1e3, 200)
    assert abs(fit.slope + 2) <= 0.05
    fit = scaling_fit(PotentialSpec(3, 3.5, 0.5, 1.5, 2, 1e-4, 0.0), 10.0, 100.0, 1e3, 200)
    assert abs(fit.slope + 2) <= 0.05


def test_scaling_domain_checks():
    spec = PotentialSpec(2, 3.5, 0.5, 1.5, 2, 1.0, 0.0)
    with pytest.raises(DomainError):
        scaling_fit(spec, 10.0, 1.0, 100.0, 100)
    with pytest.raises(InsufficientPoints):
        scaling_fit(spec, 10.0, 100.0, 1e4, 400, null_threshold=1.0)


def test_stage_overlap_large_N():
    # successive-stage fitted curves converge: their gap shrinks stage by stage
    lk = np.log(np.geomspace(100.0, 1e4, 400))
    lines = []
    for S in (2, 3, 4, 5):
        f = scaling_fit(PotentialSpec(8, 3.5, 0.5, 1.5, S, 1.0, 0.0), 10.0, 100.0, 1e4, 400)
        lines.append(f.slope * lk + f.intercept)
    gaps = [np.max(np.abs(lines[i] - lines[i + 1])) for i in range(3)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3


def test_resonances_free_particle():
    scan = find_resonances(BINARY_FAMILY.replace(V=0.0), 0.5, 8.0)
    assert scan.plateau and scan.peaks == []


def test_resonances_single_barrier():
    V, L = 25.0, 1.0
    spec = PotentialSpec(2, 3.0, 1.0, 0.0, 0, L, V)
    scan = find_resonances(spec, 5.5, 14.0, 2000, 0.99)
    expected = [math.sqrt(V + (m * math.pi / L) ** 2) for m in range(1, 5)]
    got = [p.k for p in scan.peaks]
    assert len(got) == len(expected)
    np.testing.assert_allclose(got, expected, atol=1e-8)


@pytest.mark.parametrize("N, S", [(2, 2), (3, 1), (4, 2), (5, 2)])
def test_resonance_multiplicity(N, S):
    spec = PotentialSpec(N, N + 0.1, 0.0, 1.0, S, 5.0, 25.0)
    lo, hi = resonance_window(spec, 1e-3, 8.0, 40000)
    peaks = find_resonances(spec, lo, hi, 2000, 0.99).peaks
    assert len(peaks) == N - 1
    for p in peaks:
        # each reported k* is the local maximum to within 1e-9 in T
        near = np.linspace(p.k - 1e-6, p.k + 1e-6, 201)
        assert abs(p.T - transmission_closed_form(spec, near).max()) <= 1e-9
        assert p.width > 0


def test_resonance_input_checks():
    with pytest.raises(DomainError):
        find_resonances(BINARY_FAMILY, 1, 2, 50)
    with pytest.raises(DomainError):
        find_resonances(BINARY_FAMILY, 1, 2, 200, threshold=1.0)
