import math
import warnings

import numpy as np
import pytest

from core.errors import TruncationError
from decay.rates import rate_semiclassical
from decay.self_energy import Branch, pole_amplitude
from dynamics.contour import ORACLE_TOL, contour_oracle, contour_oracle_many
from dynamics.path_series import (
    Combinatorics,
    bounces_arrived,
    path_coefficients,
    path_series_amplitude,
    path_series_eval,
)
from dynamics.trace import (
    AmplitudeTrace,
    TraceMethod,
    bounce_report,
    decay_trace,
    fit_decay_rate,
)
from modes.params import CavityParams

ORACLE_GRID = np.linspace(0.0, 5.0, 101)


def lowest_mode_params(gamma_s_T: float, **kwargs) -> CavityParams:
    """u = pi/2 cavity; strong coupling values trip the RWA warning on purpose"""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return CavityParams(u=math.pi / 2, gamma_s_T=gamma_s_T, **kwargs)


class TestPathSeries:
    """test the photon-path expansion"""

    def test_bounces_arrived(self):
        """reflection M contributes only once |t| > M T"""
        params = lowest_mode_params(5.0, m_max=4)
        test_cases = [(0.0, 0), (1.0, 0), (1.0001, 1), (2.0, 1), (2.5, 2), (30.0, 4), (-2.5, 2)]
        for t, expected in test_cases:
            assert bounces_arrived(params, t) == expected

    def test_free_decay_before_first_bounce(self):
        """for |t| <= T the amplitude is the free exponential"""
        params = lowest_mode_params(5.0)
        for t in np.linspace(0.0, 1.0, 11):
            assert path_series_amplitude(params, t) == pytest.approx(math.exp(-2.5 * t), abs=1e-15)

    def test_no_mirror_limit(self):
        """without reflection terms |A| is exactly exp(-tau/2)"""
        params = lowest_mode_params(5.0, m_max=0)
        for t in np.linspace(0.0, 5.0, 26):
            assert abs(path_series_amplitude(params, t)) == math.exp(-0.5 * 5.0 * t)

    def test_causality(self):
        """amplitude does not depend on reflections that have not arrived"""
        short = lowest_mode_params(5.0, m_max=3)
        long = lowest_mode_params(5.0, m_max=10)
        for t in np.linspace(0.0, 3.99, 40):
            assert path_series_amplitude(short, t) == pytest.approx(path_series_amplitude(long, t), abs=1e-14)

    def test_displayed_combinatorics(self):
        """both coefficient rules agree up to three reflections"""
        params = lowest_mode_params(5.0, m_max=6)
        exact = path_coefficients(params, Combinatorics.EXACT)
        displayed = path_coefficients(params, Combinatorics.DISPLAYED)
        np.testing.assert_allclose(exact[:4], displayed[:4], atol=1e-15)
        for t in np.linspace(0.0, 4.0, 41):
            assert path_series_amplitude(params, t, combinatorics="displayed") == pytest.approx(
                path_series_amplitude(params, t), abs=1e-12
            )

    def test_coefficients_read_only(self):
        """cached coefficient tables cannot be modified"""
        table = path_coefficients(lowest_mode_params(5.0, m_max=3), Combinatorics.EXACT)
        with pytest.raises(ValueError):
            table[1, 1] = 0.0

    def test_bounce_terms(self):
        """evaluation exposes one term per arrived reflection"""
        evaluation = path_series_eval(lowest_mode_params(5.0), 3.5)
        assert evaluation.m_used == 3
        assert len(evaluation.bounce_terms) == 3

    def test_time_reversal(self):
        """|A_advanced(-t)| = |A_retarded(t)|"""
        for g in (0.01, 5.0):
            params = lowest_mode_params(g)
            for t in ORACLE_GRID:
                retarded = path_series_amplitude(params, t, Branch.RETARDED)
                advanced = path_series_amplitude(params, -t, Branch.ADVANCED)
                assert abs(abs(advanced) - abs(retarded)) <= 1e-10


class TestContourOracle:
    """test the path series against direct inversion of the resolvent"""

    @pytest.mark.parametrize("gamma_s_T", [0.01, 5.0])
    def test_oracle_equivalence(self, gamma_s_T):
        """path series and contour inversion agree on t in [0, 5T]"""
        params = lowest_mode_params(gamma_s_T, m_max=20)
        oracle = contour_oracle_many(params, ORACLE_GRID)
        path = np.array([path_series_amplitude(params, t) for t in ORACLE_GRID])
        assert oracle.error_estimate <= 1e-4
        assert np.max(np.abs(path - oracle.values)) <= 1e-3

    def test_advanced_branch(self):
        """oracle works on negative times for the advanced branch"""
        params = lowest_mode_params(5.0, m_max=8)
        times = -np.linspace(0.0, 3.0, 13)
        oracle = contour_oracle_many(params, times, Branch.ADVANCED)
        path = np.array([path_series_amplitude(params, t, Branch.ADVANCED) for t in times])
        assert np.max(np.abs(path - oracle.values)) <= 1e-3

    def test_free_case(self):
        """without reflections the oracle returns the free exponential"""
        params = lowest_mode_params(5.0, m_max=0)
        assert contour_oracle(params, 1.5) == pytest.approx(math.exp(-3.75), abs=1e-15)

    def test_short_cutoff(self):
        """a cutoff too small for the tolerance is refused"""
        params = lowest_mode_params(5.0, m_max=5)
        with pytest.raises(TruncationError):
            contour_oracle_many(params, [1.5], tol=1e-8, cutoff=1.0)

    def test_pole_approximation_at_late_times(self):
        """weak coupling: the contour inversion settles onto the pole form after fifty round trips"""
        params = lowest_mode_params(0.01)
        oracle = contour_oracle(params, 50.0)
        pole = pole_amplitude(params, 50.0)
        # the pole form drops the O(gamma_s_T) residue and pole shift, about 1.6e-3 here
        assert abs(oracle - pole) <= 2.5e-3
        assert abs(oracle) == pytest.approx(abs(pole), rel=5e-3)


class TestTraces:
    """test traces, fits and bounce reports"""

    def test_fitted_rate(self):
        """weak coupling decays exponentially at the modified rate"""
        params = lowest_mode_params(0.01)
        trace = decay_trace(params, np.linspace(1.0, 100.0, 199))
        fitted = fit_decay_rate(trace, 1.0, 100.0)
        expected = rate_semiclassical(params).ratio_total
        assert abs(fitted - expected) / expected <= 0.02

    def test_bounce_feature(self):
        """strong coupling departs from the exponential after the first round trip"""
        params = lowest_mode_params(5.0)
        times = np.linspace(1.0, 2.0, 51)[1:]
        trace = decay_trace(params, times)
        free = np.exp(-0.5 * 5.0 * times)
        assert np.max(np.abs(np.asarray(trace.values) - free)) > 10.0 * ORACLE_TOL
        assert trace.m_used == 1

    def test_methods_agree(self):
        """path series trace against the oracle trace"""
        params = lowest_mode_params(5.0, m_max=6)
        grid = np.linspace(0.0, 3.0, 31)
        path = decay_trace(params, grid, TraceMethod.PATH_SERIES)
        oracle = decay_trace(params, grid, TraceMethod.CONTOUR_ORACLE)
        assert isinstance(oracle, AmplitudeTrace)
        assert path.max_deviation(oracle) <= 1e-3

    def test_pole_trace(self):
        """pole trace is a pure exponential in |A|^2"""
        params = lowest_mode_params(0.01)
        trace = decay_trace(params, [0.0, 50.0, 100.0], TraceMethod.POLE)
        probabilities = trace.probabilities()
        assert probabilities[0] == pytest.approx(1.0)
        assert probabilities[2] == pytest.approx(probabilities[1] ** 2, rel=1e-12)

    def test_grid_validation(self):
        """unsorted, empty or wrong-sign grids are rejected"""
        params = lowest_mode_params(0.01)
        test_cases = [([], Branch.RETARDED), ([2.0, 1.0], Branch.RETARDED), ([-1.0, 0.0], Branch.RETARDED)]
        for grid, branch in test_cases:
            with pytest.raises(ValueError):
                decay_trace(params, grid, branch=branch)

    def test_mismatched_grids(self):
        """deviation needs a common grid"""
        params = lowest_mode_params(0.01)
        first = decay_trace(params, [0.0, 1.0])
        second = decay_trace(params, [0.0, 2.0])
        with pytest.raises(ValueError):
            first.max_deviation(second)

    def test_fit_needs_decay(self):
        """fit rejects gamma_s_T = 0 and empty windows"""
        trace = decay_trace(CavityParams(u=3.0), [0.0, 1.0, 2.0])
        with pytest.raises(ValueError):
            fit_decay_rate(trace, 0.0, 2.0)
        trace = decay_trace(lowest_mode_params(0.01), [0.0, 1.0, 2.0])
        with pytest.raises(ValueError):
            fit_decay_rate(trace, 10.0, 20.0)

    def test_bounce_report(self):
        """per-window rows shrink with M and match the oracle"""
        params = lowest_mode_params(5.0, m_max=3)
        rows = bounce_report(params, windows=3, samples=5)
        assert [row.m for row in rows] == [1, 2, 3]
        assert all(row.oracle_deviation <= 1e-3 for row in rows)
        assert all(row.displayed_deviation <= 1e-12 for row in rows)
        assert rows[0].largest_term > rows[2].largest_term
