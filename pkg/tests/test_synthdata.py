"""Synthetic flight generation, labeling, scenario campaigns and dataset IO."""

import math

import numpy as np
import pytest

from windrisk.errors import ConfigError, InputError, ParseError
from windrisk.margin import frame_margin
from windrisk.synthdata import (
    DroneParams,
    WindScenario,
    flight_pair,
    gen_dataset,
    read_dataset,
    risk_from_rmse,
    scenario_grid,
    simulate_flight,
    write_dataset,
)

QUIET_DRONE = DroneParams(noise_std=0.0, attitude_noise=0.0)


class TestWindScenario:
    def test_valid_defaults(self):
        sc = WindScenario(wind_mean=5.0, wind_var=10.0)
        assert sc.duration == 60.0
        assert sc.gusts == ()

    def test_mean_range_enforced(self):
        with pytest.raises(ConfigError):
            WindScenario(wind_mean=25.0, wind_var=0.0)
        with pytest.raises(ConfigError):
            WindScenario(wind_mean=-1.0, wind_var=0.0)

    def test_var_range_enforced(self):
        with pytest.raises(ConfigError):
            WindScenario(wind_mean=0.0, wind_var=50.0)

    def test_duration_positive(self):
        with pytest.raises(ConfigError):
            WindScenario(wind_mean=0.0, wind_var=0.0, duration=0.0)

    def test_gust_window_order(self):
        with pytest.raises(ConfigError):
            WindScenario(wind_mean=0.0, wind_var=0.0, gusts=((5.0, 3.0, 10.0),))

    def test_gust_arity(self):
        with pytest.raises(ConfigError):
            WindScenario(wind_mean=0.0, wind_var=0.0, gusts=((1.0, 2.0),))


class TestDroneParams:
    def test_weights_alternate(self):
        w = DroneParams().weights()
        assert list(w) == [1.0, -0.5, 1.0, -0.5]
        assert list(DroneParams(n_motors=3).weights()) == [1.0, -0.5, 1.0]

    def test_validation(self):
        with pytest.raises(ConfigError):
            DroneParams(n_motors=0)
        with pytest.raises(ConfigError):
            DroneParams(hover=1.2)
        with pytest.raises(ConfigError):
            DroneParams(noise_std=-0.1)
        with pytest.raises(ConfigError):
            DroneParams(error_cap=0.0)


class TestSimulateFlight:
    def test_undisturbed_hover_is_exact(self):
        sc = WindScenario(wind_mean=0.0, wind_var=0.0, duration=5.0, seed=3)
        frames = simulate_flight(sc, QUIET_DRONE)
        assert len(frames) == 50
        for f in frames:
            assert all(c == 1600.0 for c in f.commands)
            assert f.attitude.roll == 0.0 and f.attitude.pitch == 0.0
        pair = flight_pair(frames)
        assert pair.margin_mean == pytest.approx(0.4, abs=1e-12)
        assert pair.margin_std == 0.0
        assert pair.risk == 0.0

    def test_deterministic_per_seed(self):
        sc = WindScenario(wind_mean=8.0, wind_var=10.0, duration=5.0, seed=5)
        a = simulate_flight(sc)
        b = simulate_flight(sc)
        assert len(a) == len(b)
        for fa, fb in zip(a, b):
            assert fa.t == fb.t
            assert fa.commands == fb.commands
            assert fa.attitude == fb.attitude

    def test_different_seeds_differ(self):
        a = simulate_flight(WindScenario(8.0, 10.0, duration=5.0, seed=1))
        b = simulate_flight(WindScenario(8.0, 10.0, duration=5.0, seed=2))
        assert any(fa.commands != fb.commands for fa, fb in zip(a, b))

    def test_strong_wind_saturates_upwind_motors(self):
        sc = WindScenario(wind_mean=18.0, wind_var=0.0, duration=30.0, seed=0)
        frames = simulate_flight(sc, QUIET_DRONE)
        for f in frames:
            assert max(f.commands) == 2000.0
            assert frame_margin(f) == 0.0
        pair = flight_pair(frames)
        assert pair.margin_mean == 0.0
        assert pair.risk == 100.0

    def test_gust_window_saturates_only_inside(self):
        sc = WindScenario(
            wind_mean=0.0, wind_var=0.0, duration=4.0, seed=0, gusts=((1.0, 2.0, 10.0),)
        )
        frames = simulate_flight(sc, QUIET_DRONE)
        for f in frames:
            if 1.0 <= f.t < 2.0:
                assert max(f.commands) == 2000.0
            else:
                assert all(c == 1600.0 for c in f.commands)

    def test_frame_count_from_duration_and_rate(self):
        sc = WindScenario(wind_mean=0.0, wind_var=0.0, duration=2.5)
        assert len(simulate_flight(sc, rate=10.0)) == 25
        assert len(simulate_flight(sc, rate=4.0)) == 10
        short = WindScenario(wind_mean=0.0, wind_var=0.0, duration=0.01)
        assert len(simulate_flight(short)) == 1

    def test_bad_rate_rejected(self):
        sc = WindScenario(wind_mean=0.0, wind_var=0.0)
        with pytest.raises(ConfigError):
            simulate_flight(sc, rate=0.0)

    def test_timestamps_strictly_increase(self):
        frames = simulate_flight(WindScenario(5.0, 5.0, duration=3.0, seed=9))
        ts = [f.t for f in frames]
        assert all(a < b for a, b in zip(ts, ts[1:]))


class TestRiskFromRmse:
    def test_linear_scale(self):
        assert risk_from_rmse(0.0) == 0.0
        assert risk_from_rmse(5.0) == 75.0
        assert risk_from_rmse(2.0) == 30.0

    def test_caps_at_hundred(self):
        assert risk_from_rmse(10.0) == 100.0
        assert risk_from_rmse(1000.0) == 100.0

    def test_rejects_bad_input(self):
        with pytest.raises(InputError):
            risk_from_rmse(-1.0)
        with pytest.raises(InputError):
            risk_from_rmse(float("nan"))


class TestFlightPair:
    def test_calm_flight_labels_low(self):
        sc = WindScenario(wind_mean=0.5, wind_var=0.5, duration=30.0, seed=1)
        pair = flight_pair(simulate_flight(sc))
        assert pair.margin_mean > 0.3
        assert pair.margin_std < 0.05
        assert pair.risk < 10.0

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            flight_pair([])

    def test_matches_manual_stats(self):
        frames = simulate_flight(WindScenario(6.0, 4.0, duration=5.0, seed=7))
        pair = flight_pair(frames)
        margins = [frame_margin(f) for f in frames]
        mean = sum(margins) / len(margins)
        var = sum((m - mean) ** 2 for m in margins) / len(margins)
        assert pair.margin_mean == pytest.approx(mean, abs=1e-12)
        assert pair.margin_std == pytest.approx(math.sqrt(var), abs=1e-12)


class TestScenarioGrid:
    def test_default_campaign_size(self):
        scenarios = scenario_grid()
        assert len(scenarios) == 19 * 11 + 9
        assert len(scenario_grid(include_gusts=False)) == 19 * 11

    def test_seeds_unique(self):
        seeds = [sc.seed for sc in scenario_grid(base_seed=42)]
        assert len(set(seeds)) == len(seeds)

    def test_gust_scenarios_cycle_through_flight(self):
        gusty = [sc for sc in scenario_grid() if sc.gusts]
        assert len(gusty) == 9
        for sc in gusty:
            assert len(sc.gusts) == 6
            assert sc.wind_mean == 0.0

    def test_custom_axes(self):
        scenarios = scenario_grid(
            wind_means=[0.0, 6.0], wind_vars=[0.0, 9.0], include_gusts=False
        )
        assert len(scenarios) == 4
        assert {(sc.wind_mean, sc.wind_var) for sc in scenarios} == {
            (0.0, 0.0),
            (0.0, 9.0),
            (6.0, 0.0),
            (6.0, 9.0),
        }


class TestDatasetStatistics:
    def test_margin_falls_and_risk_rises_with_wind(self):
        means = [0.0, 4.0, 8.0, 12.0, 16.0]
        avg_margin, avg_risk = [], []
        for m in means:
            scenarios = [
                WindScenario(wind_mean=m, wind_var=2.0, duration=20.0, seed=s)
                for s in range(10)
            ]
            pairs = gen_dataset(scenarios)
            avg_margin.append(sum(p.margin_mean for p in pairs) / len(pairs))
            avg_risk.append(sum(p.risk for p in pairs) / len(pairs))
        assert all(a >= b - 1e-6 for a, b in zip(avg_margin, avg_margin[1:]))
        assert all(a <= b + 1e-6 for a, b in zip(avg_risk, avg_risk[1:]))

    def test_margin_mean_anticorrelates_with_risk(self, learned):
        pairs, _, _ = learned
        r = np.corrcoef(
            [p.margin_mean for p in pairs], [p.risk for p in pairs]
        )[0, 1]
        assert r <= -0.5

    def test_regeneration_is_bit_stable(self):
        scenarios = scenario_grid(
            wind_means=[0.0, 10.0], wind_vars=[0.0, 16.0], duration=5.0,
            include_gusts=False,
        )
        assert gen_dataset(scenarios) == gen_dataset(scenarios)

    def test_empty_scenario_list_rejected(self):
        with pytest.raises(InputError):
            gen_dataset([])


class TestDatasetIO:
    def test_round_trip_exact(self, tmp_path):
        scenarios = scenario_grid(
            wind_means=[0.0, 12.0], wind_vars=[0.0, 25.0], duration=5.0,
            include_gusts=False,
        )
        pairs = gen_dataset(scenarios)
        path = tmp_path / "data.csv"
        write_dataset(pairs, path)
        assert read_dataset(path) == pairs

    def test_header_written(self, tmp_path):
        path = tmp_path / "data.csv"
        write_dataset(gen_dataset([WindScenario(0.0, 0.0, duration=1.0)]), path)
        assert path.read_text().splitlines()[0] == "margin_mean,margin_std,risk"

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n0.1,0.1,50\n")
        with pytest.raises(ParseError, match="line 1"):
            read_dataset(path)

    def test_bad_float_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("margin_mean,margin_std,risk\n0.1,0.1,50\n0.2,oops,10\n")
        with pytest.raises(ParseError, match="line 3") as err:
            read_dataset(path)
        assert err.value.line == 3

    def test_wrong_field_count_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("margin_mean,margin_std,risk\n0.1,0.1\n")
        with pytest.raises(ParseError, match="line 2"):
            read_dataset(path)

    def test_non_finite_value_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("margin_mean,margin_std,risk\nnan,0.1,50\n")
        with pytest.raises(ParseError, match="line 2"):
            read_dataset(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            read_dataset(path)

    def test_header_only_rejected(self, tmp_path):
        path = tmp_path / "header.csv"
        path.write_text("margin_mean,margin_std,risk\n")
        with pytest.raises(ParseError, match="no data rows"):
            read_dataset(path)

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "gaps.csv"
        path.write_text("margin_mean,margin_std,risk\n0.1,0.05,20\n\n0.2,0.01,5\n")
        assert len(read_dataset(path)) == 2
