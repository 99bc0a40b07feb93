import dataclasses
import math
import time

import pytest

from rpusim import hwcalc
from rpusim.hwcalc import (HwParams, OverBudgetError, acceptable_noise_nv,
                           array_power_area, array_size, c_int_ff, derive,
                           design_point, device_resistance_mohm,
                           device_spec_table, line_length_mm, noise_budget_nv,
                           opamp_vout, quantized_length_mm, thermal_noise_nv,
                           tile_metrics)


@pytest.fixture(scope="module")
def d():
    return derive(HwParams())


def within(value, target, tol=0.03):
    return abs(value - target) <= tol * abs(target)


class TestLineLength:
    def test_reproduces_published_length(self):
        assert within(line_length_mm(HwParams()), 1.64, 0.03)

    def test_sqrt_scaling_with_delay_budget(self):
        p4 = HwParams(delay_fraction=0.4)
        assert line_length_mm(p4) == pytest.approx(2 * line_length_mm(HwParams()))

    def test_forward_substitution_meets_budget(self):
        # plug 1.64 mm back into the delay model
        p = HwParams()
        l_um = 1.64e3
        tau = 0.5 * p.r_line_ohm_um * l_um * p.c_line_ff_um * 1e-15 * l_um
        assert tau <= 0.1e-9 * 1.0001
        assert tau == pytest.approx(0.097e-9, rel=0.02)


class TestArraySize:
    def test_published_array(self):
        assert array_size(1.64, 400) == 4096

    def test_halved_line(self):
        assert array_size(0.82, 400) == 2048

    def test_raw_mode(self):
        assert array_size(1.64, 400, power_of_two=False) == 4100


class TestDeviceResistance:
    def test_published_value(self):
        r_line = 0.36 * 1640
        assert within(device_resistance_mohm(4096, r_line, 0.1), 24.0, 0.03)

    def test_drop_linearity(self):
        r = device_resistance_mohm(4096, 590, 0.1)
        assert device_resistance_mohm(4096, 590, 0.2) == pytest.approx(r / 2)

    def test_pipeline_end_to_end(self, d):
        assert within(d.r_device_mohm, 24.0, 0.05)


class TestPowerArea:
    def test_published_power(self, d):
        assert within(d.p_array_w, 0.28, 0.02)

    def test_published_area(self, d):
        assert within(d.a_array_mm2, 2.68, 0.03)

    def test_zero_activity_zero_power(self):
        p = HwParams()
        p.activity = 0.0
        power, _ = array_power_area(p, 4096, 24.0)
        assert power == 0.0


class TestIntegrator:
    def test_output_reaches_adc_range(self, d):
        v = opamp_vout(HwParams(), 12, 57.0, 24.0)
        assert within(v, 1.0, 0.01)

    def test_no_contrast_no_output(self):
        p = HwParams(beta=1.0)
        assert opamp_vout(p, 12, 57.0, 24.0) == 0.0

    def test_capacitor_inverse(self):
        assert within(c_int_ff(HwParams(), 12, 24.0), 57.0, 0.01)

    def test_derived_capacitor(self, d):
        assert within(d.c_int_ff, 57.0, 0.03)
        assert d.v_out_check_v == pytest.approx(1.0, abs=1e-9)


class TestNoise:
    def test_budget_remainder(self):
        assert noise_budget_nv(15.1, [7.0]) == pytest.approx(13.38, abs=0.05)

    def test_empty_components(self):
        assert noise_budget_nv(15.1, []) == 15.1

    def test_over_budget(self):
        with pytest.raises(OverBudgetError):
            noise_budget_nv(10.0, [7.0, 8.0])

    def test_thermal_published(self):
        assert within(thermal_noise_nv(24.0, 4096, pair=True), 7.0, 0.01)

    def test_thermal_scalings(self):
        base = thermal_noise_nv(24.0, 4096, pair=True)
        assert thermal_noise_nv(96.0, 4096, pair=True) == pytest.approx(2 * base)
        assert thermal_noise_nv(24.0, 4096, pair=False) == \
            pytest.approx(math.sqrt(2) * base)

    def test_acceptable_noise_anchors(self):
        p = HwParams()
        assert acceptable_noise_nv(p, 6.0, 80.0) == pytest.approx(15.1)
        # the short-integration curve plateaus near 10 nV/rtHz at high contrast
        assert acceptable_noise_nv(p, 1000.0, 20.0) == pytest.approx(10.6, abs=0.3)
        assert acceptable_noise_nv(p, 2.0, 20.0) < acceptable_noise_nv(p, 10.0, 20.0)


class TestTileMetrics:
    def test_published_rates(self, d):
        t = d.tile
        assert within(t.update_rate_tups, 839, 0.01)
        assert within(t.throughput_tops, 419, 0.01)
        assert within(t.power_eff_tops_w, 210, 0.03)
        assert within(t.area_eff_tops_mm2, 156, 0.01)
        assert within(t.bandwidth_gb_s, 90, 0.01)
        assert within(t.compute_rate_gops, 51, 0.01)

    def test_adc_aggregates(self, d):
        assert d.adc_count == 64
        assert within(d.adc_total_power_w, 1.0, 0.02)
        assert within(d.adc_shared_area_mm2, 1.64, 0.01)
        assert within(d.adc_rate_msps, 800, 0.01)
        assert within(d.noise_ceiling_mv, 4.0, 0.03)

    def test_update_cycle_arithmetic(self):
        p = HwParams()
        t = tile_metrics(p, 4096, 0.28, 2.68, 1.0)
        # 2*BL pulses of 1 ns = 20 ns per full update cycle
        assert t.update_rate_tups == pytest.approx(4096**2 / 20e-9 / 1e12)

    def test_bandwidth_bit_arithmetic(self):
        p = HwParams()
        t = tile_metrics(p, 4096, 0.28, 2.68, 1.0)
        assert t.bandwidth_gb_s == pytest.approx(4096 * 14 / 8 / 80e-9 / 1e9)


TABLE1_EXPECT = {
    "Design 1": (5000, 250, 20100, 200, 7400),
    "Design 2": (21000, 250, 83800, 840, 31000),
    "Design 3": (420, 22, 19000, 1680, 620),
}


class TestTable1:
    def test_design_rows_match_published(self, d):
        rows = {r.system: r for r in d.table1}
        for name, (tput, power, eff, size, accel) in TABLE1_EXPECT.items():
            r = rows[name]
            assert within(r.throughput_tops, tput), name
            assert r.power_w == power, name
            assert within(r.efficiency_gops_w, eff), name
            assert within(r.network_size_m, size), name
            assert within(r.accel_vs_cpu, accel), name

    def test_design_point_construction(self):
        row = design_point(12, 12, 250.0, 419.4, 4096, 0.676, "x")
        assert row.throughput_tops == pytest.approx(12 * 419.4)
        assert row.network_size_m == pytest.approx(12 * 4096**2 / 1e6)


class TestTable2:
    def test_state_count_from_weight_range(self, d):
        assert d.table2.min_states_from_bound == 600

    def test_resistance_endpoints(self, d):
        t2 = d.table2
        assert within(t2.r_min_mohm, 14.0)
        assert within(t2.r_max_mohm, 84.0)
        # conductance mid-scale equals the average device resistance
        g_mid = 0.5 * (1 / t2.r_min_mohm + 1 / t2.r_max_mohm)
        assert within(1 / g_mid, t2.r_device_mohm, 0.001)

    def test_per_level_resistance_step(self, d):
        assert within(d.table2.delta_r_full_kohm, 70.0)
        assert within(d.table2.delta_r_half_kohm, 7.0)

    def test_halved_step_doubles_states(self):
        p = HwParams()
        p.dw_min = 0.0005
        assert device_spec_table(p, 24.0).min_states_from_bound == 1200


class TestDerive:
    def test_pure_function_of_params(self):
        a, b = derive(HwParams()), derive(HwParams())
        assert dataclasses.asdict(a) == dataclasses.asdict(b)

    def test_runtime_under_a_second(self):
        t0 = time.perf_counter()
        derive(HwParams())
        assert time.perf_counter() - t0 < 1.0

    def test_dimensional_sanity_thermal(self):
        # 4 k_B T R in SI: V^2/Hz; density in nV/rtHz
        r_eff = 24e6 / (2 * 4096)
        si = math.sqrt(4 * 1.380649e-23 * 300 * r_eff) * 1e9
        assert thermal_noise_nv(24.0, 4096) == pytest.approx(si)

    def test_dimensional_sanity_power(self):
        # P = 2 N^2 V^2 a / R in watts
        si = 2 * 4096**2 * 1.0 * 0.2 / 24e6
        p, _ = array_power_area(HwParams(), 4096, 24.0)
        assert p == pytest.approx(si)

    def test_validation(self):
        p = HwParams(delay_fraction=1.5)
        with pytest.raises(ValueError):
            p.validate()
        p = HwParams(v_op=-1)
        with pytest.raises(ValueError):
            p.validate()

    def test_report_renders(self, d):
        text = hwcalc.render_report(d)
        assert "TeraOps/s" in text and "MOhm" in text
        rows = hwcalc.report_csv_rows(d)
        keys = [r[0] for r in rows]
        assert "throughput" in keys and "design_3.network_size" in keys

    def test_params_config_file(self, tmp_path):
        p = tmp_path / "hw.conf"
        p.write_text("beta = 10\nt_meas_ns = 160\n# comment\nadc_share = 32\n")
        loaded = hwcalc.load_params(p)
        assert loaded.beta == 10.0
        assert loaded.t_meas_ns == 160.0
        assert loaded.adc_share == 32
        bad = tmp_path / "bad.conf"
        bad.write_text("nope = 1\n")
        with pytest.raises(ValueError):
            hwcalc.load_params(bad)
