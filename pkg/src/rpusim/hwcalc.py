"""Circuit and system design arithmetic for the crossbar accelerator.

Pure functions from technology constants to derived design quantities: line
length from the RC budget, array size, device resistance from the voltage
drop budget, power/area, integrator sizing, the noise budget, and tile/system
throughput tables.  Everything is recomputable from HwParams alone.

The RC delay model is the lumped half-RC form tau = 0.5 * R_total * C_total;
a modeling choice, not physics ground truth.  The acceptable-noise curves use
a calibrated model e_n(beta, t) = A * (beta-1)/(beta+1) * sqrt(t), anchored
at the design point (beta = 6, t_meas = 80 ns -> 15.1 nV/rtHz); the exact
integrator transfer function behind the published curves is not recoverable,
so the report header states the formula used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

K_BOLTZMANN = 1.380649e-23


class OverBudgetError(ValueError):
    pass


@dataclass
class HwParams:
    """Technology constants; units in the field names."""

    r_line_ohm_um: float = 0.36
    c_line_ff_um: float = 0.2
    pitch_nm: float = 400.0          # 200 nm line + 200 nm spacing
    f_clock_hz: float = 1.0e9
    delay_fraction: float = 0.1      # RC delay budget per pulse width
    drop_fraction: float = 0.1       # line IR-drop budget
    v_op: float = 1.0
    activity: float = 0.2
    bl: int = 10
    alpha_bound: float = 12.0        # peripheral input bound, in devices
    beta: float = 6.0                # conductance on/off ratio
    t_meas_ns: float = 80.0
    v_adc_max: float = 1.0
    adc_bits: int = 9
    adc_area_mm2: float = 0.0256
    adc_power_mw: float = 0.24
    adc_share: int = 64              # columns multiplexed per ADC
    temperature_k: float = 300.0
    in_bits: int = 5
    out_bits: int = 9
    opamp_str_power_w: float = 0.7   # reserve for op-amps and translators
    noise_anchor_nv: float = 15.1    # acceptable input noise at (beta, t_meas)
    cpu_ref_tops: float = 0.676      # 12-core reference chip
    weight_bound: float = 0.3        # minimum usable weight range
    dw_min: float = 0.001
    storage_levels: int = 1000

    def validate(self) -> None:
        for name, v in self.__dict__.items():
            if isinstance(v, (int, float)) and not v > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("delay_fraction", "drop_fraction", "activity"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must be a fraction in (0, 1)")


def line_length_mm(p: HwParams) -> float:
    """Longest line allowed by the RC budget: 0.5*(r*l)*(c*l) = budget."""
    budget_s = p.delay_fraction / p.f_clock_hz
    rc_per_um2 = 0.5 * p.r_line_ohm_um * p.c_line_ff_um * 1e-15
    return math.sqrt(budget_s / rc_per_um2) / 1000.0


def array_size(l_line_mm: float, pitch_nm: float,
               power_of_two: bool = True) -> int:
    """Devices along one side; snapped down to a power of two by default."""
    raw = int(l_line_mm * 1e6 // pitch_nm)
    if not power_of_two:
        return raw
    return 1 << (raw.bit_length() - 1)


def quantized_length_mm(n: int, pitch_nm: float) -> float:
    return n * pitch_nm * 1e-6


def device_resistance_mohm(n: int, r_line_total_ohm: float,
                           drop_fraction: float) -> float:
    """From the drop budget drop = N * R_line / R_device."""
    return n * r_line_total_ohm / drop_fraction / 1e6


def array_power_area(p: HwParams, n: int, r_device_mohm: float):
    """(W, mm^2) for the stacked pair of arrays sharing one footprint."""
    r = r_device_mohm * 1e6
    power_w = 2.0 * n * n * p.v_op ** 2 * p.activity / r
    side = quantized_length_mm(n, p.pitch_nm)
    return power_w, side * side


def opamp_vout(p: HwParams, n_active: float, c_int_ff: float,
               r_device_mohm: float) -> float:
    """Integrator output after t_meas with n_active devices on."""
    t = p.t_meas_ns * 1e-9
    rc = r_device_mohm * 1e6 * c_int_ff * 1e-15
    return 2.0 * n_active * p.v_op * t / rc * (p.beta - 1) / (p.beta + 1)


def c_int_ff(p: HwParams, n_active: float, r_device_mohm: float) -> float:
    """Integrating capacitor sized so v_out reaches v_adc_max at n_active."""
    t = p.t_meas_ns * 1e-9
    r = r_device_mohm * 1e6
    return (2.0 * n_active * p.v_op * t / (r * p.v_adc_max)
            * (p.beta - 1) / (p.beta + 1)) * 1e15


def thermal_noise_nv(r_device_mohm: float, n: int, pair: bool = True,
                     temperature_k: float = 300.0) -> float:
    """4kTR density of the array seen at the integrator input, in nV/rtHz."""
    r_eff = r_device_mohm * 1e6 / (n * (2 if pair else 1))
    return math.sqrt(4.0 * K_BOLTZMANN * temperature_k * r_eff) * 1e9


def noise_budget_nv(total_nv: float, components) -> float:
    """RSS remainder once the listed component densities are spent."""
    used = sum(c * c for c in components)
    rem2 = total_nv * total_nv - used
    if rem2 < 0:
        raise OverBudgetError(
            f"components exceed the {total_nv} nV/rtHz budget")
    return math.sqrt(rem2)


def shot_noise_nv(p: HwParams, n: int, r_device_mohm: float) -> float:
    """Diode-model shot noise of a pair of arrays at the given activity."""
    i_dev = p.v_op / (r_device_mohm * 1e6)
    active = 2 * n * p.activity
    return math.sqrt(2.0 * 1.602176634e-19 * i_dev * active) \
        * r_device_mohm * 1e6 / (2 * n) * 1e9


def acceptable_noise_nv(p: HwParams, beta: float, t_meas_ns: float) -> float:
    """Calibrated acceptable input-referred noise density model."""
    ref = (p.beta - 1) / (p.beta + 1) * math.sqrt(p.t_meas_ns)
    return p.noise_anchor_nv * ((beta - 1) / (beta + 1)
                                * math.sqrt(t_meas_ns)) / ref


@dataclass
class TileMetrics:
    update_rate_tups: float
    update_eff_tups_w: float
    update_eff_tups_mm2: float
    throughput_tops: float
    power_eff_tops_w: float
    area_eff_tops_mm2: float
    bandwidth_gb_s: float
    compute_rate_gops: float
    tile_power_w: float
    tile_area_mm2: float


def tile_metrics(p: HwParams, n: int, array_power_w: float,
                 array_area_mm2: float, adc_total_power_w: float) -> TileMetrics:
    """Throughput/efficiency set for one tile (a pair of arrays + periphery).

    An update cycle covers both polarities: 2*BL clock pulses.  Ops are
    counted as two per multiply-accumulate.
    """
    t_update_s = 2.0 * p.bl / p.f_clock_hz
    t_meas_s = p.t_meas_ns * 1e-9
    update_rate = n * n / t_update_s
    throughput = 2.0 * n * n / t_meas_s
    power = array_power_w + adc_total_power_w + p.opamp_str_power_w
    bandwidth = n * (p.in_bits + p.out_bits) / 8.0 / t_meas_s
    compute = n / t_meas_s
    return TileMetrics(
        update_rate_tups=update_rate / 1e12,
        update_eff_tups_w=update_rate / 1e12 / power,
        update_eff_tups_mm2=update_rate / 1e12 / array_area_mm2,
        throughput_tops=throughput / 1e12,
        power_eff_tops_w=throughput / 1e12 / power,
        area_eff_tops_mm2=throughput / 1e12 / array_area_mm2,
        bandwidth_gb_s=bandwidth / 1e9,
        compute_rate_gops=compute / 1e9,
        tile_power_w=power,
        tile_area_mm2=array_area_mm2)


@dataclass
class Table1Row:
    system: str
    throughput_tops: float
    power_w: float
    efficiency_gops_w: float
    network_size_m: float  # millions of weights; 0 for reference chips
    accel_vs_cpu: float


def design_point(tiles_active: int, tiles_total: int, power_w: float,
                 tile_throughput_tops: float, n: int,
                 cpu_ref_tops: float, name: str = "") -> Table1Row:
    """One accelerator design row: active tiles set throughput, total tiles
    set addressable network size; power is the chip budget for the row."""
    throughput = tiles_active * tile_throughput_tops
    return Table1Row(
        system=name or f"{tiles_active}/{tiles_total} tiles",
        throughput_tops=throughput,
        power_w=power_w,
        efficiency_gops_w=throughput * 1000.0 / power_w,
        network_size_m=tiles_total * n * n / 1e6,
        accel_vs_cpu=throughput / cpu_ref_tops)


@dataclass
class Table2:
    pulse_duration_ns: float
    operating_voltage_v: float
    device_area_um2: float
    r_device_mohm: float
    r_max_mohm: float
    r_min_mohm: float
    delta_r_full_kohm: float
    delta_r_half_kohm: float
    storage_levels: int
    min_states_from_bound: int
    asym_ratio: float = 1.05
    asym_tolerance: float = 0.02
    r_tolerance_mohm: float = 7.0
    delta_r_tolerance_kohm: float = 21.0


def device_spec_table(p: HwParams, r_device_mohm: float) -> Table2:
    """Device spec sheet: resistance endpoints chosen so the conductance
    mid-scale equals the average device resistance at the given on/off ratio,
    plus the state-count arithmetic from the weight range."""
    r_min = r_device_mohm * (1 + p.beta) / (2 * p.beta)
    r_max = p.beta * r_min
    delta_r = (r_max - r_min) / p.storage_levels * 1000.0  # kOhm per level
    states = int(round(2 * p.weight_bound / p.dw_min))
    return Table2(
        pulse_duration_ns=1e9 / p.f_clock_hz,
        operating_voltage_v=p.v_op,
        device_area_um2=(p.pitch_nm * 1e-3) ** 2 / 4.0,
        r_device_mohm=r_device_mohm,
        r_max_mohm=r_max,
        r_min_mohm=r_min,
        delta_r_full_kohm=delta_r,
        delta_r_half_kohm=0.1 * delta_r,
        storage_levels=p.storage_levels,
        min_states_from_bound=states)


@dataclass
class HwDerived:
    params: HwParams
    l_line_mm: float
    n_side: int
    l_array_mm: float
    r_line_total_ohm: float
    r_device_mohm: float
    p_array_w: float
    a_array_mm2: float
    c_int_ff: float
    v_out_check_v: float
    adc_count: int
    adc_total_power_w: float
    adc_total_area_mm2: float
    adc_shared_area_mm2: float
    adc_rate_msps: float
    noise_ceiling_mv: float
    thermal_noise_nv: float
    budget_remainder_nv: float
    shot_noise_nv: float
    tile: TileMetrics
    table1: list[Table1Row] = field(default_factory=list)
    table2: Table2 | None = None
    fig5d: dict = field(default_factory=dict)


CPU_ROW = Table1Row("CPU 12 cores", 0.676, 250, 2.7, 0.0, 1.0)
GPU_ROW = Table1Row("GPU reference", 4.3, 242, 17.8, 0.0, 6.4)


def derive(p: HwParams) -> HwDerived:
    """Every derived quantity, as a pure function of the parameters."""
    p.validate()
    l_line = line_length_mm(p)
    n = array_size(l_line, p.pitch_nm)
    l_q = quantized_length_mm(n, p.pitch_nm)
    r_line = p.r_line_ohm_um * l_q * 1000.0
    r_dev = device_resistance_mohm(n, r_line, p.drop_fraction)
    power_w, area_mm2 = array_power_area(p, n, r_dev)
    cint = c_int_ff(p, p.alpha_bound, r_dev)
    vout = opamp_vout(p, p.alpha_bound, cint, r_dev)

    adc_count = n // p.adc_share
    adc_total_power = n * p.adc_power_mw * 1e-3  # sharing keeps total power
    adc_total_area = n * p.adc_area_mm2
    adc_shared_area = adc_count * p.adc_area_mm2
    adc_rate = p.adc_share / (p.t_meas_ns * 1e-9) / 1e6

    tile = tile_metrics(p, n, power_w, area_mm2, adc_total_power)

    noise_ceiling_mv = 2 * p.v_adc_max / (1 << p.adc_bits) * 1000.0
    thermal = thermal_noise_nv(r_dev, n, pair=True,
                               temperature_k=p.temperature_k)
    remainder = noise_budget_nv(p.noise_anchor_nv, [thermal])
    shot = shot_noise_nv(p, n, r_dev)

    table1 = [
        CPU_ROW,
        GPU_ROW,
        design_point(12, 12, 250.0, tile.throughput_tops, n,
                     p.cpu_ref_tops, "Design 1"),
        design_point(50, 50, 250.0, tile.throughput_tops, n,
                     p.cpu_ref_tops, "Design 2"),
        design_point(1, 100, 22.0, tile.throughput_tops, n,
                     p.cpu_ref_tops, "Design 3"),
    ]
    table2 = device_spec_table(p, r_dev)

    betas = [1.5, 2, 3, 4, 6, 8, 10, 20, 50, 100, 1000]
    fig5d = {t: [acceptable_noise_nv(p, b, t) for b in betas]
             for t in (20.0, 80.0, 160.0)}
    fig5d["beta"] = betas

    return HwDerived(
        params=p, l_line_mm=l_line, n_side=n, l_array_mm=l_q,
        r_line_total_ohm=r_line, r_device_mohm=r_dev, p_array_w=power_w,
        a_array_mm2=area_mm2, c_int_ff=cint, v_out_check_v=vout,
        adc_count=adc_count, adc_total_power_w=adc_total_power,
        adc_total_area_mm2=adc_total_area,
        adc_shared_area_mm2=adc_shared_area, adc_rate_msps=adc_rate,
        noise_ceiling_mv=noise_ceiling_mv, thermal_noise_nv=thermal,
        budget_remainder_nv=remainder, shot_noise_nv=shot, tile=tile,
        table1=table1, table2=table2, fig5d=fig5d)


def render_report(d: HwDerived) -> str:
    p = d.params
    t2 = d.table2
    lines = [
        "crossbar accelerator design report",
        "==================================",
        "noise model: e_n(beta,t) = A*(beta-1)/(beta+1)*sqrt(t), anchored at "
        f"{p.noise_anchor_nv} nV/rtHz for beta={p.beta}, t={p.t_meas_ns} ns",
        "",
        f"line length (RC budget)     {d.l_line_mm:8.3f} mm",
        f"array side N                {d.n_side:8d} devices",
        f"array edge (N * pitch)      {d.l_array_mm:8.3f} mm",
        f"total line resistance       {d.r_line_total_ohm:8.1f} Ohm",
        f"device resistance           {d.r_device_mohm:8.2f} MOhm",
        f"array pair power            {d.p_array_w:8.3f} W",
        f"array pair area             {d.a_array_mm2:8.3f} mm^2",
        f"integrating cap C_int       {d.c_int_ff:8.2f} fF",
        f"integrator output check     {d.v_out_check_v:8.3f} V",
        f"ADCs after {p.adc_share}-way sharing   {d.adc_count:8d} "
        f"({d.adc_rate_msps:.0f} MS/s each)",
        f"ADC power / area            {d.adc_total_power_w:8.3f} W / "
        f"{d.adc_shared_area_mm2:.2f} mm^2",
        f"ADC noise ceiling           {d.noise_ceiling_mv:8.2f} mV rms",
        f"thermal noise (array pair)  {d.thermal_noise_nv:8.2f} nV/rtHz",
        f"budget left for other noise {d.budget_remainder_nv:8.2f} nV/rtHz",
        f"shot noise (diode model)    {d.shot_noise_nv:8.2f} nV/rtHz",
        "",
        f"tile power                  {d.tile.tile_power_w:8.3f} W",
        f"update rate                 {d.tile.update_rate_tups:8.1f} TeraUpdates/s"
        f"  ({d.tile.update_eff_tups_w:.0f}/W, {d.tile.update_eff_tups_mm2:.0f}/mm^2)",
        f"read throughput             {d.tile.throughput_tops:8.1f} TeraOps/s"
        f"  ({d.tile.power_eff_tops_w:.0f}/W, {d.tile.area_eff_tops_mm2:.0f}/mm^2)",
        f"tile bandwidth              {d.tile.bandwidth_gb_s:8.1f} GB/s",
        f"compute to sustain O(1)     {d.tile.compute_rate_gops:8.1f} GigaOps/s",
        "",
        "system designs "
        "(throughput TeraOps/s, efficiency GigaOps/s/W, size Mweights)",
    ]
    for r in d.table1:
        lines.append(
            f"  {r.system:<16} {r.throughput_tops:10.1f} {r.power_w:7.0f} W "
            f"{r.efficiency_gops_w:10.0f} {r.network_size_m:9.1f} "
            f"{r.accel_vs_cpu:8.0f}x")
    lines += [
        "",
        "device spec sheet",
        f"  pulse duration            {t2.pulse_duration_ns:6.1f} ns",
        f"  operating voltage         +-{t2.operating_voltage_v:.1f} V",
        f"  max device area           {t2.device_area_um2:6.2f} um^2",
        f"  avg resistance            {t2.r_device_mohm:6.1f} MOhm "
        f"(tolerance {t2.r_tolerance_mohm:.0f} MOhm, reported as-is)",
        f"  resistance range          {t2.r_min_mohm:.1f} - {t2.r_max_mohm:.1f} MOhm",
        f"  change per full pulse     {t2.delta_r_full_kohm:6.1f} kOhm "
        f"(tolerance {t2.delta_r_tolerance_kohm:.0f} kOhm, reported as-is)",
        f"  change per half pulse     {t2.delta_r_half_kohm:6.1f} kOhm",
        f"  storage levels            {t2.storage_levels:6d}",
        f"  min states from |w|<={p.weight_bound}  {t2.min_states_from_bound:6d}",
        f"  up/down asymmetry         {t2.asym_ratio:.2f} "
        f"(tolerance {t2.asym_tolerance:.0%})",
    ]
    return "\n".join(lines) + "\n"


def report_csv_rows(d: HwDerived):
    """Flat (key, value, unit) rows for machine consumption."""
    rows = [
        ("l_line", d.l_line_mm, "mm"),
        ("n_side", d.n_side, "devices"),
        ("l_array", d.l_array_mm, "mm"),
        ("r_line_total", d.r_line_total_ohm, "Ohm"),
        ("r_device", d.r_device_mohm, "MOhm"),
        ("p_array", d.p_array_w, "W"),
        ("a_array", d.a_array_mm2, "mm2"),
        ("c_int", d.c_int_ff, "fF"),
        ("v_out_check", d.v_out_check_v, "V"),
        ("adc_count", d.adc_count, ""),
        ("adc_total_power", d.adc_total_power_w, "W"),
        ("adc_shared_area", d.adc_shared_area_mm2, "mm2"),
        ("adc_rate", d.adc_rate_msps, "MSps"),
        ("noise_ceiling", d.noise_ceiling_mv, "mV"),
        ("thermal_noise", d.thermal_noise_nv, "nV/rtHz"),
        ("budget_remainder", d.budget_remainder_nv, "nV/rtHz"),
        ("shot_noise", d.shot_noise_nv, "nV/rtHz"),
        ("tile_power", d.tile.tile_power_w, "W"),
        ("update_rate", d.tile.update_rate_tups, "TeraUpdates/s"),
        ("throughput", d.tile.throughput_tops, "TeraOps/s"),
        ("power_efficiency", d.tile.power_eff_tops_w, "TeraOps/s/W"),
        ("area_efficiency", d.tile.area_eff_tops_mm2, "TeraOps/s/mm2"),
        ("bandwidth", d.tile.bandwidth_gb_s, "GB/s"),
        ("compute_rate", d.tile.compute_rate_gops, "GigaOps/s"),
    ]
    for r in d.table1:
        tag = r.system.lower().replace(" ", "_")
        rows += [(f"{tag}.throughput", r.throughput_tops, "TeraOps/s"),
                 (f"{tag}.power", r.power_w, "W"),
                 (f"{tag}.efficiency", r.efficiency_gops_w, "GOps/s/W"),
                 (f"{tag}.network_size", r.network_size_m, "Mweights"),
                 (f"{tag}.acceleration", r.accel_vs_cpu, "x")]
    t2 = d.table2
    rows += [("table2.r_min", t2.r_min_mohm, "MOhm"),
             ("table2.r_max", t2.r_max_mohm, "MOhm"),
             ("table2.delta_r_full", t2.delta_r_full_kohm, "kOhm"),
             ("table2.delta_r_half", t2.delta_r_half_kohm, "kOhm"),
             ("table2.storage_levels", t2.storage_levels, "levels"),
             ("table2.min_states", t2.min_states_from_bound, "states")]
    for t in (20.0, 80.0, 160.0):
        for b, v in zip(d.fig5d["beta"], d.fig5d[t]):
            rows.append((f"noise_curve.t{t:.0f}ns.beta{b}", v, "nV/rtHz"))
    return rows


# -- config file ------------------------------------------------------------

def load_params(path) -> HwParams:
    """Same flat key-value format as experiment configs."""
    p = HwParams()
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if not hasattr(p, key):
                raise ValueError(f"{path}:{lineno}: unknown parameter {key!r}")
            cur = getattr(p, key)
            setattr(p, key, type(cur)(float(val)) if isinstance(cur, int)
                    else float(val))
    return p
