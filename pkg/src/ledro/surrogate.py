"""Analytical Op-Amp models used as a cheap, deterministic circuit simulator.

Devices follow an EKV-style interpolation between weak and strong inversion:
the inversion coefficient ``IC = I_D / I_spec`` fixes g_m, the overdrive and
the saturation voltage.  Node voltages come from the usual balanced-bias
assumptions, and the small-signal response is evaluated from closed-form
pole/zero expressions.  Two topologies are available:

``five_t``
    NMOS-input differential pair with PMOS current-mirror load (5T OTA).
``two_stage``
    The same first stage followed by a PMOS common-source stage with Miller
    compensation capacitor ``cc``.

Testbench: open-loop AC response, output biased at mid-supply, load
capacitance ``cload``, input common-mode voltage ``vcm``.  PMOS quantities
in the telemetry are magnitudes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from .fom import SpecSet
from .records import TransistorTelemetry

UT = 0.02585  # thermal voltage at 300 K
SLOPE = 1.3
W_FIN = 71e-9  # effective width per fin, 2*Hfin + Tfin
COX = 0.02  # F/m^2
C_OV = 0.3e-9  # F/m
C_J = 0.5e-9  # F/m
I_LEAK = 1e-12
G_LEAK = 1e-10
GAIN_FLOOR = 1e-6
L_REF_NM = 14.0
CUTOFF_IC = 1e-4


@dataclass(frozen=True)
class Polarity:
    mu_cox: float
    vth: float
    lambda_ref: float  # channel-length modulation at L_REF_NM


NMOS = Polarity(mu_cox=400e-6, vth=0.25, lambda_ref=0.5)
PMOS = Polarity(mu_cox=250e-6, vth=0.27, lambda_ref=0.6)


@dataclass(frozen=True)
class OperatingPoint:
    i_d: float
    ic: float
    v_gs: float
    v_ds: float
    v_dsat: float
    g_m: float
    g_ds: float
    c_gs: float
    c_db: float
    region: str


def specific_current(pol: Polarity, nfin: float, l_nm: float) -> float:
    return 2.0 * SLOPE * pol.mu_cox * UT**2 * (nfin * W_FIN) / (l_nm * 1e-9)


def gate_source_voltage(pol: Polarity, i_d: float, nfin: float, l_nm: float) -> float:
    ic = i_d / specific_current(pol, nfin, l_nm)
    return pol.vth + 2.0 * SLOPE * UT * math.log(math.expm1(math.sqrt(ic)))


def saturation_voltage(ic: float) -> float:
    return 2.0 * UT * math.sqrt(ic + 0.25) + 3.0 * UT


def device(pol: Polarity, i_d: float, nfin: float, l_nm: float, v_ds: float | None = None) -> OperatingPoint:
    """Operating point of one device carrying ``i_d``; ``v_ds=None`` means diode-connected."""
    i_d = max(i_d, 0.0) + I_LEAK
    i_spec = specific_current(pol, nfin, l_nm)
    ic = i_d / i_spec
    v_gs = pol.vth + 2.0 * SLOPE * UT * math.log(math.expm1(math.sqrt(ic)))
    diode = v_ds is None
    if diode:
        v_ds = v_gs
    v_dsat = saturation_voltage(ic)
    gm = i_d / (SLOPE * UT) * 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * ic))
    gds = pol.lambda_ref * L_REF_NM / l_nm * i_d + G_LEAK
    r = 1.0 if diode else v_ds / v_dsat
    if r < 1.0:
        r = max(r, 0.0)
        gds += 2.0 * i_d * (1.0 - r) / v_dsat
        gm *= r
    w = nfin * W_FIN
    c_gs = 2.0 / 3.0 * COX * w * l_nm * 1e-9 + C_OV * w
    if ic < CUTOFF_IC:
        region = "cutoff"
    elif r < 1.0:
        region = "linear"
    elif v_gs < pol.vth:
        region = "subthreshold"
    else:
        region = "saturation"
    return OperatingPoint(i_d, ic, v_gs, v_ds, v_dsat, gm, gds, c_gs, C_J * w, region)


def triode_factor(v_ds: float, v_dsat: float) -> float:
    r = min(max(v_ds / v_dsat, 0.0), 1.0)
    return r * (2.0 - r)


def tail_current(i_nominal, vcm, p_in, p_tail):
    """Tail current after the tail device's own triode degradation.

    The tail node sits at ``vcm - v_gs(input)``, which itself depends on the
    current, so the fixed point is found by bracketing on ``[0, i_nominal]``.
    """
    nfin_in, l_in = p_in
    nfin_t, l_t = p_tail
    if i_nominal <= 0:
        return 0.0

    def residual(i):
        v_tail = vcm - gate_source_voltage(NMOS, i / 2 + I_LEAK, nfin_in, l_in)
        ic = (i + I_LEAK) / specific_current(NMOS, nfin_t, l_t)
        return i - i_nominal * triode_factor(v_tail, saturation_voltage(ic))

    if residual(i_nominal) <= 0:
        return i_nominal
    return brentq(residual, 0.0, i_nominal, xtol=1e-18, rtol=1e-12, maxiter=200)


_FREQ_GRID = np.logspace(-2, 16, 721)  # rad/s


@dataclass(frozen=True)
class SmallSignal:
    a0: float
    b1: float  # s coefficient of the main two-pole denominator
    b2: float  # s^2 coefficient
    wz_rhp: float  # right-half-plane zero (inf when absent)
    wp_mirror: float
    wz_mirror: float

    def response(self, w):
        w = np.asarray(w, dtype=float)
        s = 1j * w
        num = self.a0 * (1 + s / self.wz_mirror)
        if math.isfinite(self.wz_rhp):
            num = num * (1 - s / self.wz_rhp)
        den = (1 + self.b1 * s + self.b2 * s**2) * (1 + s / self.wp_mirror)
        return num / den

    def phase_lag_deg(self, w: float) -> float:
        lag = math.atan2(self.b1 * w, 1.0 - self.b2 * w * w)
        lag += math.atan(w / self.wp_mirror) - math.atan(w / self.wz_mirror)
        if math.isfinite(self.wz_rhp):
            lag += math.atan(w / self.wz_rhp)
        return math.degrees(lag)

    def unity_gain(self) -> tuple[float, float]:
        """(UGBW in Hz, phase margin in degrees); (0, 0) when the gain never exceeds 1."""
        if self.a0 <= 1.0:
            return 0.0, 0.0
        mag = np.abs(self.response(_FREQ_GRID))
        below = np.nonzero(mag < 1.0)[0]
        if below.size == 0:
            w_u = float(_FREQ_GRID[-1])
        elif below[0] == 0:
            return 0.0, 0.0
        else:
            k = int(below[0])
            lo, hi = math.log(_FREQ_GRID[k - 1]), math.log(_FREQ_GRID[k])

            def log_mag(x):
                return math.log(abs(complex(self.response(math.exp(x)))))

            w_u = math.exp(brentq(log_mag, lo, hi, xtol=1e-12))
        return w_u / (2.0 * math.pi), 180.0 - self.phase_lag_deg(w_u)


def _telemetry(name: str, op: OperatingPoint) -> TransistorTelemetry:
    return TransistorTelemetry(name, op.region, op.v_gs, op.v_ds, op.g_m, op.i_d)


def _first_stage(p: Mapping, vdd: float, nfin_ref: float):
    ibias = float(p["ibias"])
    i_ref = ibias
    i_tail_nom = ibias * p["nfin_tail"] / nfin_ref
    i_tail = tail_current(
        i_tail_nom, p["vcm"], (p["nfin_in"], p["l_in"]), (p["nfin_tail"], p["l_tail"])
    )
    ref = device(NMOS, i_ref, nfin_ref, p["l_tail"])
    i_half = i_tail / 2
    v_gs_in = gate_source_voltage(NMOS, i_half + I_LEAK, p["nfin_in"], p["l_in"])
    v_tail = p["vcm"] - v_gs_in
    tail = device(NMOS, i_tail, p["nfin_tail"], p["l_tail"], v_tail)
    m3 = device(PMOS, i_half, p["nfin_load"], p["l_load"])
    x_node = vdd - m3.v_gs
    m1 = device(NMOS, i_half, p["nfin_in"], p["l_in"], x_node - v_tail)
    return ref, tail, m1, m3, v_tail, i_half


def simulate_five_t(p: Mapping, constants: Mapping):
    vdd, cload, nfin_ref = constants["vdd"], constants["cload"], constants["nfin_ref"]
    ref, tail, m1, m3, v_tail, i_half = _first_stage(p, vdd, nfin_ref)
    y_node = vdd - m3.v_gs
    m2 = device(NMOS, i_half, p["nfin_in"], p["l_in"], y_node - v_tail)
    m4 = device(PMOS, i_half, p["nfin_load"], p["l_load"], m3.v_gs)

    r_out = 1.0 / (m2.g_ds + m4.g_ds)
    c_out = cload + m2.c_db + m4.c_db
    c_mirror = 2 * m3.c_gs + m3.c_db + m1.c_db
    wp_m = max(m3.g_m, 1e-30) / c_mirror
    ss = SmallSignal(
        a0=m1.g_m * r_out,
        b1=r_out * c_out,
        b2=0.0,
        wz_rhp=math.inf,
        wp_mirror=wp_m,
        wz_mirror=2 * wp_m,
    )
    devices = {"M1": m1, "M2": m2, "M3": m3, "M4": m4, "M5": tail, "M6": ref}
    supply = ref.i_d + m3.i_d + m4.i_d
    return _finish(ss, supply, devices)


def simulate_two_stage(p: Mapping, constants: Mapping):
    vdd, cload, nfin_ref = constants["vdd"], constants["cload"], constants["nfin_ref"]
    ref, tail, m1, m3, v_tail, i_half = _first_stage(p, vdd, nfin_ref)
    i_out = float(p["ibias"]) * p["nfin_sink"] / nfin_ref
    v_out = vdd / 2
    m6 = device(PMOS, i_out, p["nfin_cs"], p["l_cs"], vdd - v_out)
    m7 = device(NMOS, i_out, p["nfin_sink"], p["l_sink"], v_out)
    y_node = vdd - m6.v_gs
    m2 = device(NMOS, i_half, p["nfin_in"], p["l_in"], y_node - v_tail)
    m4 = device(PMOS, i_half, p["nfin_load"], p["l_load"], m6.v_gs)

    r1 = 1.0 / (m2.g_ds + m4.g_ds)
    r2 = 1.0 / (m6.g_ds + m7.g_ds)
    c1 = m6.c_gs + m2.c_db + m4.c_db
    c2 = cload + m6.c_db + m7.c_db
    cc = float(p["cc"])
    gm6 = m6.g_m
    b1 = r1 * c1 + r2 * c2 + (r1 + r2 + gm6 * r1 * r2) * cc
    b2 = r1 * r2 * (c1 * c2 + cc * (c1 + c2))
    c_mirror = 2 * m3.c_gs + m3.c_db + m1.c_db
    wp_m = max(m3.g_m, 1e-30) / c_mirror
    ss = SmallSignal(
        a0=m1.g_m * r1 * gm6 * r2,
        b1=b1,
        b2=b2,
        wz_rhp=gm6 / cc if gm6 > 0 else math.inf,
        wp_mirror=wp_m,
        wz_mirror=2 * wp_m,
    )
    devices = {"M1": m1, "M2": m2, "M3": m3, "M4": m4, "M5": tail, "M6": m6, "M7": m7, "M8": ref}
    supply = ref.i_d + m3.i_d + m4.i_d + m6.i_d
    return _finish(ss, supply, devices)


def _finish(ss: SmallSignal, supply: float, devices: dict):
    ugbw, pm = ss.unity_gain()
    gain_db = 20.0 * math.log10(max(abs(ss.a0), GAIN_FLOOR))
    specs = SpecSet(gain=gain_db, ugbw=ugbw, phase_margin=pm, supply_current=supply)
    telemetry = tuple(_telemetry(name, op) for name, op in devices.items())
    return specs, telemetry


MODELS = {"five_t": simulate_five_t, "two_stage": simulate_two_stage}


def simulate(model: str, params: Mapping, constants: Mapping):
    """Return ``(SpecSet, telemetry)`` for a surrogate topology."""
    try:
        fn = MODELS[model]
    except KeyError:
        raise ValueError(f"unknown surrogate model {model!r}; choose from {sorted(MODELS)}") from None
    return fn(params, constants)
