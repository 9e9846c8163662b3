"""Command line interface: mode diagrams, mode tables and interferometer outputs.

    gbfiber mode-diagram --config run.json --out modes.csv
    gbfiber solve        --config run.json --out modes.json
    gbfiber interfere    --config run.json --out mzi.json

All configuration values are SI (lengths in m, wavelength in nm, g in m/s^2)
and are converted once to the internal micrometre units.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Discriminator, Field, Tag, ValidationError, model_validator

from .errors import DomainError, IntegrityError, QuadratureError, SolverError
from .fiber_modes import (
    Family,
    FiberSpec,
    ModeSolution,
    build_mode,
    omega_from_v,
    omega_from_wavelength,
    solve_modes,
)
from .gravity import acceleration_to_geometric, gravitational_phase_shift
from .interferometry import (
    TimeBinSpec,
    single_photon_probability,
    time_bin_phase,
    time_bin_probabilities,
    two_photon_probability,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
UM_PER_M = 1e6
FAMILY_ORDER = {Family.PHYSICAL: 0, Family.GAUGE: 1, Family.GHOST: 2}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FiberConfig(_Strict):
    n_core: float = Field(1.4712, gt=0)
    n_clad: float = Field(1.4659, gt=0)
    core_radius_m: float = Field(4.1e-6, gt=0)

    @model_validator(mode="after")
    def _guiding(self):
        if self.n_core <= self.n_clad:
            raise ValueError("n_core must exceed n_clad")
        return self

    def spec(self) -> FiberSpec:
        return FiberSpec(self.n_core, self.n_clad, self.core_radius_m * UM_PER_M)


class VRangeConfig(_Strict):
    start: float = Field(0.5, gt=0.1, le=12)
    stop: float = Field(12.0, gt=0.1, le=12)
    points: int = Field(100, ge=2, le=10000)

    @model_validator(mode="after")
    def _ordered(self):
        if self.start >= self.stop:
            raise ValueError("V range start must be below stop")
        return self


class GravityConfig(_Strict):
    g: float = Field(9.81, description="gravitational acceleration in m/s^2")
    phi0: float = Field(0.0, gt=-1e-3, lt=1e-3)


class MziConfig(_Strict):
    layout: Literal["mzi"] = "mzi"
    arm_length_m: float = Field(1e5, gt=0)
    height_difference_m: float = 1.0
    n_eff: Optional[float] = Field(None, gt=0)


class TimeBinConfig(_Strict):
    layout: Literal["time_bin"] = "time_bin"
    delay_1_m: float = Field(1.0, gt=0)
    delay_2_m: float = Field(1.0, gt=0)
    height_difference_m: float = 1.0
    n_eff: Optional[float] = Field(None, gt=0)


def _layout(value) -> Optional[str]:
    """Interferometer layout tag; a block without one is an MZI."""
    if isinstance(value, dict):
        return value.get("layout", "mzi")
    return getattr(value, "layout", None)


class RunConfig(_Strict):
    fiber: FiberConfig = FiberConfig()
    wavelength_nm: float = Field(1550.0, gt=0)
    v_range: VRangeConfig = VRangeConfig()
    m_max: int = Field(5, ge=0, le=25)
    families: list[Family] = []
    gravity: GravityConfig = GravityConfig()
    interferometer: Annotated[
        Union[Annotated[MziConfig, Tag("mzi")], Annotated[TimeBinConfig, Tag("time_bin")]],
        Discriminator(_layout),
    ] = MziConfig()
    format: Optional[Literal["csv", "json"]] = None
    out: Optional[str] = None

    def selected_families(self) -> list:
        chosen = self.families or list(Family)
        return sorted(set(chosen), key=FAMILY_ORDER.get)


# ---------------------------------------------------------------------------
# output schemas

Complex = tuple[float, float]


class ModeDiagramRow(_Strict):
    family: Family
    m: int
    kappa: int
    V: float
    b: float


class ModeRecord(_Strict):
    family: Family
    m: int
    kappa: int
    omega: float
    beta: float
    b: float
    V: float
    U: float
    W: float
    q: list[list[Complex]]
    p: list[list[Complex]]
    norm_factor: float
    norm_integral: float
    chi_residual: float
    chi_over_a_t: Optional[Complex] = None


class MziResult(_Strict):
    layout: Literal["mzi"]
    wavelength_nm: float
    n_eff: float
    g: float
    arm_length_m: float
    height_difference_m: float
    phi_1: float
    phi_2: float
    delta_psi: float
    p1: float
    p2: float


class TimeBinResult(_Strict):
    layout: Literal["time_bin"]
    wavelength_nm: float
    n_eff: float
    g: float
    phi_1: float
    phi_2: float
    delta_phi: float
    phase_difference: float
    p_a: float
    p_b: float


# ---------------------------------------------------------------------------
# formatting


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite value in output")
    return format(x + 0.0, ".17g")  # + 0.0 turns -0.0 into 0.0


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON with floats at 17 significant digits, complex as [re, im]."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, Family):
        return json.dumps(obj.value)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return "[" + fmt_float(obj.real) + ", " + fmt_float(obj.imag) + "]"
    return fmt_float(obj)


def write_csv(rows: list, columns: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_float(row[c]) if isinstance(row[c], float) else
                         (row[c].value if isinstance(row[c], Family) else row[c]) for c in columns])
    return buf.getvalue()


def _matrix(a: np.ndarray) -> list:
    return [[complex(v) for v in row] for row in a]


# ---------------------------------------------------------------------------
# commands


def mode_diagram_rows(cfg: RunConfig) -> list:
    spec = cfg.fiber.spec()
    grid = np.linspace(cfg.v_range.start, cfg.v_range.stop, cfg.v_range.points)
    families = cfg.selected_families()
    rows = []
    for V in grid:
        omega = omega_from_v(spec, float(V))
        for m in range(cfg.m_max + 1):
            cache = {}
            for family in families:
                solver_family = Family.PHYSICAL if family is Family.PHYSICAL else Family.GAUGE
                if solver_family not in cache:
                    cache[solver_family] = solve_modes(spec, omega, m, solver_family)
                for key, pt in cache[solver_family]:
                    rows.append({"family": family, "m": m, "kappa": key.kappa, "V": float(V), "b": pt.b})
    rows.sort(key=lambda r: (FAMILY_ORDER[r["family"]], r["m"], r["kappa"], r["V"]))
    return rows


def chi_diagnostics(mode: ModeSolution):
    """Gauge residual max|chi|/max|A|; for ghosts the deviation from chi = (2i beta^2/omega) A_t."""
    rho = mode.spec.core_radius
    r = np.linspace(rho / 200, 5 * rho, 400)
    f = mode.field(r)
    if mode.family is Family.GHOST:
        expected = 2j * mode.beta**2 / mode.omega * f.a_t
        resid = float(np.max(np.abs(f.chi - expected)) / np.max(np.abs(expected)))
        i = int(np.argmax(np.abs(f.a_t)))
        return resid, complex(f.chi[i] / f.a_t[i])
    return float(np.max(np.abs(f.chi)) / np.max(np.abs(f.a))), None


def mode_records(cfg: RunConfig) -> list:
    spec = cfg.fiber.spec()
    omega = omega_from_wavelength(cfg.wavelength_nm * 1e-3)
    records = []
    for family in cfg.selected_families():
        for m in range(cfg.m_max + 1):
            for key, pt in solve_modes(spec, omega, m, family):
                mode = build_mode(spec, key, pt)
                resid, ratio = chi_diagnostics(mode)
                rec = {
                    "family": family, "m": m, "kappa": key.kappa, "omega": pt.omega, "beta": pt.beta,
                    "b": pt.b, "V": pt.V, "U": pt.U, "W": pt.W,
                    "q": _matrix(mode.q), "p": _matrix(mode.p),
                    "norm_factor": mode.norm_factor, "norm_integral": mode.norm_integral,
                    "chi_residual": resid,
                }
                if ratio is not None:
                    rec["chi_over_a_t"] = ratio
                records.append(rec)
    return records


def fundamental_index(spec: FiberSpec, omega: float) -> float:
    roots = solve_modes(spec, omega, 1, Family.PHYSICAL)
    if not roots:
        raise SolverError("no guided fundamental mode")
    return roots[0][1].effective_index


def interfere_result(cfg: RunConfig) -> dict:
    spec = cfg.fiber.spec()
    omega = omega_from_wavelength(cfg.wavelength_nm * 1e-3)
    ic = cfg.interferometer
    n_eff = ic.n_eff if ic.n_eff is not None else fundamental_index(spec, omega)
    g_acc = acceleration_to_geometric(cfg.gravity.g)
    dz = ic.height_difference_m * UM_PER_M
    # first arm (or delay line) dz above the second one, which sits at phi0
    phi_2 = cfg.gravity.phi0
    phi_1 = phi_2 + g_acc * dz
    if isinstance(ic, MziConfig):
        dpsi = gravitational_phase_shift(n_eff, omega, g_acc, ic.arm_length_m * UM_PER_M, dz)
        return {
            "layout": "mzi", "wavelength_nm": cfg.wavelength_nm, "n_eff": n_eff, "g": cfg.gravity.g,
            "arm_length_m": ic.arm_length_m, "height_difference_m": ic.height_difference_m,
            "phi_1": phi_1, "phi_2": phi_2, "delta_psi": dpsi,
            "p1": single_photon_probability(dpsi), "p2": two_photon_probability(dpsi),
        }
    dphi = phi_1 - phi_2
    tb = TimeBinSpec(n_eff * omega, ic.delay_1_m * UM_PER_M, ic.delay_2_m * UM_PER_M, dphi)
    pa, pb = time_bin_probabilities(tb)
    return {
        "layout": "time_bin", "wavelength_nm": cfg.wavelength_nm, "n_eff": n_eff, "g": cfg.gravity.g,
        "phi_1": phi_1, "phi_2": phi_2, "delta_phi": dphi,
        "phase_difference": time_bin_phase(tb), "p_a": pa, "p_b": pb,
    }


def render(command: str, cfg: RunConfig, fmt: str) -> str:
    if command == "mode-diagram":
        rows = mode_diagram_rows(cfg)
        if fmt == "csv":
            return write_csv(rows, ["family", "m", "kappa", "V", "b"])
        return dumps(rows) + "\n"
    if command == "solve":
        recs = mode_records(cfg)
        if fmt == "csv":
            cols = ["family", "m", "kappa", "omega", "beta", "b", "V", "norm_factor", "norm_integral", "chi_residual"]
            return write_csv(recs, cols)
        return dumps(recs) + "\n"
    res = interfere_result(cfg)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["key", "value"])
        for k, v in res.items():
            writer.writerow([k, fmt_float(v) if isinstance(v, float) else v])
        return buf.getvalue()
    return dumps(res) + "\n"


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return RunConfig()
    data = json.loads(Path(path).read_text())
    return RunConfig.model_validate(data)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gbfiber", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    defaults = {"mode-diagram": "csv", "solve": "json", "interfere": "json"}
    for name, help_ in (
        ("mode-diagram", "b-V mode diagram on a uniform V grid"),
        ("solve", "solved and normalized modes at the configured wavelength"),
        ("interfere", "gravitational phase and output probabilities"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"], help=f"output format (default {defaults[name]})")
        p.set_defaults(default_format=defaults[name])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fmt = args.format or cfg.format or args.default_format
    out = args.out or cfg.out
    try:
        text = render(args.command, cfg, fmt)
    except (SolverError, QuadratureError, IntegrityError, DomainError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if out:
        try:
            Path(out).write_text(text, newline="")
        except OSError as exc:
            print(f"config error: cannot write output: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
