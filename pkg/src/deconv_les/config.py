"""key = value run configuration.

Keys before the first section header belong to the run itself
(``scenario``, ``name``).  Sections: grid, wind, fluid, time, models,
deconv, solver, output.  Unset keys keep the built-in scenario default.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import replace
from pathlib import Path

from .deconvolution import ModelKind
from .scenarios import BUILTIN, Bump, Scenario
from .solvers import SolverParams
from .timestepper import FluidParams, TimeParams
from .wind import WindStress

_RUN = "run"

KEYS = {
    _RUN: {"scenario", "name"},
    "grid": {"nx", "nz", "lx", "h", "bump_height", "bump_halfwidth", "bump_center",
             "inflow_amplitude", "inflow_side"},
    "wind": {"amplitude", "center", "halfwidth"},
    "fluid": {"nu"},
    "time": {"dt", "t_final"},
    "models": {"run"},
    "deconv": {"alpha", "tau", "dtau"},
    "solver": {"rel_tol", "max_iter", "stokes_tol", "stokes_max_iter"},
    "output": {"every", "stations", "n_profile", "vtk_every"},
}


class ConfigError(ValueError):
    pass


def _line_index(text: str) -> dict[tuple[str, str], int]:
    """Map (section, key) to its 1-based line number in the original text."""
    where: dict[tuple[str, str], int] = {}
    section = _RUN
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            where[(section, "")] = n
            continue
        m = re.match(r"([^=:\s]+)\s*[=:]", s)
        if m:
            where.setdefault((section, m.group(1).lower()), n)
    return where


def parse_model_list(value: str, tau_default: float, dtau: float) -> tuple[ModelKind, ...]:
    models = []
    for token in filter(None, (t.strip() for t in value.split(","))):
        name, _, arg = token.partition(":")
        name = name.strip().lower()
        if name == "dns":
            models.append(ModelKind.DNS())
        elif name in ("leray", "leray-alpha", "leray_alpha"):
            models.append(ModelKind.LerayAlpha())
        elif name == "deconv":
            tau = float(arg) if arg else tau_default
            if tau < 0:
                raise ValueError("tau must be ≥ 0")
            models.append(ModelKind.Deconv(tau, dtau))
        else:
            raise ValueError(f"unknown model {token!r}")
    return tuple(models)


def parse_config_text(text: str, source: str = "<config>") -> Scenario:
    lines = _line_index(text)
    parser = configparser.ConfigParser(
        interpolation=None, default_section="__defaults__", inline_comment_prefixes=("#",)
    )
    try:
        parser.read_string(f"[{_RUN}]\n" + text, source=source)
    except configparser.ParsingError as err:
        lineno, line = err.errors[0]
        raise ConfigError(f"{source}:{lineno - 1}: cannot parse line {line.strip()!r}") from None
    except configparser.DuplicateOptionError as err:
        raise ConfigError(
            f"{source}:{err.lineno - 1}: [{err.section}] {err.option}: duplicate key"
        ) from None
    except configparser.DuplicateSectionError as err:
        raise ConfigError(f"{source}:{err.lineno - 1}: duplicate section [{err.section}]") from None
    except configparser.Error as err:
        lineno = getattr(err, "lineno", None)
        where = f"{source}:{lineno - 1}" if lineno else source
        raise ConfigError(f"{where}: {err.message.splitlines()[0]}") from None

    def fail(section: str, key: str, msg: str):
        n = lines.get((section, key)) or lines.get((section, ""))
        where = f"{source}:{n}" if n else source
        raise ConfigError(f"{where}: [{section}] {key}: {msg}" if key else f"{where}: {msg}")

    for section in parser.sections():
        if section not in KEYS:
            fail(section, "", f"unknown section [{section}]")
        for key in parser[section]:
            if key not in KEYS[section]:
                fail(section, key, "unknown key")

    def get(section, key, conv, default):
        if not parser.has_option(section, key):
            return default
        raw = parser.get(section, key).strip()
        try:
            return conv(raw)
        except ValueError as err:
            fail(section, key, str(err) if str(err) else f"bad value {raw!r}")

    name = get(_RUN, "scenario", str, "cavity").lower()
    if name not in BUILTIN:
        fail(_RUN, "scenario", f"unknown scenario {name!r} (expected one of {sorted(BUILTIN)})")
    base = BUILTIN[name]()

    def positive(conv):
        def f(raw):
            v = conv(raw)
            if not v > 0:
                raise ValueError("must be > 0")
            return v
        return f

    def nonneg(label):
        def f(raw):
            v = float(raw)
            if not v >= 0:
                raise ValueError(f"{label} must be ≥ 0")
            return v
        return f

    def at_least(n):
        def f(raw):
            v = int(raw)
            if v < n:
                raise ValueError(f"must be ≥ {n}")
            return v
        return f

    def float_list(raw):
        return tuple(float(x) for x in raw.replace(",", " ").split())

    lx = get("grid", "lx", positive(float), base.Lx)
    h = get("grid", "h", positive(float), base.h)
    bump = base.bump
    bh = get("grid", "bump_height", nonneg("bump_height"), bump.height if bump else 0.0)
    bw = get("grid", "bump_halfwidth", positive(float), bump.halfwidth if bump else 0.15 * lx)
    bc_ = get("grid", "bump_center", float, bump.center if bump else 0.5 * lx)
    bump = Bump(bh, bw, bc_) if bh > 0 else None

    wind = WindStress(
        amplitude=get("wind", "amplitude", float, base.wind.amplitude),
        center=get("wind", "center", float, base.wind.center),
        halfwidth=get("wind", "halfwidth", positive(float), base.wind.halfwidth),
        Lx=lx,
    )
    dt = get("time", "dt", positive(float), base.time.dt)
    t_final = get("time", "t_final", nonneg("t_final"), base.time.T)
    alpha = get("deconv", "alpha", positive(float), base.alpha)
    dtau = get("deconv", "dtau", positive(float), base.dtau)
    tau_default = get("deconv", "tau", nonneg("tau"), 5.0)
    if parser.has_option("models", "run"):
        models = get("models", "run", lambda raw: parse_model_list(raw, tau_default, dtau), ())
    elif parser.has_option("deconv", "tau"):
        models = tuple(
            ModelKind.Deconv(tau_default, dtau) if m.name == "deconv" else m
            for m in base.models
        )
        models = tuple(dict.fromkeys(models))
    else:
        models = tuple(
            ModelKind.Deconv(m.tau, dtau) if m.name == "deconv" else m for m in base.models
        )
    side = get("grid", "inflow_side", str, base.inflow_side).lower()
    if side not in ("left", "right"):
        fail("grid", "inflow_side", "must be 'left' or 'right'")

    try:
        return replace(
            base,
            name=get(_RUN, "name", str, base.name),
            nx=get("grid", "nx", at_least(4), base.nx),
            nz=get("grid", "nz", at_least(4), base.nz),
            Lx=lx,
            h=h,
            bump=bump,
            wind=wind,
            inflow_amplitude=get("grid", "inflow_amplitude", float, base.inflow_amplitude),
            inflow_side=side,
            fluid=FluidParams(get("fluid", "nu", positive(float), base.fluid.nu)),
            time=TimeParams(dt, t_final),
            models=models,
            alpha=alpha,
            dtau=dtau,
            solver=SolverParams(
                rel_tol=get("solver", "rel_tol", positive(float), base.solver.rel_tol),
                max_iter=get("solver", "max_iter", at_least(1), base.solver.max_iter),
            ),
            stokes_tol=get("solver", "stokes_tol", positive(float), base.stokes_tol),
            stokes_max_iter=get("solver", "stokes_max_iter", at_least(1), base.stokes_max_iter),
            output_every=get("output", "every", at_least(1), base.output_every),
            stations=get("output", "stations", float_list, base.stations),
            n_profile=get("output", "n_profile", at_least(2), base.n_profile),
            vtk_every=get("output", "vtk_every", at_least(0), base.vtk_every),
        )
    except ValueError as err:
        raise ConfigError(f"{source}: {err}") from None


def parse_config(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"{path}: cannot read configuration ({err.strerror})") from None
    return parse_config_text(text, str(path))


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def _model_token(m: ModelKind) -> str:
    return f"deconv:{m.tau!r}" if m.name == "deconv" else m.name


def emit_config(sc: Scenario) -> str:
    """Resolved configuration text; parsing it back reproduces ``sc``."""
    bump = sc.bump
    out = [
        f"scenario = {'bathymetry' if sc.name == 'bathymetry' else 'cavity'}",
        f"name = {sc.name}",
        "",
        "[grid]",
        f"nx = {sc.nx}",
        f"nz = {sc.nz}",
        f"lx = {_fmt(sc.Lx)}",
        f"h = {_fmt(sc.h)}",
        f"bump_height = {_fmt(bump.height if bump else 0.0)}",
    ]
    if bump:
        out += [f"bump_halfwidth = {_fmt(bump.halfwidth)}", f"bump_center = {_fmt(bump.center)}"]
    out += [
        f"inflow_amplitude = {_fmt(float(sc.inflow_amplitude))}",
        f"inflow_side = {sc.inflow_side}",
        "",
        "[wind]",
        f"amplitude = {_fmt(float(sc.wind.amplitude))}",
        f"center = {_fmt(float(sc.wind.center))}",
        f"halfwidth = {_fmt(float(sc.wind.halfwidth))}",
        "",
        "[fluid]",
        f"nu = {_fmt(float(sc.fluid.nu))}",
        "",
        "[time]",
        f"dt = {_fmt(float(sc.time.dt))}",
        f"t_final = {_fmt(float(sc.time.T))}",
        "",
        "[models]",
        "run = " + ", ".join(_model_token(m) for m in sc.models),
        "",
        "[deconv]",
        f"alpha = {_fmt(float(sc.alpha))}",
        f"dtau = {_fmt(float(sc.dtau))}",
        "",
        "[solver]",
        f"rel_tol = {_fmt(float(sc.solver.rel_tol))}",
    ]
    if sc.solver.max_iter is not None:
        out.append(f"max_iter = {sc.solver.max_iter}")
    out += [
        f"stokes_tol = {_fmt(float(sc.stokes_tol))}",
        f"stokes_max_iter = {sc.stokes_max_iter}",
        "",
        "[output]",
        f"every = {sc.output_every}",
        "stations = " + ", ".join(_fmt(float(x)) for x in sc.stations),
        f"n_profile = {sc.n_profile}",
        f"vtk_every = {sc.vtk_every}",
    ]
    return "\n".join(out) + "\n"
