"""Run-configuration parsing, validation and canonicalization.

Grammar: one `section.key = value` per line, `#` starts a comment, blank
lines are ignored, exactly one dot per key.  Unknown or duplicate keys are
errors, so typos cannot silently change a run.  ``canonical_text`` emits
every effective setting in a fixed order with round-trip-exact floats: the
canonical form of a canonical form is byte-identical.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .errors import ConfigError
from .evolution import StepControl, initial_state
from .grid import MeridionalGrid, Parity, zero_field
from .initdata import BUMP_PEAK, RingParams, annular_density, gaussian_vortex_ring, mollify


@dataclass
class RunConfig:
    # grid
    nr: int = 0
    nz: int = 0
    Lr: float = 0.0
    Lz: float = 0.0
    # vortex ring (optional); amplitude directly, or scaled to a target L2 norm
    vortex_amplitude: Optional[float] = None
    vortex_l2: Optional[float] = None
    vortex_r0: float = 1.5
    vortex_z0: float = 0.0
    vortex_sigma: float = 0.3
    # annular density (optional); amplitude directly, or via the sup value
    density_amplitude: Optional[float] = None
    density_peak: Optional[float] = None
    density_r1: float = 1.0
    density_r2: float = 2.0
    density_z0: float = 0.0
    density_h: float = 0.5
    mollify_n: Optional[int] = None
    # stepping
    cfl_advect: float = 0.5
    cfl_diffuse: float = 0.25
    dt_max: float = 0.01
    scheme: str = "IMEX"
    # run windows
    t_end: float = 0.0
    record_interval: float = 0.05
    snapshot_interval: float = 0.5
    seed: int = 0              # reserved; nothing random in v1
    # particles
    particle_seeds: List[Tuple[float, float]] = field(default_factory=list)
    particle_dt: float = 0.002
    # support threshold (relative to ||rho_0||_inf)
    support_threshold_rel: float = 1e-8
    # optional Besov monitoring of the velocity (0 disables)
    besov_interval: float = 0.0
    besov_box: int = 64
    # ledger tolerance overrides
    check_tolerances: dict = field(default_factory=dict)

    # ------------------------------------------------------------------
    def build_grid(self) -> MeridionalGrid:
        return MeridionalGrid(self.nr, self.nz, self.Lr, self.Lz)

    def has_vortex(self) -> bool:
        return self.vortex_amplitude is not None or self.vortex_l2 is not None

    def has_density(self) -> bool:
        return self.density_amplitude is not None or self.density_peak is not None

    def build_omega(self, grid: MeridionalGrid):
        if not self.has_vortex():
            return zero_field(grid, Parity.ODD)
        params = RingParams(amplitude=1.0, r0=self.vortex_r0, z0=self.vortex_z0,
                            sigma=self.vortex_sigma)
        unit = gaussian_vortex_ring(params, grid)
        if self.vortex_l2 is not None:
            from .grid import lp_norm
            norm = lp_norm(unit, 2)
            if norm == 0.0:
                raise ConfigError("vortex.l2 requested but the ring vanishes on this grid")
            scale = self.vortex_l2 / norm
        else:
            scale = self.vortex_amplitude
        return unit.with_values(scale * unit.values)

    def build_rho(self, grid: MeridionalGrid):
        if not self.has_density():
            return zero_field(grid, Parity.EVEN)
        if self.density_peak is not None:
            amplitude = self.density_peak / BUMP_PEAK ** 2
        else:
            amplitude = self.density_amplitude
        params = RingParams(amplitude=amplitude, z0=self.density_z0,
                            r1=self.density_r1, r2=self.density_r2, h=self.density_h)
        rho = annular_density(params, grid)
        if self.mollify_n is not None:
            rho = mollify(rho, self.mollify_n)
        return rho

    def build_initial_state(self):
        grid = self.build_grid()
        return initial_state(self.build_omega(grid), self.build_rho(grid))

    def step_control(self) -> StepControl:
        return StepControl(cfl_advect=self.cfl_advect, cfl_diffuse=self.cfl_diffuse,
                           dt_max=self.dt_max, scheme=self.scheme)

    def support_threshold(self) -> float:
        if not self.has_density():
            return 1e-300
        grid = self.build_grid()
        from .grid import lp_norm
        rho0 = self.build_rho(grid)
        return max(self.support_threshold_rel * lp_norm(rho0, math.inf), 1e-300)

    # ------------------------------------------------------------------
    def canonical_text(self) -> str:
        lines = []

        def put(key, value):
            if value is None:
                return
            if isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")

        put("grid.nr", self.nr)
        put("grid.nz", self.nz)
        put("grid.Lr", self.Lr)
        put("grid.Lz", self.Lz)
        if self.has_vortex():
            put("vortex.amplitude", self.vortex_amplitude)
            put("vortex.l2", self.vortex_l2)
            put("vortex.r0", self.vortex_r0)
            put("vortex.z0", self.vortex_z0)
            put("vortex.sigma", self.vortex_sigma)
        if self.has_density():
            put("density.amplitude", self.density_amplitude)
            put("density.peak", self.density_peak)
            put("density.r1", self.density_r1)
            put("density.r2", self.density_r2)
            put("density.z0", self.density_z0)
            put("density.h", self.density_h)
            put("density.mollify_n", self.mollify_n)
        put("step.cfl_advect", self.cfl_advect)
        put("step.cfl_diffuse", self.cfl_diffuse)
        put("step.dt_max", self.dt_max)
        put("step.scheme", self.scheme)
        put("run.t_end", self.t_end)
        put("run.record_interval", self.record_interval)
        put("run.snapshot_interval", self.snapshot_interval)
        put("run.seed", self.seed)
        if self.particle_seeds:
            put("particles.seeds",
                ", ".join(f"{repr(r)}:{repr(z)}" for r, z in self.particle_seeds))
            put("particles.dt", self.particle_dt)
        put("support.threshold_rel", self.support_threshold_rel)
        if self.besov_interval > 0:
            put("lpaley.besov_interval", self.besov_interval)
            put("lpaley.besov_box", self.besov_box)
        for name in sorted(self.check_tolerances):
            put(f"checks.{name}", self.check_tolerances[name])
        return "\n".join(lines) + "\n"


_KNOWN_CHECKS = (
    "rho-Linf-max-principle", "rho-L2", "v-L2-linear", "energy-budget",
    "gamma-L2-growth", "support-axis-lower", "support-z-diameter",
    "rho-over-r-quadratic", "gamma-Lp-monotone",
)


def _parse_scalar(key, text, kind, lineno):
    try:
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} expects a {kind.__name__}, got {text!r}")
    return text


def _parse_seeds(text, lineno):
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        pieces = part.split(":")
        if len(pieces) != 2:
            raise ConfigError(f"line {lineno}: particle seed {part!r} is not 'r:z'")
        try:
            seeds.append((float(pieces[0]), float(pieces[1])))
        except ValueError:
            raise ConfigError(f"line {lineno}: particle seed {part!r} is not numeric")
    return seeds


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a configuration; see the module docstring."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key.count(".") != 1:
            raise ConfigError(f"line {lineno}: key {key!r} must be 'section.key'")
        if not value:
            raise ConfigError(f"line {lineno}: {key} has no value")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        entries[key] = (value, lineno)

    cfg = RunConfig()

    def take(key, kind):
        if key not in entries:
            return None
        value, lineno = entries.pop(key)
        if kind is list:
            return _parse_seeds(value, lineno)
        return _parse_scalar(key, value, kind, lineno)

    def require(key, kind):
        if key not in entries:
            raise ConfigError(f"{key} missing")
        return take(key, kind)

    cfg.nr = require("grid.nr", int)
    cfg.nz = require("grid.nz", int)
    cfg.Lr = require("grid.Lr", float)
    cfg.Lz = require("grid.Lz", float)
    cfg.t_end = require("run.t_end", float)

    cfg.vortex_amplitude = take("vortex.amplitude", float)
    cfg.vortex_l2 = take("vortex.l2", float)
    for name in ("r0", "z0", "sigma"):
        val = take(f"vortex.{name}", float)
        if val is not None:
            setattr(cfg, f"vortex_{name}", val)
    cfg.density_amplitude = take("density.amplitude", float)
    cfg.density_peak = take("density.peak", float)
    for name in ("r1", "r2", "z0", "h"):
        val = take(f"density.{name}", float)
        if val is not None:
            setattr(cfg, f"density_{name}", val)
    cfg.mollify_n = take("density.mollify_n", int)

    for key, attr, kind in (
        ("step.cfl_advect", "cfl_advect", float),
        ("step.cfl_diffuse", "cfl_diffuse", float),
        ("step.dt_max", "dt_max", float),
        ("step.scheme", "scheme", str),
        ("run.record_interval", "record_interval", float),
        ("run.snapshot_interval", "snapshot_interval", float),
        ("run.seed", "seed", int),
        ("particles.dt", "particle_dt", float),
        ("support.threshold_rel", "support_threshold_rel", float),
        ("lpaley.besov_interval", "besov_interval", float),
        ("lpaley.besov_box", "besov_box", int),
    ):
        val = take(key, kind)
        if val is not None:
            setattr(cfg, attr, val)

    seeds = take("particles.seeds", list)
    if seeds is not None:
        cfg.particle_seeds = seeds

    for key in list(entries):
        if key.startswith("checks."):
            name = key.split(".", 1)[1]
            if name not in _KNOWN_CHECKS:
                raise ConfigError(f"unknown check name in {key!r}")
            value, lineno = entries.pop(key)
            cfg.check_tolerances[name] = _parse_scalar(key, value, float, lineno)

    if entries:
        key, (_, lineno) = next(iter(entries.items()))
        raise ConfigError(f"line {lineno}: unknown key {key!r}")

    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.nr < 8 or cfg.nz < 8:
        raise ConfigError("grid.nr and grid.nz must be >= 8")
    if cfg.Lr <= 0 or cfg.Lz <= 0:
        raise ConfigError("grid.Lr and grid.Lz must be positive")
    if cfg.t_end < 0:
        raise ConfigError("run.t_end must be >= 0")
    if cfg.record_interval <= 0 or cfg.snapshot_interval <= 0:
        raise ConfigError("run intervals must be positive")
    if cfg.vortex_amplitude is not None and cfg.vortex_l2 is not None:
        raise ConfigError("give vortex.amplitude or vortex.l2, not both")
    if cfg.density_amplitude is not None and cfg.density_peak is not None:
        raise ConfigError("give density.amplitude or density.peak, not both")
    if cfg.particle_dt <= 0:
        raise ConfigError("particles.dt must be positive")
    if cfg.support_threshold_rel <= 0:
        raise ConfigError("support.threshold_rel must be positive")
    # StepControl re-validates, but fail at load with config-flavored messages
    if not (0 < cfg.cfl_advect <= 1) or cfg.cfl_diffuse <= 0 or cfg.dt_max <= 0:
        raise ConfigError("step.cfl_advect in (0,1], step.cfl_diffuse > 0, step.dt_max > 0")
    if cfg.scheme not in ("IMEX", "FullyExplicit"):
        raise ConfigError("step.scheme must be IMEX or FullyExplicit")

    dr = cfg.Lr / (cfg.nr - 1)
    if cfg.has_vortex():
        if cfg.vortex_r0 <= 0 or cfg.vortex_sigma <= 0:
            raise ConfigError("vortex.r0 and vortex.sigma must be positive")
    if cfg.has_density():
        if cfg.density_r1 <= 0:
            raise ConfigError(
                "density.r1 must be positive: the support of the initial density "
                "must keep a positive distance from the axis (axis-clearance "
                "hypothesis of the global-regularity theorem)")
        if cfg.density_r2 <= cfg.density_r1 or cfg.density_h <= 0:
            raise ConfigError("density needs r2 > r1 and h > 0")
        if cfg.density_r1 < 4.0 * dr:
            raise ConfigError(
                f"density.r1 = {cfg.density_r1} is closer than 4 cells ({4 * dr:.4g}) "
                "to the axis row")
        if cfg.density_r2 > 0.75 * cfg.Lr:
            raise ConfigError("density support must stay within 3/4 of the radial extent")
        if abs(cfg.density_z0) + cfg.density_h > 0.75 * cfg.Lz:
            raise ConfigError("density support must stay within 3/4 of the vertical extent")
        if cfg.mollify_n is not None and cfg.mollify_n <= 0:
            raise ConfigError("density.mollify_n must be a positive integer")
    for r, z in cfg.particle_seeds:
        if not (0 <= r < cfg.Lr and -cfg.Lz < z < cfg.Lz):
            raise ConfigError(f"particle seed ({r}, {z}) lies outside the grid")
    if cfg.besov_interval < 0:
        raise ConfigError("lpaley.besov_interval must be >= 0")
    if cfg.besov_interval > 0:
        n = cfg.besov_box
        if n < 8 or (n & (n - 1)) != 0:
            raise ConfigError("lpaley.besov_box must be a power of two >= 8")


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
