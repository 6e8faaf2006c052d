"""Command-line entry points and run orchestration.

Subcommands:

  run <config>     simulate, verify the inequality ledger, write outputs
  check <csv>      re-evaluate the ledger offline from a diagnostics CSV
  oracle <name>    run one named oracle suite
  lp-verify        run the dyadic-analysis identity suite
  version          print version and cutoff identity hash

Exit codes: 0 success / all asserted checks pass, 1 assertion failure,
2 configuration error, 3 numerical blow-up (last state is snapshotted).

All run outputs land in the output directory: diagnostics.csv, checks.json,
particles.csv and snapshots snap_t<time>_<field>.fld; the same config
always produces byte-identical diagnostics and ledger files.
"""

import argparse
import os
import sys

from . import __version__, diagnostics, evolution
from .config import load_config
from .errors import BlowUpError, ConfigError
from .flowmap import ParticleSet, VelocityHistory, advance_particles
from .grid import write_field
from .lpaley import CutoffPair
from .oracles import ORACLES, dyadic_identity_suite, run_oracle


def _snapshot_name(t: float, which: str) -> str:
    return f"snap_t{t:.6f}_{which}.fld"


def _write_snapshot(outdir: str, t: float, state) -> None:
    write_field(state.omega_theta, os.path.join(outdir, _snapshot_name(t, "omega_theta")))
    write_field(state.rho, os.path.join(outdir, _snapshot_name(t, "rho")))


def _particles_csv_text(rows) -> str:
    lines = ["t,id,r,theta,z,escaped"]
    for t, pid, r, theta, z, escaped in rows:
        lines.append(f"{t!r},{pid},{r!r},{theta!r},{z!r},{int(escaped)}")
    return "\n".join(lines) + "\n"


def _besov_rows(cfg, history: VelocityHistory):
    """REPORTED Besov monitoring of the velocity on a small box."""
    from .lpaley import besov_norm, dyadic_blocks, embed_cartesian

    cut = CutoffPair()
    rows = []
    k = 0
    p, s = 4.0, 3.0 / 4.0 + 1.0
    while True:
        t = k * cfg.besov_interval
        if t > cfg.t_end + 1e-12:
            break
        if t >= history.times[0] - 1e-12 and t <= history.times[-1] + 1e-12:
            v = history(t)
            value = 0.0
            for comp in (v.vr, v.vz):
                box = embed_cartesian(comp, cfg.besov_box)
                value += besov_norm(dyadic_blocks(box, cut, taper=True), s, p, 1)
            rows.append(diagnostics.InequalityCheck(
                f"besov-velocity[B^{s:g}_{p:g},1][{cut.identity_hash()}]",
                float(t), value, 0.0, -value, diagnostics.REPORTED, "Eq. (4.15)"))
        k += 1
    return rows


def cmd_run(args) -> int:
    path = args.config or args.config_flag
    if not path or (args.config and args.config_flag):
        print("config error: give exactly one config path (positional or --config)",
              file=sys.stderr)
        return 2
    try:
        cfg = load_config(path)
    except (OSError, ConfigError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2

    if args.print_config:
        sys.stdout.write(cfg.canonical_text())
        return 0

    outdir = args.output or "out"
    os.makedirs(outdir, exist_ok=True)
    quiet = args.quiet

    history = VelocityHistory()
    boundary_worst = {}

    def warn(name, t, level):
        first = name not in boundary_worst
        prev = boundary_worst.get(name, (0.0, 0.0))
        boundary_worst[name] = max(prev, (level, t))
        if first and not quiet:
            print(f"warning: {name} reached {level:.2e} of its max near the outer "
                  f"boundary at t={t:.6g}; domain truncation is not negligible there")

    def snapshot(t, state):
        _write_snapshot(outdir, t, state)

    try:
        records, final_state = evolution.run(
            cfg, velocity_sink=history.append, snapshot_sink=snapshot,
            warning_sink=warn)
    except BlowUpError as err:
        print(f"blow-up: {err}", file=sys.stderr)
        if err.last_state is not None:
            _write_snapshot(outdir, err.last_state.t, err.last_state)
        return 3

    diagnostics.write_diagnostics_csv(records, os.path.join(outdir, "diagnostics.csv"))
    checks = diagnostics.evaluate_checks(records, records[0], cfg.check_tolerances)
    diagnostics.write_checks_json(checks, os.path.join(outdir, "checks.json"))
    if cfg.besov_interval > 0:
        # reported separately: checks.json stays reproducible offline from
        # the diagnostics CSV alone
        diagnostics.write_checks_json(_besov_rows(cfg, history),
                                      os.path.join(outdir, "besov.json"))

    if cfg.particle_seeds:
        rows = []
        particles = ParticleSet.from_seeds(cfg.particle_seeds)
        for pid in range(len(particles)):
            rows.append((0.0, pid, particles.r[pid], particles.theta[pid],
                         particles.z[pid], False))
        times = history.times
        for a, b in zip(times, times[1:]):
            particles = advance_particles(particles, history, a, b, cfg.particle_dt)
            for pid in range(len(particles)):
                rows.append((b, pid, particles.r[pid], particles.theta[pid],
                             particles.z[pid], bool(particles.escaped[pid])))
        with open(os.path.join(outdir, "particles.csv"), "w", newline="") as fh:
            fh.write(_particles_csv_text(rows))

    if not quiet:
        print(diagnostics.ledger_summary(checks, cfg.check_tolerances))
        for name, (level, t) in sorted(boundary_worst.items()):
            print(f"note: {name} boundary proximity peaked at {level:.2e} of its max "
                  f"(t={t:.6g})")
        print(f"final t = {final_state.t!r}; {len(records)} records -> {outdir}/")

    failed = diagnostics.failed_checks(checks, cfg.check_tolerances)
    if failed:
        for c in failed[:10]:
            print(f"ASSERTED check failed: {c.name} at t={c.t:g} "
                  f"(lhs={c.lhs!r}, rhs={c.rhs!r})", file=sys.stderr)
        return 1
    return 0


def cmd_check(args) -> int:
    try:
        records = diagnostics.read_diagnostics_csv(args.csv)
    except Exception as err:
        print(f"cannot read diagnostics: {err}", file=sys.stderr)
        return 2
    checks = diagnostics.evaluate_checks(records, records[0])
    if args.output:
        diagnostics.write_checks_json(checks, args.output)
    print(diagnostics.ledger_summary(checks))
    return 1 if diagnostics.failed_checks(checks) else 0


def cmd_oracle(args) -> int:
    try:
        passed, lines = run_oracle(args.name)
    except Exception as err:
        print(f"oracle error: {err}", file=sys.stderr)
        return 2
    for line in lines:
        print(line)
    print(f"oracle {args.name}: {'PASS' if passed else 'FAIL'}")
    return 0 if passed else 1


def cmd_lp_verify(args) -> int:
    passed, lines = dyadic_identity_suite()
    for line in lines:
        print(line)
    print(f"lp-verify: {'PASS' if passed else 'FAIL'}")
    return 0 if passed else 1


def cmd_version(args) -> int:
    print(f"axibouss {__version__} (cutoff {CutoffPair().identity_hash()})")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="axibouss",
        description="Axisymmetric Boussinesq simulator and a-priori-estimate harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a configured problem")
    p_run.add_argument("config", nargs="?", help="path to a run configuration file")
    p_run.add_argument("--config", dest="config_flag", metavar="PATH",
                       help="alternative to the positional config path")
    p_run.add_argument("--output", help="output directory (default: out)")
    p_run.add_argument("--print-config", action="store_true",
                       help="echo the canonical configuration and exit")
    p_run.add_argument("--quiet", action="store_true")
    p_run.set_defaults(func=cmd_run)

    p_check = sub.add_parser("check", help="re-evaluate the ledger from a CSV")
    p_check.add_argument("csv", help="path to diagnostics.csv")
    p_check.add_argument("--output", help="write checks.json here")
    p_check.set_defaults(func=cmd_check)

    p_oracle = sub.add_parser("oracle", help="run a named oracle suite")
    p_oracle.add_argument("name", choices=sorted(ORACLES))
    p_oracle.set_defaults(func=cmd_oracle)

    p_lp = sub.add_parser("lp-verify", help="dyadic-analysis identity suite")
    p_lp.set_defaults(func=cmd_lp_verify)

    p_ver = sub.add_parser("version", help="print version and cutoff hash")
    p_ver.set_defaults(func=cmd_version)

    args = parser.parse_args(argv)
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
