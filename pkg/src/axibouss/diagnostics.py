"""Norm monitoring and the a-priori-inequality ledger.

Each record time produces one DiagnosticsRecord holding every monitored
norm, the support geometry of the density, and running time integrals.
``evaluate_checks`` turns a record series into the ledger of inequality
rows, each an explicit LHS/RHS pair tagged

* ASSERTED  - constant-free estimate; a negative margin beyond the stated
              tolerance is a run failure,
* REPORTED  - the underlying estimate carries an unspecified constant, so
              only the measured pair (or trajectory value) is recorded,
* SUSPENDED - the hypothesis of the estimate failed (empty or near-axis
              support), so the row is informational.

Every row carries a ``paper_anchor`` naming the proposition it realizes,
which makes the printed ledger the primary scientific output of a run.
Checks are pure functions of the series: re-evaluating a stored CSV
reproduces the ledger bit for bit.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import List, Optional

import numpy as np

from .errors import InvalidInputError
from .flowmap import rho_over_r_bound_check, rho_over_r_l2, support_metrics
from .grid import (
    axis_quotient,
    azimuthal_vector_h1,
    h1_seminorm,
    lp_norm,
)

ASSERTED = "ASSERTED"
REPORTED = "REPORTED"
SUSPENDED = "SUSPENDED"

DEFAULT_TOLERANCES = {
    "rho-Linf-max-principle": 0.0,
    "rho-L2": 1e-3,
    "v-L2-linear": 1e-2,
    "energy-budget": 1e-2,
    "gamma-L2-growth": 5e-2,
    "support-axis-lower": 1e-2,
    "support-z-diameter": 1e-2,
    "rho-over-r-quadratic": 1e-2,
    "gamma-Lp-monotone": 1e-6,
}


@dataclass
class DiagnosticsRecord:
    """One time slice of every monitored quantity.

    ``grad_v_l2`` is the 3D gradient norm of the no-swirl vector field,
    ||grad v||^2 = ||grad v^r||^2 + ||v^r/r||^2 + ||grad v^z||^2; the
    omega_over_r_* entries monitor the axis quotient of the vorticity.
    dr/dz ride along so an offline re-evaluation of the ledger needs
    nothing beyond the CSV.
    """

    t: float
    v_l2: float
    grad_v_l2: float
    v_linf: float
    rho_l2: float
    rho_linf: float
    omega_l2: float
    omega_h1: float
    omega_over_r_l2: float
    omega_over_r_linf: float
    omega_over_r_h1: float
    vr_over_r_linf: float
    rho_over_r_l2: float
    support_dist_to_axis: float
    support_z_diameter: float
    support_threshold: float
    support_empty: int
    int_vr_over_r_linf: float
    int_v_linf: float
    int_grad_v_l2_sq: float
    int_rho_over_r_l2_sq: float
    int_gamma_h1_sq: float
    dr: float
    dz: float


@dataclass
class InequalityCheck:
    name: str
    t: float
    lhs: float
    rhs: float
    margin: float
    status: str
    paper_anchor: str

    def passed(self, tol: float) -> bool:
        if self.status != ASSERTED:
            return True
        return self.margin >= -tol * abs(self.rhs)


def integrand_values(state):
    """The five time-integrated quantities at one state:
    (||v^r/r||_inf, ||v||_inf, ||grad v||^2, ||rho/r||^2, ||grad(w/r)||^2)."""
    v = state.velocity
    vr_q = axis_quotient(v.vr)
    grad_sq = (h1_seminorm(v.vr) ** 2 + lp_norm(vr_q, 2) ** 2
               + h1_seminorm(v.vz) ** 2)
    gamma_h1 = h1_seminorm(axis_quotient(state.omega_theta))
    return (float(np.abs(vr_q.values).max()), v.speed_linf(), grad_sq,
            rho_over_r_l2(state.rho) ** 2, gamma_h1 ** 2)


def record(state, prev: Optional[DiagnosticsRecord] = None, *,
           support_threshold: float,
           integrals: Optional[tuple] = None) -> DiagnosticsRecord:
    """Measure one flow state.

    Cumulative integrals default to a record-to-record trapezoid against
    ``prev``; a run loop that accumulates them at step resolution (much
    more accurate through fast transients) passes its totals in
    ``integrals`` instead.
    """
    g = state.omega_theta.grid
    v = state.velocity
    rho = state.rho
    omega = state.omega_theta

    gamma = axis_quotient(omega)
    vr_field = v.vr
    vz_field = v.vz

    v_l2 = math.sqrt(lp_norm(vr_field, 2) ** 2 + lp_norm(vz_field, 2) ** 2)
    vr_q = axis_quotient(vr_field)
    grad_v_l2 = math.sqrt(
        h1_seminorm(vr_field) ** 2 + lp_norm(vr_q, 2) ** 2 + h1_seminorm(vz_field) ** 2)
    v_linf = v.speed_linf()
    vr_over_r_linf = float(np.abs(vr_q.values).max())
    ror = rho_over_r_l2(rho)
    sup = support_metrics(rho, max(support_threshold, 1e-300))

    rec = DiagnosticsRecord(
        t=state.t,
        v_l2=v_l2,
        grad_v_l2=grad_v_l2,
        v_linf=v_linf,
        rho_l2=lp_norm(rho, 2),
        rho_linf=lp_norm(rho, np.inf),
        omega_l2=lp_norm(omega, 2),
        omega_h1=azimuthal_vector_h1(omega),
        omega_over_r_l2=lp_norm(gamma, 2),
        omega_over_r_linf=lp_norm(gamma, np.inf),
        omega_over_r_h1=h1_seminorm(gamma),
        vr_over_r_linf=vr_over_r_linf,
        rho_over_r_l2=ror,
        support_dist_to_axis=sup.dist_to_axis,
        support_z_diameter=sup.z_diameter,
        support_threshold=sup.threshold,
        support_empty=int(sup.empty),
        int_vr_over_r_linf=0.0,
        int_v_linf=0.0,
        int_grad_v_l2_sq=0.0,
        int_rho_over_r_l2_sq=0.0,
        int_gamma_h1_sq=0.0,
        dr=g.dr,
        dz=g.dz,
    )
    if integrals is not None:
        (rec.int_vr_over_r_linf, rec.int_v_linf, rec.int_grad_v_l2_sq,
         rec.int_rho_over_r_l2_sq, rec.int_gamma_h1_sq) = integrals
    elif prev is not None:
        if rec.t <= prev.t:
            raise InvalidInputError("records must be strictly time-ordered")
        half_dt = 0.5 * (rec.t - prev.t)
        rec.int_vr_over_r_linf = prev.int_vr_over_r_linf + half_dt * (
            prev.vr_over_r_linf + rec.vr_over_r_linf)
        rec.int_v_linf = prev.int_v_linf + half_dt * (prev.v_linf + rec.v_linf)
        rec.int_grad_v_l2_sq = prev.int_grad_v_l2_sq + half_dt * (
            prev.grad_v_l2 ** 2 + rec.grad_v_l2 ** 2)
        rec.int_rho_over_r_l2_sq = prev.int_rho_over_r_l2_sq + half_dt * (
            prev.rho_over_r_l2 ** 2 + rec.rho_over_r_l2 ** 2)
        rec.int_gamma_h1_sq = prev.int_gamma_h1_sq + half_dt * (
            prev.omega_over_r_h1 ** 2 + rec.omega_over_r_h1 ** 2)
    return rec


def evaluate_checks(series: List[DiagnosticsRecord], init: DiagnosticsRecord,
                    tolerances: Optional[dict] = None) -> List[InequalityCheck]:
    """Produce the full ledger, one row per check per record time."""
    if not series:
        raise InvalidInputError("empty record series")
    ts = [r.t for r in series]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise InvalidInputError("record series must be strictly time-ordered")
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)

    homogeneous = init.rho_linf == 0.0
    has_support = init.support_empty == 0
    r0 = init.support_dist_to_axis
    d0 = init.support_z_diameter
    dr, dz = init.dr, init.dz

    checks: List[InequalityCheck] = []

    def emit(name, t, lhs, rhs, status, anchor):
        checks.append(InequalityCheck(name, t, float(lhs), float(rhs),
                                      float(rhs - lhs), status, anchor))

    prev = None
    for rec in series:
        t = rec.t

        emit("rho-Linf-max-principle", t, rec.rho_linf, init.rho_linf,
             ASSERTED, "Prop 4.1")
        emit("rho-L2", t, rec.rho_l2, init.rho_l2, ASSERTED, "Prop 4.1")
        emit("v-L2-linear", t, rec.v_l2, init.v_l2 + t * init.rho_l2,
             ASSERTED, "Prop 4.1 proof")
        emit("energy-budget", t,
             0.5 * rec.v_l2 ** 2 + rec.int_grad_v_l2_sq,
             0.5 * init.v_l2 ** 2 + (init.v_l2 + t * init.rho_l2) * init.rho_l2 * t,
             ASSERTED, "Prop 4.1 proof")
        emit("gamma-L2-growth", t,
             rec.omega_over_r_l2 ** 2 + rec.int_gamma_h1_sq,
             init.omega_over_r_l2 ** 2 + rec.int_rho_over_r_l2_sq,
             ASSERTED, "Eq. (4.8)")

        if has_support:
            sa_status = SUSPENDED if rec.support_empty else ASSERTED
            emit("support-axis-lower", t,
                 r0 * math.exp(-rec.int_vr_over_r_linf),
                 (0.0 if rec.support_empty else rec.support_dist_to_axis) + dr,
                 sa_status, "Prop 3.2(1)")
            emit("support-z-diameter", t,
                 0.0 if rec.support_empty else rec.support_z_diameter,
                 d0 + 2.0 * rec.int_v_linf + 2.0 * dz,
                 sa_status, "Prop 3.2(2)")

        emit("biot-savart-v", t, rec.v_linf,
             math.sqrt(rec.omega_l2 * rec.omega_h1), REPORTED, "Prop 4.2(1)")
        emit("biot-savart-vr-over-r", t, rec.vr_over_r_linf,
             math.sqrt(rec.omega_over_r_l2 * rec.omega_over_r_h1),
             REPORTED, "Prop 4.2(2)")
        emit("strong-estimate-v-h1", t,
             math.sqrt(rec.v_l2 ** 2 + rec.grad_v_l2 ** 2), 0.0,
             REPORTED, "Prop 4.4")
        emit("strong-estimate-gamma-l2", t, rec.omega_over_r_l2, 0.0,
             REPORTED, "Prop 4.4")

        if homogeneous and prev is not None:
            emit("gamma-Lp-monotone-p2", t, rec.omega_over_r_l2,
                 prev.omega_over_r_l2, ASSERTED, "Sec. 1 (Gamma L^p conservation)")
            emit("gamma-Lp-monotone-pinf", t, rec.omega_over_r_linf,
                 prev.omega_over_r_linf, ASSERTED, "Sec. 1 (Gamma L^p conservation)")
        prev = rec

    if has_support:
        rows = rho_over_r_bound_check(
            times=np.array(ts),
            rho_over_r_l2_series=[r.rho_over_r_l2 for r in series],
            int_vr_over_r=[r.int_vr_over_r_linf for r in series],
            int_v=[r.int_v_linf for r in series],
            r0=r0, d0=d0, rho0_l2=init.rho_l2, rho0_linf=init.rho_linf,
            dist_to_axis=[r.support_dist_to_axis for r in series], dr=dr)
        for t, lhs, rhs, suspended in rows:
            checks.append(InequalityCheck(
                "rho-over-r-quadratic", t, lhs, rhs, rhs - lhs,
                SUSPENDED if suspended else ASSERTED, "Cor 3.3"))
    return checks


def check_tolerance(name: str, tolerances: Optional[dict] = None) -> float:
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    if name in tol:
        return tol[name]
    # per-p variants of gamma-Lp-monotone share one tolerance key
    for key, value in tol.items():
        if name.startswith(key + "-"):
            return value
    return 0.0


def failed_checks(checks: List[InequalityCheck],
                  tolerances: Optional[dict] = None) -> List[InequalityCheck]:
    return [c for c in checks if not c.passed(check_tolerance(c.name, tolerances))]


# ---------------------------------------------------------------------------
# serialization: plot-ready CSV and a JSON ledger, both byte-deterministic
# ---------------------------------------------------------------------------

_FIELD_NAMES = [f.name for f in fields(DiagnosticsRecord)]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def diagnostics_csv_text(records: List[DiagnosticsRecord]) -> str:
    lines = [",".join(_FIELD_NAMES)]
    for r in records:
        d = asdict(r)
        lines.append(",".join(_fmt(d[name]) for name in _FIELD_NAMES))
    return "\n".join(lines) + "\n"


def write_diagnostics_csv(records: List[DiagnosticsRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(diagnostics_csv_text(records))


def read_diagnostics_csv(path) -> List[DiagnosticsRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != _FIELD_NAMES:
            raise InvalidInputError(f"{path}: unexpected diagnostics columns")
        out = []
        for row in reader:
            kwargs = {}
            for name in _FIELD_NAMES:
                kwargs[name] = int(row[name]) if name == "support_empty" else float(row[name])
            out.append(DiagnosticsRecord(**kwargs))
    return out


def checks_json_text(checks: List[InequalityCheck]) -> str:
    payload = [
        {"name": c.name, "t": c.t, "lhs": c.lhs, "rhs": c.rhs,
         "margin": c.margin, "status": c.status, "paper_anchor": c.paper_anchor}
        for c in checks
    ]
    return json.dumps(payload, indent=2) + "\n"


def write_checks_json(checks: List[InequalityCheck], path) -> None:
    with open(path, "w") as fh:
        fh.write(checks_json_text(checks))


def ledger_summary(checks: List[InequalityCheck],
                   tolerances: Optional[dict] = None) -> str:
    """Worst margin per check name, one line each; the run-end printout.

    Asserted rows dominate the summary of a name; suspended or reported
    rows only represent names that are never asserted.
    """
    rank = {ASSERTED: 0, SUSPENDED: 1, REPORTED: 2}
    by_name = {}
    for c in checks:
        cur = by_name.get(c.name)
        if cur is None or (rank[c.status], c.margin) < (rank[cur.status], cur.margin):
            by_name[c.name] = c
    lines = []
    for name in sorted(by_name):
        c = by_name[name]
        tol = check_tolerance(name, tolerances)
        if c.status == REPORTED:
            verdict = "reported"
        elif c.status == SUSPENDED:
            verdict = "suspended"
        else:
            verdict = "PASS" if c.passed(tol) else "FAIL"
        lines.append(
            f"{name:28s} [{c.paper_anchor:28s}] worst margin {c.margin:+.3e} "
            f"at t={c.t:<8.4g} {verdict}")
    return "\n".join(lines)
