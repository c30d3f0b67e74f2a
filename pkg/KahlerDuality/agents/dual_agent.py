from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from .base_agent import BaseAgent
from KahlerDuality.core.duality import (
    RealnessReport,
    check_realness,
    dual_polarized,
    dual_radial,
    dual_rotation_invariant,
)
from KahlerDuality.core.numkit import DomainError
from KahlerDuality.core.potentials import PolarizedPotential, RadialPotential
from KahlerDuality.core.verify import FD_THRESHOLD

REALNESS_RADIUS = 0.1
SELF_DUAL_TOLERANCE = 1e-12
REFLECTION_STEP = 1e-4


def format_point(z: Sequence[complex]) -> str:
    """Compact rendering of a sample point, e.g. 0.1i or (0.05+0.02i, 0)."""
    def one(c: complex) -> str:
        re = float(c.real) if abs(c.real) > 1e-12 else 0.0
        im = float(c.imag) if abs(c.imag) > 1e-12 else 0.0
        if im == 0.0:
            return f"{re:.6g}"
        if re == 0.0:
            return f"{im:.6g}i"
        return f"{re:.6g}{im:+.6g}i"

    parts = [one(c) for c in np.atleast_1d(z)]
    return parts[0] if len(parts) == 1 else "(" + ", ".join(parts) + ")"


def realness_message(report: RealnessReport) -> str:
    verdict = "REAL" if report.is_real else "NOT REAL"
    return f"{verdict}, max |Im| = {report.max_imag:.6g} at z={format_point(report.worst_point)}"


class DualAgent(BaseAgent):
    """Agent for inspecting the dual potential Φ*(z, z̄) = −Φ(z, −z̄)"""

    agent_name = "dual"
    agent_description = "Tabulates dual values, checks gradient reflection and realness of polarized duals"

    def process(self, input_data: Any) -> Dict[str, Any]:
        """Dispatch on the potential kind"""
        try:
            if not self.validate(input_data):
                return self.result('error', 'Invalid run configuration', {})
            potential = self.build_potential(input_data)
            if isinstance(potential, PolarizedPotential):
                return self._polarized(potential, input_data)
            if isinstance(potential, RadialPotential):
                return self._radial(potential, input_data)
            return self._rotation_invariant(potential, input_data)

        except Exception as e:
            self.log_error(e, "Dual inspection failed")
            return self.result('error', str(e), {})

    def _polarized(self, potential: PolarizedPotential, run) -> Dict[str, Any]:
        radius = run.radius or REALNESS_RADIUS
        dual, realness = dual_polarized(potential, radius)
        header = {"command": "dual", "potential": potential.name, "dual": dual.name,
                  "realness": realness.to_dict()}
        worst = np.atleast_1d(realness.worst_point)
        table = pd.DataFrame([{
            "potential": dual.name,
            "radius": realness.radius,
            "samples": realness.samples,
            "max_imag": realness.max_imag,
            "worst_point": format_point(worst),
            "real": realness.is_real,
        }])
        message = realness_message(realness)
        self.logger.info(message)
        return self.result('success' if realness.is_real else 'fail', message, header, table=table)

    def _radial(self, potential: RadialPotential, run) -> Dict[str, Any]:
        dual = dual_radial(potential)
        threshold = run.threshold or FD_THRESHOLD
        rows = []
        for x in self.radial_samples(potential, run):
            try:
                f, f_dual = potential.f(x), dual.f(x)
                gradient = (dual.f(x + REFLECTION_STEP) - dual.f(x - REFLECTION_STEP)) / (2.0 * REFLECTION_STEP)
                rows.append({"x": x, "f": f, "f_dual": f_dual,
                             "reflection_error": abs(gradient - potential.fprime(-x)), "status": "ok"})
            except DomainError as err:
                self.logger.debug(f"x={x!r}: {err}")
                rows.append({"x": x, "f": np.nan, "f_dual": np.nan, "reflection_error": np.nan,
                             "status": f"domain_error: {err}"})
        table = pd.DataFrame(rows, columns=["x", "f", "f_dual", "reflection_error", "status"])

        realness: Optional[RealnessReport] = None
        if potential.expression is not None:
            realness = check_realness(dual.polarized(run.dim or 1), REALNESS_RADIUS)

        ok = table["status"] == "ok"
        self_dual = bool(ok.all() and (table["f_dual"] - table["f"]).abs().max() < SELF_DUAL_TOLERANCE)
        header = {
            "command": "dual",
            "potential": potential.name,
            "dual": dual.name,
            "dual_domain": str(dual.domain),
            "dual_expression": str(dual.expression.tree) if dual.expression is not None else None,
            "self_dual": self_dual,
            "max_reflection_error": float(table.loc[ok, "reflection_error"].max()) if ok.any() else None,
            "threshold": threshold,
            "realness": realness.to_dict() if realness is not None else None,
        }
        return self._verdict(table, ok, threshold, realness, header, "self-dual" if self_dual else "dual computed")

    def _rotation_invariant(self, potential, run) -> Dict[str, Any]:
        dual = dual_rotation_invariant(potential)
        threshold = run.threshold or FD_THRESHOLD
        n = potential.n
        x_columns = [f"x{k + 1}" for k in range(n)]
        rows = []
        for z in self.grid(potential, run, n).points():
            x = (z * np.conj(z)).real
            row = dict(zip(x_columns, x))
            try:
                gradient = np.array([
                    (dual.value(x + step) - dual.value(x - step)) / (2.0 * REFLECTION_STEP)
                    for step in REFLECTION_STEP * np.eye(n)
                ])
                row.update({"phi": potential.value(x), "phi_dual": dual.value(x),
                            "reflection_error": float(np.max(np.abs(gradient - potential.gradient(-x)))),
                            "status": "ok"})
            except DomainError as err:
                self.logger.debug(f"x={x.tolist()}: {err}")
                row.update({"phi": np.nan, "phi_dual": np.nan, "reflection_error": np.nan,
                            "status": f"domain_error: {err}"})
            rows.append(row)
        table = pd.DataFrame(rows, columns=x_columns + ["phi", "phi_dual", "reflection_error", "status"])
        ok = table["status"] == "ok"
        header = {
            "command": "dual",
            "potential": potential.name,
            "dual": dual.name,
            "dual_domain": str(dual.domain),
            "max_reflection_error": float(table.loc[ok, "reflection_error"].max()) if ok.any() else None,
            "threshold": threshold,
        }
        return self._verdict(table, ok, threshold, None, header, "dual computed")

    def _verdict(self, table: pd.DataFrame, ok: pd.Series, threshold: float,
                 realness: Optional[RealnessReport], header: Dict[str, Any], summary: str) -> Dict[str, Any]:
        reflection_failures = int((table.loc[ok, "reflection_error"] >= threshold).sum())
        parts = [summary]
        if realness is not None:
            parts.append(realness_message(realness))
        if reflection_failures:
            parts.append(f"{reflection_failures} row(s) fail the gradient reflection check")
        domain_errors = int((~ok).sum())
        if domain_errors:
            parts.append(f"{domain_errors} row(s) outside the domain")
        message = "; ".join(parts)

        if reflection_failures or (realness is not None and not realness.is_real):
            status = 'fail'
        elif domain_errors:
            status = 'error'
        else:
            status = 'success'
        self.logger.info(message)
        return self.result(status, message, header, table=table)
