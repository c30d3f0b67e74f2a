from typing import Any, Dict

import numpy as np
import pandas as pd

from .base_agent import BaseAgent
from KahlerDuality.core.duality import dual_radial
from KahlerDuality.core.forms import gaussian_curvature_radial
from KahlerDuality.core.numkit import DomainError
from KahlerDuality.core.potentials import RadialPotential
from KahlerDuality.core.verify import WITNESS_THRESHOLD

CONSTANCY_TOLERANCE = 1e-8


def curvature_verdict(spread: float) -> str:
    """constant below 1e-8, non-constant above the witness threshold, inconclusive in between."""
    if spread < CONSTANCY_TOLERANCE:
        return "constant"
    if spread > WITNESS_THRESHOLD:
        return "non-constant"
    return "inconclusive"


class CurvatureAgent(BaseAgent):
    """Agent for the Gaussian curvature of a radial metric on a complex line"""

    agent_name = "curvature"
    agent_description = "Tabulates K(x), checks K*(x) = −K(−x) and decides whether K is constant"

    def process(self, input_data: Any) -> Dict[str, Any]:
        try:
            if not self.validate(input_data):
                return self.result('error', 'Invalid run configuration', {})
            potential = self.build_potential(input_data)
            if not isinstance(potential, RadialPotential):
                raise ValueError(f"curvature needs a radial potential, {potential.name} is not radial")
            dual = dual_radial(potential)
            tolerance = input_data.threshold or CONSTANCY_TOLERANCE

            rows = []
            for x in self.radial_samples(potential, input_data):
                try:
                    k = gaussian_curvature_radial(potential, x)
                    k_dual = gaussian_curvature_radial(dual, x)
                    check = abs(k_dual + gaussian_curvature_radial(potential, -x))
                    rows.append({"x": x, "K": k, "K_dual": k_dual, "K_dual_check": check, "status": "ok"})
                except DomainError as err:
                    self.logger.debug(f"x={x!r}: {err}")
                    rows.append({"x": x, "K": np.nan, "K_dual": np.nan, "K_dual_check": np.nan,
                                 "status": f"domain_error: {err}"})
            table = pd.DataFrame(rows, columns=["x", "K", "K_dual", "K_dual_check", "status"])

            ok = table["status"] == "ok"
            curvature = table.loc[ok, "K"]
            spread = float(curvature.max() - curvature.min()) if ok.any() else float("nan")
            verdict = curvature_verdict(spread)
            dual_failures = int((table.loc[ok, "K_dual_check"] >= tolerance).sum())
            domain_errors = int((~ok).sum())

            header = {
                "command": "curvature",
                "potential": potential.name,
                "dual": dual.name,
                "x_max": float(table["x"].max()),
                "K_min": float(curvature.min()) if ok.any() else None,
                "K_max": float(curvature.max()) if ok.any() else None,
                "spread": spread,
                "verdict": verdict,
                "dual_check_failures": dual_failures,
                "tolerance": tolerance,
            }
            message = f"curvature {verdict} on [0, {header['x_max']:.6g}], max-min = {spread:.6g}"
            if dual_failures:
                status = 'fail'
                message += f"; {dual_failures} row(s) violate K*(x) = -K(-x)"
            elif domain_errors:
                status = 'error'
                message += f"; {domain_errors} row(s) outside the domain"
            else:
                status = 'success'
            self.logger.info(message)
            return self.result(status, message, header, table=table)

        except Exception as e:
            self.log_error(e, "Curvature tabulation failed")
            return self.result('error', str(e), {})
