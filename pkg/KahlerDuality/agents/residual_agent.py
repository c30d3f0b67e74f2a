from typing import Any, Dict, List

import numpy as np
import pandas as pd

from .base_agent import BaseAgent
from KahlerDuality.core.duality import residual_radial, residual_rotation_invariant
from KahlerDuality.core.numkit import DomainError
from KahlerDuality.core.potentials import RadialPotential
from KahlerDuality.core.verify import JETS_THRESHOLD


class ResidualAgent(BaseAgent):
    """Agent for tabulating the duality residual equation on a grid"""

    agent_name = "residual"
    agent_description = "Tabulates λ²∂Φ̃(x)·∂Φ̃(−λ∂Φ̃(x)x) − 1 on a grid, one row per point"

    def process(self, input_data: Any) -> Dict[str, Any]:
        """Build the residual table; rows outside the domain get an error status"""
        try:
            if not self.validate(input_data):
                return self.result('error', 'Invalid run configuration', {})
            potential = self.build_potential(input_data)
            self.require_not_polarized(potential, "residual")
            lam, provenance = self.resolve_lambda(potential, input_data)
            threshold = input_data.threshold or JETS_THRESHOLD

            if isinstance(potential, RadialPotential):
                table = self._radial_table(potential, lam, input_data)
                residual_columns = ["residual"]
            else:
                table = self._vector_table(potential, lam, input_data)
                residual_columns = [f"residual_{k + 1}" for k in range(potential.n)]

            ok = table["status"] == "ok"
            worst = float(table.loc[ok, residual_columns].abs().to_numpy().max()) if ok.any() else float("nan")
            failures = int((table.loc[ok, residual_columns].abs() >= threshold).any(axis=1).sum())
            domain_errors = int((~ok).sum())

            header = {
                "command": "residual",
                "potential": potential.name,
                "lambda": lam,
                **provenance,
                "radius": self.radius(potential, input_data),
                "count": len(table),
                "threshold": threshold,
                "max_abs_residual": worst,
                "failures": failures,
                "domain_errors": domain_errors,
            }
            if failures:
                status = 'fail'
                message = f"{failures} row(s) exceed threshold {threshold:g}; max |residual| = {worst:.6g}"
            elif domain_errors:
                status = 'error'
                message = f"{domain_errors} row(s) outside the domain"
            else:
                status = 'success'
                message = f"all residuals below {threshold:g}; max |residual| = {worst:.6g}"
            self.logger.info(message)
            return self.result(status, message, header, table=table)

        except Exception as e:
            self.log_error(e, "Residual tabulation failed")
            return self.result('error', str(e), {})

    def _radial_table(self, potential: RadialPotential, lam: float, run) -> pd.DataFrame:
        rows: List[Dict[str, Any]] = []
        for x in self.radial_samples(potential, run):
            try:
                rows.append({"x": x, "residual": residual_radial(potential, lam, x), "status": "ok"})
            except DomainError as err:
                self.logger.debug(f"x={x!r}: {err}")
                rows.append({"x": x, "residual": np.nan, "status": f"domain_error: {err}"})
        return pd.DataFrame(rows, columns=["x", "residual", "status"])

    def _vector_table(self, potential, lam: float, run) -> pd.DataFrame:
        n = potential.n
        x_columns = [f"x{k + 1}" for k in range(n)]
        residual_columns = [f"residual_{k + 1}" for k in range(n)]
        rows = []
        for z in self.grid(potential, run, n).points():
            x = (z * np.conj(z)).real
            row = dict(zip(x_columns, x))
            try:
                row.update(zip(residual_columns, residual_rotation_invariant(potential, lam, x)))
                row["status"] = "ok"
            except DomainError as err:
                self.logger.debug(f"x={x.tolist()}: {err}")
                row.update({column: np.nan for column in residual_columns})
                row["status"] = f"domain_error: {err}"
            rows.append(row)
        return pd.DataFrame(rows, columns=x_columns + residual_columns + ["status"])
