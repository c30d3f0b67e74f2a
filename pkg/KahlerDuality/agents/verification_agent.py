from dataclasses import replace
from typing import Any, Dict, List

import numpy as np

from .base_agent import BaseAgent
from KahlerDuality.core.duality import DualityProblem, special_map_from_potential
from KahlerDuality.core.verify import (
    GridSpec,
    VerificationReport,
    check_duality,
    check_jacobian_schemes,
    check_line_preservation,
    check_operator_identities,
    check_origin,
    gauge_transform,
    random_unitary,
)

GAUGE_PHASE = "0.3*x"
# The finite-difference comparison is the slow check; it runs on a prefix of the grid
SCHEME_SAMPLE_LIMIT = 50


class VerificationAgent(BaseAgent):
    """Agent for running the full identity suite on the canonical special map"""

    agent_name = "verify"
    agent_description = "Checks pullbacks, operator identities, the gauge family, line preservation and the origin"

    def process(self, input_data: Any) -> Dict[str, Any]:
        """Run every applicable check and return the report set"""
        try:
            if not self.validate(input_data):
                return self.result('error', 'Invalid run configuration', {})
            potential = self.build_potential(input_data)
            self.require_not_polarized(potential, "verify")
            lam, provenance = self.resolve_lambda(potential, input_data)
            n = self.dimension(potential, input_data)
            grid = self.grid(potential, input_data, n)
            scheme = input_data.scheme

            problem = DualityProblem.from_potential(potential, lam, n)
            canonical = special_map_from_potential(potential, lam, n)
            reports = self.run_checks(problem, canonical, grid, scheme)
            if input_data.threshold is not None:
                reports = [replace(report, threshold=input_data.threshold) for report in reports]

            failed = [report.identity for report in reports if not report.passed]
            witnessed = [report.identity for report in reports if report.witnessed]
            header = {
                "command": "verify",
                "potential": potential.name,
                "dual": problem.dual.name,
                "lambda": lam,
                **provenance,
                "dim": n,
                "jacobian_scheme": scheme,
                "grid": grid.to_dict(),
                "reports": len(reports),
                "failed": failed,
                "witnessed": witnessed,
            }
            if failed:
                message = f"{len(failed)} of {len(reports)} identities failed: {', '.join(failed)}"
                status = 'fail'
            else:
                message = f"all {len(reports)} identities pass"
                status = 'success'
            self.logger.info(message)
            return self.result(status, message, header, reports=[report.to_dict() for report in reports])

        except Exception as e:
            self.log_error(e, "Verification failed")
            return self.result('error', str(e), {})

    def run_checks(self, problem: DualityProblem, canonical, grid: GridSpec,
                   scheme: str) -> List[VerificationReport]:
        name, lam = problem.source.name, problem.lam
        reports = list(check_duality(problem, canonical, grid, scheme))

        if problem.is_radial:
            reports.append(check_operator_identities(problem, canonical, grid, scheme))

            rng = np.random.default_rng(grid.seed)
            unitary = random_unitary(rng, problem.n)
            gauged = gauge_transform(canonical, GAUGE_PHASE, unitary)
            for report in check_duality(problem, gauged, grid, scheme):
                reports.append(replace(report, identity=f"gauge_{report.identity}",
                                       metadata={**report.metadata, "phase": GAUGE_PHASE}))

            direction = rng.standard_normal(problem.n) + 1j * rng.standard_normal(problem.n)
            direction /= np.linalg.norm(direction)
            reports.append(check_line_preservation(canonical, direction, radius=grid.radius,
                                                   potential=name, lam=lam))

        scheme_grid = replace(grid, count=min(grid.count, SCHEME_SAMPLE_LIMIT))
        reports.append(check_jacobian_schemes(canonical, scheme_grid, potential=name, lam=lam))
        reports.append(check_origin(problem, canonical))
        return reports
