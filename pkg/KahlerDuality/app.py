"""Command-line front end: residual | verify | dual | curvature.

Exit codes: 0 when every check passes, 2 when any identity fails, 1 on usage or domain errors.
Report data goes to stdout (or --out); log records go to stderr.
"""
import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from dotenv import load_dotenv

from KahlerDuality.agents.curvature_agent import CurvatureAgent
from KahlerDuality.agents.dual_agent import DualAgent, format_point
from KahlerDuality.agents.residual_agent import ResidualAgent
from KahlerDuality.agents.verification_agent import VerificationAgent
from KahlerDuality.core.potentials import CATALOG
from KahlerDuality.core.verify import DEFAULT_COUNT, DEFAULT_SEED, JACOBIAN_SCHEMES

# Load environment variables
load_dotenv()

AGENTS = {
    "residual": ResidualAgent,
    "verify": VerificationAgent,
    "dual": DualAgent,
    "curvature": CurvatureAgent,
}
EXIT_CODES = {'success': 0, 'fail': 2, 'error': 1}
FORMATS = ("json", "csv")


@dataclass
class RunConfig:
    """One command invocation: potential, lambda, grid overrides and output."""

    command: str
    potential: str
    lam: Union[float, str] = "auto"
    c: Optional[float] = None
    mu: Optional[float] = None
    m: Optional[float] = None
    F: Optional[str] = None
    dim: Optional[int] = None
    radius: Optional[float] = None
    count: Optional[int] = None
    seed: Optional[int] = None
    scheme: str = "jets"
    fmt: str = "json"
    out: Optional[str] = None
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.command not in AGENTS:
            raise ValueError(f"unknown command {self.command!r}; choose from {sorted(AGENTS)}")
        if self.lam != "auto":
            self.lam = float(self.lam)
            if not self.lam > 0.0:
                raise ValueError(f"lambda must be positive, got {self.lam!r}")
        if self.scheme not in JACOBIAN_SCHEMES:
            raise ValueError(f"unknown jacobian scheme {self.scheme!r}")
        if self.fmt not in FORMATS:
            raise ValueError(f"unknown format {self.fmt!r}")
        if self.radius is not None and not self.radius > 0.0:
            raise ValueError(f"radius must be positive, got {self.radius!r}")
        if self.count is not None and self.count < 1:
            raise ValueError(f"count must be at least 1, got {self.count!r}")
        if self.dim is not None and self.dim < 1:
            raise ValueError(f"dim must be at least 1, got {self.dim!r}")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


def log_level(text: str) -> str:
    level = text.strip().upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ValueError(f"unknown log level {text!r}; use DEBUG, INFO, WARNING, ERROR or CRITICAL")
    return level


def environment_config() -> Dict[str, Any]:
    """Defaults from the environment; flags override them. Malformed values raise ValueError."""
    return {
        'seed': _env_int('KAHLER_DUALITY_SEED', DEFAULT_SEED),
        'count': _env_int('KAHLER_DUALITY_COUNT', DEFAULT_COUNT),
        'log_level': log_level(os.getenv('KAHLER_DUALITY_LOG_LEVEL', 'WARNING')),
    }


def parse_lambda(text: str) -> Union[float, str]:
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'auto', got {text!r}") from None
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"lambda must be positive, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--potential", required=True, choices=sorted(CATALOG), help="Catalog entry.")
    common.add_argument("--c", type=float, help="Scale of the flat potential.")
    common.add_argument("--mu", type=float, help="Scale of scaled_hyperbolic.")
    common.add_argument("--m", type=float, help="Taub-NUT mass parameter.")
    common.add_argument("--F", help="Hartogs profile F(x), e.g. '1-x'.")
    common.add_argument("--dim", type=int, help="Complex dimension (radial default 1, hartogs default 2).")
    common.add_argument("--lambda", dest="lam", type=parse_lambda, default="auto",
                        help="Positive lambda or 'auto' for 1/f'(0).")
    common.add_argument("--radius", type=float, help="Grid radius in z (default 0.8 of the verified radius).")
    common.add_argument("--count", type=int, help="Number of grid points.")
    common.add_argument("--seed", type=int, help="Grid seed.")
    common.add_argument("--scheme", choices=JACOBIAN_SCHEMES, default="jets", help="Jacobian scheme.")
    common.add_argument("--format", dest="fmt", choices=FORMATS, default="json", help="Output format.")
    common.add_argument("--out", help="Output path (default stdout).")
    common.add_argument("--threshold", type=float, help="Override the pass threshold.")
    common.add_argument("--log-level", help="Logging level (default from KAHLER_DUALITY_LOG_LEVEL).")

    parser = argparse.ArgumentParser(prog="kahler-duality", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)
    for name, agent in AGENTS.items():
        commands.add_parser(name, parents=[common], help=agent.agent_description)
    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command, potential=args.potential, lam=args.lam, c=args.c, mu=args.mu, m=args.m,
        F=args.F, dim=args.dim, radius=args.radius, count=args.count, seed=args.seed, scheme=args.scheme,
        fmt=args.fmt, out=args.out, threshold=args.threshold,
    )


def clean(value: Any) -> Any:
    """JSON-safe copy: numpy scalars become Python numbers, non-finite floats become null."""
    if isinstance(value, dict):
        return {str(key): clean(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [clean(item) for item in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def reports_table(reports: List[Dict[str, Any]]) -> pd.DataFrame:
    rows = []
    for report in reports:
        rows.append({
            "identity": report["identity"],
            "potential": report["potential"],
            "lambda": report["lambda"],
            "radius": report["grid"]["radius"],
            "count": report["grid"]["count"],
            "seed": report["grid"]["seed"],
            "scheme": report["grid"]["scheme"],
            "max_residual": report["max_residual"],
            "mean_residual": report["mean_residual"],
            "worst_point": format_point([complex(*pair) for pair in report["worst_point"]]),
            "threshold": report["threshold"],
            "errors": len(report["errors"]),
            "pass": report["pass"],
            "witness": report["witness"],
        })
    return pd.DataFrame(rows)


def render(result: Dict[str, Any], fmt: str) -> str:
    header = {**result['header'], 'status': result['status'], 'message': result['message']}
    table = result.get('table')
    reports = result.get('reports')

    if fmt == "json":
        payload: Dict[str, Any] = {'header': header}
        if reports is not None:
            payload['reports'] = reports
        if table is not None:
            payload['rows'] = table.to_dict(orient="records")
        return json.dumps(clean(payload), indent=2) + "\n"

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for key, value in clean(header).items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, separators=(",", ":"))
        writer.writerow([f"# {key}", "" if value is None else value])
    if reports is not None:
        table = reports_table(reports)
    if table is not None:
        buffer.write(table.to_csv(index=False, lineterminator="\n"))
    return buffer.getvalue()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else EXIT_CODES['error']

    try:
        config = environment_config()
        if args.log_level:
            config['log_level'] = log_level(args.log_level)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES['error']
    agent = AGENTS[args.command](config)
    agent.setup_logging()

    try:
        run = run_config_from_args(args)
    except ValueError as e:
        agent.log_error(e, "Invalid arguments")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES['error']

    result = agent.process(run)
    if result['status'] == 'error' and not result['header']:
        print(f"error: {result['message']}", file=sys.stderr)
        return EXIT_CODES['error']

    output = render(result, run.fmt)
    if run.out:
        with open(run.out, "w", encoding="utf-8", newline="") as handle:
            handle.write(output)
    else:
        sys.stdout.write(output)
    print(result['message'], file=sys.stderr)
    return EXIT_CODES[result['status']]


if __name__ == '__main__':
    sys.exit(main())
