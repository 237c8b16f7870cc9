"""Command-line interface for building graphs, certifying tori and probing connections.

One command per invocation:
- gen         write a family as an edge list (or its JSON form)
- verify      check the product-torus conditions and transversal stability
- scan        Jacobian spectra along a line of shifts through the torus
- equilibria  seeded equilibrium search with spectral classification
- hetero      perturb-and-integrate map of connections between components

Exit codes:
- 0 success
- 1 a verification check failed
- 2 invalid input (bad flags, family, edge list, missing catalog)
- 3 numerical failure (non-finite state, no zero eigenvalue, bad catalog member)

Errors are reported as a single JSON record on stderr; artifacts go to
stdout or --out and never carry timestamps.
"""

import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
from pydantic import ValidationError

from cli.config import DEFAULT_TOL, RunConfig
from cli.report import CheckResult, format_report
from data_store import EQUILIBRIUM_SCHEMA, ResultStore, equilibrium_to_row, scan_columns, scan_point_to_row
from kuramoto_tori import __version__
from kuramoto_tori.components import (
    EquilibriumComponent,
    components_for_graph,
    matching_components,
)
from kuramoto_tori.defaults import BALANCE_TOL, CENSUS_MEMBERSHIP_TOL, TWO_PI
from kuramoto_tori.dynamics import energy, residual
from kuramoto_tori.equilibria import (
    search_equilibria,
    seed_configurations,
    torus_base,
    verify_lemma_conditions,
)
from kuramoto_tori.errors import (
    AsymmetricMatrixError,
    CatalogError,
    GraphError,
    IntegrationError,
    KuramotoError,
    NotEquilibriumError,
    NumericalFailure,
)
from kuramoto_tori.graphs import (
    Cycle,
    EyeGd,
    Graph,
    GraphFamily,
    family_label,
    family_to_dict,
    format_edge_list,
    generate,
    is_connected,
    parse_family,
    read_edge_list,
)
from kuramoto_tori.heteroclinic import (
    IntegratorParams,
    export_dot,
    export_json,
    export_misses,
    probe,
)
from kuramoto_tori.phasecfg import canonicalize
from kuramoto_tori.spectral import (
    SpectrumReport,
    TransversallyStable,
    circulant_eigenvalues,
    classify,
    eye_reference_spectrum,
    jacobian,
    shift_line,
    spectrum,
    torus_scan,
)
from kuramoto_tori.workers import threads_from_env

# =============================================================================
# Environment Configuration
# =============================================================================

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
MAX_WORKERS = threads_from_env()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

# Reference spectra are compared at this tolerance
SPECTRUM_MATCH_TOL = 1e-9
CIRCULANT_MATCH_TOL = 1e-10
RANDOM_SHIFT_COUNT = 16


# =============================================================================
# Helpers
# =============================================================================


def _header(cfg: RunConfig) -> Dict[str, Any]:
    return {"tool": "kura", "version": __version__, "config": cfg.echo()}


def _emit(text: str, out: Optional[str]) -> None:
    """Write an artifact to --out, or to stdout."""
    if out is None:
        click.echo(text, nl=False)
        return
    path = Path(out)
    path.write_text(text)
    logger.info(f"Wrote {path.resolve()}")


def _error_record(exc: BaseException, command: str, name: Optional[str] = None) -> None:
    record = {"error": name or type(exc).__name__, "message": str(exc), "command": command}
    click.echo(json.dumps(record), err=True)


def load_graph(cfg: RunConfig) -> Tuple[Graph, Optional[GraphFamily]]:
    """Graph from an edge-list path, or generated from a family string."""
    path = cfg.graph_path
    if path is not None:
        return read_edge_list(path), None
    family = parse_family(cfg.graph)
    return generate(family), family


def _require_family(family: Optional[GraphFamily], command: str) -> GraphFamily:
    if family is None:
        raise GraphError(f"'{command}' needs a graph family, not an edge-list file")
    return family


def _stability_label(report: SpectrumReport, d: int) -> str:
    try:
        return classify(report, d).label
    except NumericalFailure as e:
        logger.warning(f"Classification failed: {e}")
        return "failed"


# =============================================================================
# gen
# =============================================================================


def _run_gen(cfg: RunConfig, max_workers: int) -> int:
    g, family = load_graph(cfg)
    label = family_label(family) if family is not None else cfg.graph

    if cfg.resolved_format == "json":
        payload = {
            "meta": _header(cfg),
            "family": family_to_dict(family) if family is not None else None,
            "n": g.n,
            "edges": [list(e) for e in g.edges],
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        comments = [
            f"kura {__version__}",
            f"graph: {label}",
            f"config: {json.dumps(cfg.echo(), sort_keys=True)}",
        ]
        text = format_edge_list(g, comments)

    _emit(text, cfg.out)
    return EXIT_OK


# =============================================================================
# verify
# =============================================================================


def _oracle_spectrum(family: GraphFamily) -> Optional[np.ndarray]:
    """Circulant closed form of the reference spectrum, when one exists."""
    if isinstance(family, Cycle):
        ring = generate(family)
        return circulant_eigenvalues(jacobian(ring, torus_base(family).phases)[0])
    if isinstance(family, EyeGd):
        c6 = generate(Cycle(6))
        block = circulant_eigenvalues(jacobian(c6, torus_base(Cycle(6)).phases)[0])
        return np.sort(np.tile(block, family.d))
    return None


def verify_family(
    g: Graph, family: GraphFamily, tol: float, rng: np.random.Generator
) -> List[CheckResult]:
    """Run every applicable check on a family's splay torus.

    Args:
        g: Generated graph.
        family: Family g was generated from.
        tol: Residual tolerance on torus points.
        rng: Source of the random shift tuples.
    """
    results: List[CheckResult] = []
    base = torus_base(family)
    d = base.d
    ref = base.configuration(base.reference_shifts())

    connected = is_connected(g)
    results.append(
        CheckResult(
            name="connected",
            passed=connected,
            message="graph is connected" if connected else "graph is disconnected",
            metrics={"n": g.n, "edges": g.edge_count},
        )
    )

    conditions_hold = verify_lemma_conditions(g, base.partition, ref, BALANCE_TOL)
    results.append(
        CheckResult(
            name="torus_conditions",
            passed=conditions_hold,
            message=(
                f"parts are equilibria with balanced foreign neighbors (d={d})"
                if conditions_hold
                else "partition does not satisfy the torus conditions"
            ),
            metrics={"d": d, "part_sizes": [len(p) for p in base.partition.parts]},
        )
    )

    shifts = np.vstack([np.asarray(base.reference_shifts()), rng.uniform(0.0, TWO_PI, size=(RANDOM_SHIFT_COUNT, d))])
    configs = np.stack([base.configuration(s) for s in shifts])
    worst = float(np.max(residual(g, configs)))
    results.append(
        CheckResult(
            name="torus_residual",
            passed=worst <= tol,
            message=f"max residual {worst:.3e} over {len(shifts)} shift tuples",
            metrics={"max_residual": worst, "tol": tol},
        )
    )

    report = spectrum(jacobian(g, ref))
    stable = classify(report, d) == TransversallyStable(d)
    nonzero = report.nonzero()
    results.append(
        CheckResult(
            name="transversal_stability",
            passed=stable,
            message=f"{_stability_label(report, d)} at shifts {tuple(round(s, 6) for s in base.reference_shifts())}",
            metrics={
                "zero_count": report.zero_count,
                "positive_count": report.positive_count,
                "largest_nonzero": float(np.max(nonzero)) if nonzero.size else None,
            },
        )
    )

    if isinstance(family, EyeGd):
        expected = eye_reference_spectrum(family.d)
        err = float(np.max(np.abs(report.as_array() - expected)))
        results.append(
            CheckResult(
                name="reference_spectrum",
                passed=err <= SPECTRUM_MATCH_TOL,
                message=f"spectrum matches p(lambda)^{family.d} within {err:.3e}",
                metrics={"max_error": err},
            )
        )

    oracle = _oracle_spectrum(family)
    if oracle is not None:
        err = float(np.max(np.abs(report.as_array() - oracle)))
        results.append(
            CheckResult(
                name="circulant_oracle",
                passed=err <= CIRCULANT_MATCH_TOL,
                message=f"dense spectrum agrees with the circulant closed form within {err:.3e}",
                metrics={"max_error": err},
            )
        )
    return results


def _run_verify(cfg: RunConfig, max_workers: int) -> int:
    g, family = load_graph(cfg)
    fam = _require_family(family, cfg.command)
    results = verify_family(g, fam, cfg.tolerance(DEFAULT_TOL["verify"]), np.random.default_rng(cfg.seed or 0))
    passed = all(r.passed for r in results)

    if cfg.resolved_format == "json":
        payload = {
            "meta": _header(cfg),
            "graph": family_label(fam),
            "passed": passed,
            "checks": [r.to_dict() for r in results],
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        header = [f"kura {__version__}", f"config: {json.dumps(cfg.echo(), sort_keys=True)}"]
        text = format_report(f"kura verify {family_label(fam)}", results, header)
    _emit(text, cfg.out)

    if not passed:
        failed = [r.name for r in results if not r.passed]
        logger.warning(f"Verification failed: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


# =============================================================================
# scan
# =============================================================================


def _write_table(store: ResultStore, cfg: RunConfig) -> None:
    fmt = cfg.resolved_format
    if cfg.out is not None:
        store.flush_to_disk(fmt, cfg.out)
    elif fmt == "csv":
        click.echo(store.render_csv(), nl=False)
    else:
        click.echo(store.render_json(), nl=False)


def _run_scan(cfg: RunConfig, max_workers: int) -> int:
    g, family = load_graph(cfg)
    base = torus_base(_require_family(family, cfg.command))
    grid = shift_line(cfg.grid_values, base.d)
    points = torus_scan(g, base, grid, max_workers=max_workers)

    store = ResultStore(scan_columns(base.d, g.n), meta=cfg.echo())
    store.append_rows(scan_point_to_row(p, _stability_label(p.report, base.d)) for p in points)
    _write_table(store, cfg)
    return EXIT_OK


# =============================================================================
# equilibria
# =============================================================================


def _catalog(g: Graph) -> List[EquilibriumComponent]:
    try:
        return components_for_graph(g)
    except CatalogError:
        logger.debug("No component catalog for this graph; equilibria stay unlabeled")
        return []


def _run_equilibria(cfg: RunConfig, max_workers: int) -> int:
    g, _ = load_graph(cfg)
    rng = np.random.default_rng(cfg.seed)
    seeds = seed_configurations(g.n, cfg.trial_count(), rng)
    components = _catalog(g)
    result = search_equilibria(
        g,
        seeds,
        newton_tol=cfg.tolerance(DEFAULT_TOL["equilibria"]),
        max_workers=max_workers,
        components=components,
    )

    rows = []
    for eq in result.equilibria:
        c = canonicalize(eq)
        report = spectrum(jacobian(g, c))
        hits = matching_components(c, components, CENSUS_MEMBERSHIP_TOL)
        # Intersections of components are labeled with every name, e.g. "B1|B2"
        name = "|".join(comp.name for comp in hits) or None
        dim = max((comp.dimension for comp in hits), default=1)
        label = _stability_label(report, dim)
        rows.append(
            equilibrium_to_row(c, float(residual(g, c)), float(energy(g, c)), report, label, name)
        )

    meta = dict(cfg.echo())
    meta.update(
        {
            "seeds": len(seeds),
            "converged": len(result.refinements) - result.failed,
            "failed": result.failed,
        }
    )
    store = ResultStore(list(EQUILIBRIUM_SCHEMA), meta=meta)
    store.append_rows(rows)
    _write_table(store, cfg)
    return EXIT_OK


# =============================================================================
# hetero
# =============================================================================


def _run_hetero(cfg: RunConfig, max_workers: int) -> int:
    g, _ = load_graph(cfg)
    components = components_for_graph(g)
    dt, t_end = cfg.integration()
    h = probe(
        g,
        components,
        trials=cfg.trial_count(),
        integ=IntegratorParams(dt=dt, t_end=t_end),
        seed=cfg.seed or 0,
        membership_tol=cfg.tolerance(DEFAULT_TOL["hetero"]),
        max_workers=max_workers,
    )

    if cfg.resolved_format == "dot":
        comments = [f"kura {__version__}", f"config: {json.dumps(cfg.echo(), sort_keys=True)}"]
        _emit(export_dot(h, comments), cfg.out)
        if cfg.out is not None:
            _emit(export_json(h, _header(cfg)), str(Path(cfg.out).with_suffix(".json")))
    else:
        _emit(export_json(h, _header(cfg)), cfg.out)

    if h.misses and cfg.out is not None:
        _emit(export_misses(h, _header(cfg)), str(Path(cfg.out).with_suffix(".misses.json")))
    return EXIT_OK


# =============================================================================
# Dispatch
# =============================================================================

_COMMANDS: Dict[str, Callable[[RunConfig, int], int]] = {
    "gen": _run_gen,
    "verify": _run_verify,
    "scan": _run_scan,
    "equilibria": _run_equilibria,
    "hetero": _run_hetero,
}

# Checked in order; subclasses of KuramotoError come first
_NUMERICAL_ERRORS = (NumericalFailure, IntegrationError, NotEquilibriumError, AsymmetricMatrixError)


def run(cfg: RunConfig, max_workers: Optional[int] = None) -> int:
    """Execute one command and return its exit status.

    Errors are written as a JSON record on stderr and mapped to exit codes:
    numerical failures to 3, every other invalid input to 2.
    """
    workers = max_workers or MAX_WORKERS
    logger.info(f"kura {__version__} {cfg.command} --graph {cfg.graph} (workers={workers})")
    try:
        return _COMMANDS[cfg.command](cfg, workers)
    except _NUMERICAL_ERRORS as e:
        logger.error(f"{cfg.command} failed: {e}")
        _error_record(e, cfg.command)
        return EXIT_NUMERICAL
    except (KuramotoError, ValueError, OSError) as e:
        logger.error(f"{cfg.command} rejected input: {e}")
        _error_record(e, cfg.command)
        return EXIT_INVALID


def _validation_message(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "config"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def _invoke(command: str, **params: Any) -> None:
    """Validate flags into a RunConfig, run it and exit with its status."""
    ctx = click.get_current_context()
    try:
        cfg = RunConfig(command=command, **{k: v for k, v in params.items() if v is not None})
    except ValidationError as e:
        record = {"error": "ValidationError", "message": _validation_message(e), "command": command}
        click.echo(json.dumps(record), err=True)
        ctx.exit(EXIT_INVALID)
        return
    code = run(cfg)
    if code != EXIT_OK:
        ctx.exit(code)


# =============================================================================
# Click Commands
# =============================================================================


def _options(names: Sequence[str]) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    table: Dict[str, Callable[[Callable[..., Any]], Callable[..., Any]]] = {
        "graph": click.option("--graph", help="Graph family (e.g. eye:2, complete:4, h90) or edge-list path."),
        "grid": click.option("--grid", help="Shift grid start:end:count, end excluded (default 0:2pi:256)."),
        "dt": click.option("--dt", type=float, help="Integration step."),
        "t_end": click.option("--t-end", "t_end", type=float, help="Integration horizon."),
        "tol": click.option("--tol", type=float, help="Tolerance for the command's main check."),
        "seed": click.option("--seed", type=int, help="Random seed."),
        "trials": click.option("--trials", type=int, help="Seeds (equilibria) or perturbations per component (hetero)."),
        "out": click.option("--out", help="Output file; stdout when omitted."),
        "format": click.option("--format", "format", help="Output format."),
    }

    def decorate(f: Callable[..., Any]) -> Callable[..., Any]:
        for name in reversed(names):
            f = table[name](f)
        return f

    return decorate


@click.group()
@click.version_option(__version__, prog_name="kura")
def cli() -> None:
    """kura: equilibrium tori and connecting orbits of the Kuramoto model on graphs."""
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )


@cli.command()
@_options(["graph", "out", "format"])
def gen(**params: Any) -> None:
    """Write the graph as an edge list (--format edgelist|json)."""
    _invoke("gen", **params)


@cli.command()
@_options(["graph", "tol", "seed", "out", "format"])
def verify(**params: Any) -> None:
    """Check torus conditions and transversal stability (--format text|json)."""
    _invoke("verify", **params)


@cli.command()
@_options(["graph", "grid", "out", "format"])
def scan(**params: Any) -> None:
    """Spectra along (0, beta, ..., beta) for beta on the grid (--format csv|json|parquet)."""
    _invoke("scan", **params)


@cli.command()
@_options(["graph", "tol", "seed", "trials", "out", "format"])
def equilibria(**params: Any) -> None:
    """Seeded equilibrium search with classification (--format json|csv|parquet)."""
    _invoke("equilibria", **params)


@cli.command()
@_options(["graph", "dt", "t_end", "tol", "seed", "trials", "out", "format"])
def hetero(**params: Any) -> None:
    """Probe connections between cataloged components (--format dot|json)."""
    _invoke("hetero", **params)


def main() -> None:
    """Console entry point."""
    cli()


if __name__ == "__main__":
    main()
