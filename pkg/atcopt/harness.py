"""harness.py -- task handlers and study drivers for AtC convergence studies

A study runs one reference solve, then one task per ladder entry.  Tasks are
dicts with keys:

    config (config.StudyConfig): study configuration
    R_core (int): ladder entry
    model (potential.SiteModel): site potential
    kappa (int or None): continuum exponent (None for the geometry section)
    reference (geometry.LatticeField or None): reference solution covering Omega
    analysis (bool): whether to measure norm-equivalence constants

Task handlers return one row (dict) each; rows are written in ladder order.

Output files (in the study output directory):

    study.csv       R_core, r_c, atom_dofs, fe_dofs, J, broken_error,
                    sup_cosine, wall_time, status
    study.dat       gnuplot columns R_core r_c broken_error J continuum_error,
                    fitted slopes as comments
    continuum.csv   continuum-error study
    analysis.csv    norm-equivalence study

- 06/15/26 (ams): Created.
- 06/29/26 (ams): Record solver failures in-row.
- 07/06/26 (ams): Add continuum-error and norm-equivalence studies.
- 08/03/26 (ams): Run ladder entries in a worker pool.
- 08/24/26 (ams): Norm-equivalence study on its own kappa, linearized at the predictor.
- 10/18/26 (ams): Record mesh, reference and analysis failures per phase.
"""

from __future__ import annotations

import concurrent.futures
import csv
import logging
import math
import os

import numpy as np

from . import (
    analysis,
    atomistic,
    constants,
    coupling,
    environ,
    exception,
    linalg,
    mesh,
    modes,
    utils,
)

logger = logging.getLogger(__name__)

k_study_columns = (
    "R_core", "r_c", "atom_dofs", "fe_dofs", "J", "broken_error", "sup_cosine", "wall_time", "status",
)
k_continuum_columns = (
    "R_core", "r_c", "fe_dofs", "continuum_error", "reference_mismatch", "wall_time", "status",
)
k_analysis_columns = (
    "R_core", "sup_cosine", "margin", "control_atomistic", "control_continuum",
    "columns_atomistic", "columns_continuum", "wall_time", "status",
)
k_plot_columns = ("R_core", "r_c", "broken_error", "J", "continuum_error")

_measurements = (
    "J", "broken_error", "sup_cosine", "continuum_error", "reference_mismatch", "margin",
    "control_atomistic", "control_continuum",
)


################################################################
# slope fits
################################################################

def fit_slope(points, loglog=True):
    """Least-squares line through points, optionally in log-log coordinates.

    Arguments:
        points (iterable of tuple): (x, y) pairs
        loglog (bool, optional): fit log y against log x

    Returns:
        (tuple): (slope, intercept, R^2)

    Raises:
        ValueError: fewer than 3 points, nonpositive values in log-log mode,
            or degenerate abscissa
    """
    points = np.asarray(list(points), dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("points must be (x, y) pairs")
    if len(points) < 3:
        raise ValueError("fit_slope needs at least 3 points, got {}".format(len(points)))
    (x, y) = points.T
    if loglog:
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValueError("log-log fit needs positive coordinates")
        (x, y) = (np.log(x), np.log(y))
    if np.ptp(x) == 0:
        raise ValueError("degenerate abscissa: all x equal")
    (slope, intercept) = np.polyfit(x, y, 1)
    residual = y-(slope*x+intercept)
    total = float(np.sum((y-y.mean())**2))
    r2 = 1.0-float(residual @ residual)/total if total > 0 else 1.0
    return (float(slope), float(intercept), r2)


def study_slopes(rows, names=("broken_error", "continuum_error")):
    """Fitted log-log slopes against R_core for successful rows.

    Returns:
        (dict): name -> (slope, intercept, R^2), for names with at least 3
            usable points
    """
    slopes = {}
    for name in names:
        points = [
            (row["R_core"], row[name]) for row in rows
            if row["status"] is modes.RowStatus.kOk and np.isfinite(row.get(name, math.nan)) and row[name] > 0
        ]
        if len(points) >= 3:
            slopes[name] = fit_slope(points)
            logger.info("study: slope %s %.3f R2 %.4f", name, slopes[name][0], slopes[name][2])
    return slopes


################################################################
# output
################################################################

def output_directory(cfg, out_dir=None):
    """Create and return the study output directory."""
    out_dir = environ.resolve_output_dir(out_dir) or cfg.study.out
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def write_rows(path, columns, rows):
    """Write rows as CSV with a header line; rows may be any iterable.

    Returns:
        (list of dict): rows written
    """
    written = []
    with open(path, "w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([utils.field_string(row.get(column, math.nan)) for column in columns])
            stream.flush()
            written.append(row)
    return written


def write_plot_data(path, rows, slopes):
    """Write gnuplot column data with fitted slopes as comments."""
    with open(path, "w", encoding="utf-8") as stream:
        stream.write("# {}\n".format(" ".join(k_plot_columns)))
        for (name, (slope, _, r2)) in slopes.items():
            stream.write("# slope {} {:.6f} R2 {:.6f}\n".format(name, slope, r2))
        for row in rows:
            stream.write(" ".join(utils.field_string(row.get(column, math.nan)) for column in k_plot_columns)+"\n")


################################################################
# task handlers
################################################################

def _new_row(task):
    cfg = task["config"]
    geom = cfg.domains(task["R_core"], task.get("kappa"))
    row = {"R_core": task["R_core"], "r_c": geom.r_c, "status": modes.RowStatus.kOk}
    row.update({name: math.nan for name in _measurements})
    return (geom, row)


def _problem(task, geom):
    cfg = task["config"]
    fe_mesh = mesh.build_mesh(geom, cfg.mesh.grading_exponent, cfg.mesh.min_angle)
    return coupling.CouplingProblem(geom, task["model"], fe_mesh, cfg.solver)


def _record_failure(row, err, names=_measurements, phase="solve"):
    """Mark a row failed in one phase; measurements of other phases are kept.

    The first failure sets the status.
    """
    if row["status"] is modes.RowStatus.kOk:
        if isinstance(err, exception.OuterConvergenceError):
            row["status"] = modes.RowStatus.kOuterDiverged
        else:
            row["status"] = modes.RowStatus.kSubproblemFailed
    for name in names:
        row[name] = math.nan
    logger.warning("study: R_core %d %s failed (%s): %s", row["R_core"], phase, row["status"].value, err)


def _solve_phase(row, task, problem):
    try:
        state = coupling.solve_atc(problem, task["config"].solver.init)
        row["J"] = state.J
        row["outer_iterations"] = state.iterations
        row["broken_error"] = coupling.broken_error(problem.geom, state.u_a, state.u_c, task["reference"])
    except exception.AtcError as err:
        _record_failure(row, err, ("J", "broken_error"), "solve")


def _reference_phase(row, task, problem):
    """Continuum solve with reference traces; returns (base_a, u_con) or None."""
    reference = task["reference"]
    try:
        u_con = coupling.solve_continuum_reference(problem, reference)
        base_a = reference.restrict(problem.atomistic.index)
        row["continuum_error"] = coupling.continuum_error(u_con, reference)
        row["reference_mismatch"] = math.sqrt(2*problem.overlap.mismatch(base_a.values, u_con.values))
    except exception.AtcError as err:
        _record_failure(row, err, ("continuum_error", "reference_mismatch"), "reference")
        return None
    return (base_a, u_con)


def task_handler_atc(task):
    """Task handler for one ladder entry of the convergence study.

    The entry runs in phases: mesh, AtC solve, continuum reference, analysis.
    A failed phase leaves its own measurements nan; later phases still run
    unless they need its results.

    Arguments:
        task (dict): as described in module docstring

    Returns:
        (dict): study row
    """
    (geom, row) = _new_row(task)
    with utils.Stopwatch() as timer:
        try:
            problem = _problem(task, geom)
        except exception.AtcError as err:
            _record_failure(row, err, phase="mesh")
            problem = None
        if problem is not None:
            row["atom_dofs"] = problem.atomistic.n_dofs
            row["fe_dofs"] = constants.k_dim*len(problem.mesh.nodes)
            _solve_phase(row, task, problem)
            bases = _reference_phase(row, task, problem)
            if task.get("analysis") and bases is not None:
                try:
                    row["sup_cosine"] = analysis.norm_equivalence(problem, *bases)["sup_cosine"]
                except exception.AtcError as err:
                    _record_failure(row, err, ("sup_cosine",), "analysis")
    row["wall_time"] = timer.elapsed
    logger.info(
        "study: R_core %d status %s J %s broken error %s", row["R_core"], row["status"].value,
        utils.float_string(row["J"]), utils.float_string(row["broken_error"]),
    )
    return row


def task_handler_continuum_error(task):
    """Task handler for one ladder entry of the continuum-error study."""
    (geom, row) = _new_row(task)
    reference = task["reference"]
    with utils.Stopwatch() as timer:
        try:
            problem = _problem(task, geom)
            row["fe_dofs"] = constants.k_dim*len(problem.mesh.nodes)
            u_con = coupling.solve_continuum_reference(problem, reference)
            base_a = reference.restrict(problem.atomistic.index)
            row["continuum_error"] = coupling.continuum_error(u_con, reference)
            row["reference_mismatch"] = math.sqrt(2*problem.overlap.mismatch(base_a.values, u_con.values))
        except exception.AtcError as err:
            _record_failure(row, err, phase="reference")
    row["wall_time"] = timer.elapsed
    return row


def task_handler_norm_equivalence(task):
    """Task handler for one ladder entry of the norm-equivalence study.

    Bases are linearized at the predictor state, so no reference is needed.
    """
    (geom, row) = _new_row(task)
    with utils.Stopwatch() as timer:
        try:
            problem = _problem(task, geom)
            controls = coupling.initial_controls(problem, modes.ControlInit.kContinuumPredictor)
            state = problem.evaluate(controls, continuation=True)
            row.update(analysis.norm_equivalence(problem, state.u_a, state.u_c))
        except exception.AtcError as err:
            _record_failure(row, err, phase="analysis")
    row["wall_time"] = timer.elapsed
    return row


################################################################
# study drivers
################################################################

def run_tasks(handler, tasks, workers=1):
    """Run task handlers, yielding results in task order.

    Arguments:
        handler (callable): task handler
        tasks (list of dict): tasks
        workers (int, optional): pool size; 1 runs serially
    """
    if workers <= 1 or len(tasks) <= 1:
        for task in tasks:
            yield handler(task)
        return
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(handler, task) for task in tasks]
        for future in futures:
            yield future.result()


def solve_study_reference(cfg, model, ladder):
    """Reference solution at N = reference_factor * max r_c over a ladder.

    Raises:
        exception.SolverError: if the reference solve fails
    """
    N = cfg.reference_radius(ladder)
    s = cfg.solver
    with utils.Stopwatch() as timer:
        reference = atomistic.solve_reference(model, N, tol=s.tol_newton, max_iter=s.max_newton)
    logger.info("study: reference N %d solved in %.1f s", N, timer.elapsed)
    return reference


def _prepare(cfg, ladder):
    linalg.max_direct_dofs = cfg.solver.direct_limit
    model = cfg.potential.site_model()
    reference = solve_study_reference(cfg, model, ladder)
    return (model, reference)


def _tasks(cfg, ladder, model, reference, kappa=None):
    return [
        {
            "config": cfg,
            "R_core": R_core,
            "kappa": kappa,
            "model": model,
            "reference": reference,
            "analysis": R_core in cfg.study.analysis_ladder,
        }
        for R_core in ladder
    ]


def run_convergence_study(cfg, out_dir=None):
    """AtC solves and errors across the geometry ladder.

    Writes study.csv (rows in ladder order, each as soon as it and all
    preceding rows are done) and study.dat.

    Arguments:
        cfg (config.StudyConfig): validated configuration
        out_dir (str, optional): output directory (default from config)

    Returns:
        (tuple): (rows, slopes)
    """
    out_dir = output_directory(cfg, out_dir)
    ladder = tuple(cfg.geometry.ladder)
    (model, reference) = _prepare(cfg, ladder)
    workers = environ.worker_count(cfg.study.workers)
    logger.info("study: ladder %s workers %d", utils.ladder_string(ladder), workers)
    rows = write_rows(
        os.path.join(out_dir, "study.csv"), k_study_columns,
        run_tasks(task_handler_atc, _tasks(cfg, ladder, model, reference), workers),
    )
    slopes = study_slopes(rows)
    write_plot_data(os.path.join(out_dir, "study.dat"), rows, slopes)
    return (rows, slopes)


def run_continuum_error_study(cfg, out_dir=None):
    """Continuum error with reference traces across the ladder; writes continuum.csv.

    Returns:
        (tuple): (rows, slopes)
    """
    out_dir = output_directory(cfg, out_dir)
    ladder = tuple(cfg.geometry.ladder)
    (model, reference) = _prepare(cfg, ladder)
    rows = write_rows(
        os.path.join(out_dir, "continuum.csv"), k_continuum_columns,
        run_tasks(
            task_handler_continuum_error, _tasks(cfg, ladder, model, reference),
            environ.worker_count(cfg.study.workers),
        ),
    )
    return (rows, study_slopes(rows, names=("continuum_error",)))


def run_norm_equivalence_study(cfg, out_dir=None):
    """Sup-cosine and overlap-control constants on the analysis ladder; writes analysis.csv.

    Returns:
        (list of dict): rows
    """
    out_dir = output_directory(cfg, out_dir)
    ladder = tuple(cfg.study.analysis_ladder)
    linalg.max_direct_dofs = cfg.solver.direct_limit
    model = cfg.potential.site_model()
    rows = write_rows(
        os.path.join(out_dir, "analysis.csv"), k_analysis_columns,
        run_tasks(
            task_handler_norm_equivalence, _tasks(cfg, ladder, model, None, cfg.study.analysis_kappa),
            environ.worker_count(cfg.study.workers),
        ),
    )
    for row in rows:
        logger.info(
            "analysis: R_core %d c %s margin %s", row["R_core"],
            utils.float_string(row["sup_cosine"]), utils.float_string(row["margin"]),
        )
    return rows


# study kinds selectable from the CLI
study_drivers = {
    "convergence": run_convergence_study,
    "continuum": run_continuum_error_study,
    "norms": run_norm_equivalence_study,
}
