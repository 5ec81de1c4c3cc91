"""Single-point reports, 1-D scans and 2-D grids, plus their CSV/JSON writers."""

from concurrent.futures import ProcessPoolExecutor
import csv
from importlib import resources
import io
import json

import numpy as np

from .covariance import chain_covariance, chain_transfer_map
from .entanglement import certify, quantity_specs, reduced_pt_min_eigenvalue, twin_groups
from .errors import OpoCascadeError
from .linalg import symplectic_spectrum
from .opo import commutation_residual

REPORT_CSV_HEADER = (
    "kind", "key", "subsystem", "transposed", "nu_min", "log_negativity", "entangled",
)
REGIONS = ("twins-entangled", "pump-twinsA-entangled", "both", "neither")


def fmt_float(x):
    return f"{x:.17g}"


def single_report(config):
    """Full entanglement report for the chain described by ``config``."""
    spec = config.chain_spec()
    params = spec.opo_params()
    V = chain_covariance(spec)
    report = certify(V, tol=config.entangle_tol, purity_tol=config.purity_tol)
    doc = {
        "parameters": config.summary(),
        "derived": {
            "sigma": [p.sigma for p in params],
            "omega_rel": [p.omega_rel for p in params],
            "beta": [p.beta for p in params],
            "reflected_power_ratio": [p.reflected_power_ratio for p in params],
            "commutation_residual": commutation_residual(chain_transfer_map(spec)),
        },
    }
    doc.update(report.to_dict())
    return doc, report, V


def report_rows(report):
    rows = []
    for r in report.partitions:
        rows.append(
            ["bipartition", str(r.partition), " ".join(report.modes), " ".join(r.partition.side_a),
             fmt_float(r.nu_min), fmt_float(r.log_negativity), str(r.entangled).lower()]
        )
    for r in report.reduced:
        rows.append(
            ["reduced", r.key, " ".join(r.subsystem), " ".join(r.transposed),
             fmt_float(r.nu_min), fmt_float(r.log_negativity), str(r.entangled).lower()]
        )
    return rows


def scan_columns(config):
    modes = config.modes()
    cols = [config.scan.param, "status"]
    cols += [f"sigma_{k + 1}" for k in range(config.n_opos)]
    cols += [key for key, _, _ in quantity_specs(modes)]
    cols += ["nu_full_min", "nu_full_max", "purity_deviation"]
    return cols


def evaluate_scan_point(config):
    """Row values (floats or None) for one point; errors become a status marker."""
    modes = config.modes()
    specs = quantity_specs(modes)
    row = {"status": "ok"}
    try:
        spec = config.chain_spec()
        sigmas = spec.derived_sigmas()
        V = chain_covariance(spec)
        for k, s in enumerate(sigmas, start=1):
            row[f"sigma_{k}"] = s
        for key, kept, transposed in specs:
            row[key] = reduced_pt_min_eigenvalue(V, kept, transposed)
        nus = symplectic_spectrum(V)
        row["nu_full_min"] = float(nus[0])
        row["nu_full_max"] = float(nus[-1])
        row["purity_deviation"] = float(np.abs(nus - 1.0).max())
    except OpoCascadeError as exc:
        row = {"status": f"error:{type(exc).__name__}"}
    return row


def _evaluate_many(configs, jobs, func):
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, configs, chunksize=max(1, len(configs) // (4 * jobs))))
    return [func(c) for c in configs]


def scan(config):
    """Evaluate the 1-D scan; returns ``(columns, rows)`` in scan order."""
    axis = config.scan
    values = axis.values()
    points = [config.with_param(axis.param, v) for v in values]
    results = _evaluate_many(points, config.jobs, evaluate_scan_point)
    cols = scan_columns(config)
    rows = []
    for v, res in zip(values, results):
        res = dict(res)
        res[axis.param] = v
        rows.append([res.get(c) for c in cols])
    return cols, rows


def _grid_keys(modes):
    groups = list(twin_groups(modes))
    x, y = groups[0], groups[1]
    return f"nu_{x}{y}_pt{x}", f"nu_{x}0_pt0"


def classify(nu_twins, nu_pump, tol):
    twins = nu_twins < 1.0 - tol
    pump = nu_pump < 1.0 - tol
    if twins and pump:
        return "both"
    if twins:
        return "twins-entangled"
    if pump:
        return "pump-twinsA-entangled"
    return "neither"


def evaluate_grid_point(config):
    modes = config.modes()
    key_twins, key_pump = _grid_keys(modes)
    wanted = {k: (kept, tr) for k, kept, tr in quantity_specs(modes) if k in (key_twins, key_pump)}
    try:
        V = chain_covariance(config.chain_spec())
        nu_t = reduced_pt_min_eigenvalue(V, *wanted[key_twins])
        nu_p = reduced_pt_min_eigenvalue(V, *wanted[key_pump])
    except OpoCascadeError as exc:
        return None, None, None, f"error:{type(exc).__name__}"
    return nu_t, nu_p, classify(nu_t, nu_p, config.entangle_tol), "ok"


def grid_columns(config):
    key_twins, key_pump = _grid_keys(config.modes())
    return ["x", "y", key_twins, key_pump, "region", "status"]


def grid(config):
    """Long-format grid: x follows ``scan_*``, y follows ``grid_*``; x varies fastest."""
    xs, ys = config.scan.values(), config.grid.values()
    points, coords = [], []
    for y in ys:
        for x in xs:
            points.append(config.with_param(config.scan.param, x).with_param(config.grid.param, y))
            coords.append((x, y))
    results = _evaluate_many(points, config.jobs, evaluate_grid_point)
    return grid_columns(config), [[x, y, *res] for (x, y), res in zip(coords, results)]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def write_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def output_schema():
    """JSON schema of the documents emitted with ``format = json``."""
    text = resources.files(__package__).joinpath("report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def write_json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def rows_as_records(columns, rows):
    return [dict(zip(columns, row)) for row in rows]
