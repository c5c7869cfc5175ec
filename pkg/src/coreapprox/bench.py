"""Benchmark harness: run the approximation on model games and tabulate metrics."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .approx import VertexSet, approximate_core, load_vertex_set
from .directions import DirectionScheme
from .errors import ConfigError, InternalSolverError
from .games import (MuseumMatrix, SavingsParams, TUGame, load_game, make_museum_game,
                    make_nonconvex_game, make_savings_game)
from .geometry import contains, convex_hull
from .lp import check_nonempty
from .metrics import evaluate, reference_spread
from .oracle import (MAX_NAIVE_PLAYERS, enumerate_vertices_naive, exact_core_membership,
                     saturation_reference)

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "model", "n", "scheme", "k", "runs", "epr_num_mean", "epr_den", "epr_std",
    "vr_mean", "vr_std", "rdc_mean", "rdc_std", "step1_time_mean_s",
    "hull_time_mean_s", "flags",
]
MODELS = ("savings", "nonconvex", "museum")


@dataclass
class ExperimentConfig:
    model: str
    n: int
    k_list: list
    scheme: str = "rand"
    seed: int = 0
    runs: int = 100
    compute_exact: bool = True
    out_path: str | None = None
    beta: float = 0.75
    perturbation: float = 1e-6
    stall_budget: int = 5000
    timing: bool = True
    workers: int = 1
    extras: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not (self.model in MODELS or str(self.model).startswith("file:")):
            raise ConfigError(f"model: expected one of {MODELS} or file:<path>, got {self.model!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"n: expected a positive integer, got {self.n!r}")
        if self.scheme not in ("det", "rand"):
            raise ConfigError(f"scheme: expected 'det' or 'rand', got {self.scheme!r}")
        if not isinstance(self.runs, int) or self.runs < 1:
            raise ConfigError(f"runs: must be a positive integer, got {self.runs!r}")
        ks = list(self.k_list)
        if not ks or any(not isinstance(k, int) or k < 1 for k in ks):
            raise ConfigError(f"k_list: expected positive integers, got {self.k_list!r}")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ConfigError(f"k_list: values must be strictly increasing, got {ks}")
        self.k_list = ks
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed: expected a nonnegative integer, got {self.seed!r}")
        if not 0 <= self.perturbation < 1e-3:
            raise ConfigError(f"perturbation: must lie in [0, 1e-3), got {self.perturbation!r}")
        if self.workers < 1:
            raise ConfigError("workers: must be at least 1")

    def scheme_obj(self) -> DirectionScheme:
        return DirectionScheme.parse(self.scheme, self.seed, self.perturbation)


def load_config(path) -> list[ExperimentConfig]:
    """Read a JSON config; list-valued ``n`` or ``scheme`` expand to a grid."""
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except ValueError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)} - {"extras"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    for key in ("model", "n", "k_list"):
        if key not in data:
            raise ConfigError(f"{key}: missing required field")
    ns = data["n"] if isinstance(data["n"], list) else [data["n"]]
    schemes = data.get("scheme", "rand")
    schemes = schemes if isinstance(schemes, list) else [schemes]
    out = []
    for n in ns:
        for scheme in schemes:
            cell = dict(data, n=n, scheme=scheme)
            try:
                out.append(ExperimentConfig(**cell))
            except TypeError as exc:
                raise ConfigError(str(exc)) from exc
    return out


def build_game(model: str, n: int, beta: float = 0.75) -> TUGame:
    if model == "savings":
        return make_savings_game(SavingsParams.benchmark(n))
    if model == "nonconvex":
        return make_nonconvex_game(n, beta)
    if model == "museum":
        return make_museum_game(MuseumMatrix.benchmark(n))
    if model.startswith("file:"):
        game = load_game(model[5:])
        if game.n != n:
            raise ConfigError(f"n: config says {n} but {model[5:]} has n={game.n}")
        return game
    raise ConfigError(f"model: unknown model {model!r}")


def reference_vertices(game: TUGame, stall_budget: int = 5000, seed: int = 0) -> VertexSet:
    """Naive enumeration when affordable, saturation otherwise."""
    if game.n <= MAX_NAIVE_PLAYERS:
        return enumerate_vertices_naive(game)
    return saturation_reference(game, stall_budget, seed)


def _run_cell(game, config, reference, ref_poly, spread, run):
    """Metrics of one run at every k of the config."""
    res = approximate_core(game, config.k_list[-1], config.scheme_obj(), stream=run,
                           snapshots=config.k_list)
    out = {}
    for k in config.k_list:
        snap = res.snapshots[k]
        t0 = time.perf_counter()
        poly = convex_hull(snap.vertices.points, total=game.worth)
        hull_time = time.perf_counter() - t0
        if reference is None:
            out[k] = (len(snap.vertices), None, None, snap.solve_time_s, hull_time, [],
                      snap.vertices.points.copy())
            continue
        m = evaluate(snap.vertices, reference, poly, ref_poly, snap.solve_time_s, spread)
        out[k] = (m.epr_num, m.vr, m.rdc, snap.solve_time_s, hull_time, m.notes,
                  snap.vertices.points.copy())
    return out


def _cell_args(args):
    return _run_cell(*args)


def run_experiment(config: ExperimentConfig, reference: VertexSet | None = None,
                   keep_points: bool = False) -> list[dict]:
    """One row per ``k`` with run-mean and run-std of the metrics.

    ``reference`` overrides the internally computed ground truth. With
    ``keep_points`` each row also carries the approximated vertex arrays of
    every run under ``"points"`` (not written to CSV).
    """
    game = build_game(config.model, config.n, config.beta)
    base = {"model": config.model, "n": config.n, "scheme": config.scheme,
            "runs": config.runs}
    if not check_nonempty(game):
        log.warning("core of %s is empty; no metrics reported", game.label)
        return [dict(base, k=k, epr_den=None, flags="EMPTY-CORE") for k in config.k_list]
    flags = []
    ref_poly = spread = None
    if reference is None and config.compute_exact:
        reference = reference_vertices(game, config.stall_budget, config.seed)
    if reference is not None:
        if reference.complete is False:
            flags.append("SATURATION-REFERENCE")
        ref_poly = convex_hull(reference.points, total=game.worth)
        spread = reference_spread(reference.points)
    else:
        flags.append("NO-REFERENCE")
    jobs = [(game, config, reference, ref_poly, spread, run) for run in range(config.runs)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            per_run = list(pool.map(_cell_args, jobs))
    else:
        per_run = [_run_cell(*job) for job in jobs]
    rows = []
    for k in config.k_list:
        cells = [r[k] for r in per_run]
        row = dict(base, k=k, epr_den=None if reference is None else len(reference))
        row["epr_num_mean"], row["epr_std"] = _mean_std([c[0] for c in cells])
        row["vr_mean"], row["vr_std"] = _mean_std([c[1] for c in cells])
        row["rdc_mean"], row["rdc_std"] = _mean_std([c[2] for c in cells])
        if config.timing:
            row["step1_time_mean_s"] = float(np.mean([c[3] for c in cells]))
            row["hull_time_mean_s"] = float(np.mean([c[4] for c in cells]))
        notes = sorted({note for c in cells for note in c[5]})
        rdcs = [c[2] for c in cells if c[2] is not None]
        if any(r > 1 + 1e-9 for r in rdcs):
            notes.append("RDC>1")
        row["flags"] = ";".join(flags + notes)
        if keep_points:
            row["points"] = [c[6] for c in cells]
        rows.append(row)
    return rows


def _mean_std(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    arr = np.asarray(vals, dtype=np.float64)
    return float(arr.mean()), float(arr.std(ddof=1)) if len(arr) > 1 else 0.0


def run_all(configs) -> list[dict]:
    rows = [row for cfg in configs for row in run_experiment(cfg)]
    order = {"det": 0, "rand": 1}
    return sorted(rows, key=lambda r: (r["n"], order[r["scheme"]], r["k"]))


def _fmt(value, digits=".6f"):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, digits)
    return str(value)


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        out = []
        for col in CSV_COLUMNS:
            val = row.get(col)
            if col == "flags":
                val = val or ""
            out.append(_fmt(val, ".3f" if col.endswith("_s") else ".6f"))
        writer.writerow(out)
    return buf.getvalue()


def _text_table(rows) -> str:
    header = ["|N|", "G", "k", "EPR", "VR", "RDC", "Time"]
    body = []
    for row in rows:
        if "EMPTY-CORE" in (row.get("flags") or ""):
            epr_txt = vr_txt = rdc_txt = "EMPTY-CORE"
        else:
            num, den = row.get("epr_num_mean"), row.get("epr_den")
            epr_txt = f"{num:.2f}/{float(den):.1f}" if den else _fmt(num, ".2f")
            vr_txt = _fmt(row.get("vr_mean"), ".4f") or "UNDEFINED"
            rdc_txt = _fmt(row.get("rdc_mean"), ".4f") or "UNDEFINED"
        body.append([str(row["n"]), "D" if row["scheme"] == "det" else "R", str(row["k"]),
                     epr_txt, vr_txt, rdc_txt, _fmt(row.get("step1_time_mean_s"), ".3f")])
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in [header] + body]
    return "\n".join(lines) + "\n"


def emit_table(rows, path=None, style: str = "csv") -> str:
    """Render rows as CSV or an aligned text table; write to ``path`` if given."""
    if style not in ("csv", "text"):
        raise ValueError(f"unknown table style {style!r}")
    text = _csv_text(rows) if style == "csv" else _text_table(rows)
    if path is not None:
        Path(path).write_text(text)
    return text


@dataclass
class Verdict:
    exact: bool
    approx: bool | None = None

    def lines(self):
        yield f"exact: {'IN' if self.exact else 'OUT'}"
        if self.approx is not None:
            yield f"approx: {'IN' if self.approx else 'OUT'}"


def check_allocation(game: TUGame, allocation, approx: VertexSet | None = None) -> Verdict:
    """Exact core membership and, optionally, membership in an approximated core."""
    x = np.asarray(allocation, dtype=np.float64)
    if x.shape != (game.n,):
        raise ConfigError(f"allocation has {x.size} entries but the game has {game.n} players")
    verdict = Verdict(exact_core_membership(game, x))
    if approx is not None:
        if approx.n != game.n:
            raise ConfigError(f"approximation has n={approx.n} but the game has n={game.n}")
        verdict.approx = len(approx) > 0 and contains(approx.points, x)
        if verdict.approx and not verdict.exact:
            raise InternalSolverError(
                "allocation is inside the approximated core but outside the core"
            )
    return verdict


def check_allocation_files(game_path, allocation, approx_path=None) -> Verdict:
    game = load_game(game_path)
    approx = load_vertex_set(approx_path) if approx_path else None
    return check_allocation(game, allocation, approx)
