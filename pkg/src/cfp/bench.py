"""Benchmark harness: method suites over random ellipsoid instances.

Runs are distributed over a thread pool, one task per instance, and the rows
are put back into ``(n, m, index, method)`` order before anything is
returned, so output never depends on scheduling. The block kernels release
the GIL, so threads do overlap on multi-core machines.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyResult, InsufficientData, ParseError
from .instances import derive_seed, gen_ellipsoids
from .solvers import Method, SolverConfig, Status, solve

CSV_HEADER = ("instance_id", "n", "m", "method", "iterations", "wall_time_s", "final_gap", "status")
ALL_METHODS = (Method.CARM, Method.CRM, Method.MAAP, Method.MAP)


@dataclass(frozen=True)
class SuiteConfig:
    dims: tuple = (10, 50)
    set_counts: tuple = (5, 10)
    instances_per_cell: int = 5
    base_seed: int = 0
    eps: float = 1e-6
    max_iter: int = 50000
    methods: tuple = ALL_METHODS
    threads: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        object.__setattr__(self, "set_counts", tuple(int(m) for m in self.set_counts))
        object.__setattr__(self, "methods", tuple(Method(s) for s in self.methods))
        if not self.dims or not self.set_counts or not self.methods:
            raise ValueError("dims, set_counts and methods must be nonempty")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("duplicate methods")
        if self.instances_per_cell < 1:
            raise ValueError("instances_per_cell must be at least 1")

    @classmethod
    def full_protocol(cls, **kw):
        return cls(dims=(10, 50, 100, 200), set_counts=(5, 10, 20, 50), instances_per_cell=10, **kw)


@dataclass(frozen=True)
class Row:
    instance_id: str
    n: int
    m: int
    method: Method
    iterations: int
    wall_time_s: float
    final_gap: float
    status: Status

    def fields(self):
        return (
            self.instance_id,
            str(self.n),
            str(self.m),
            self.method.value,
            str(self.iterations),
            repr(self.wall_time_s),
            repr(self.final_gap),
            self.status.value,
        )


@dataclass
class BenchResult:
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def methods(self):
        return list(dict.fromkeys(r.method for r in self.rows))

    def by_instance(self):
        out = {}
        for r in self.rows:
            out.setdefault(r.instance_id, {})[r.method] = r
        return out


def instance_id(n, m, index):
    return f"n{n}-m{m}-{index:03d}"


def resolve_threads(threads=None):
    if threads is None:
        env = os.environ.get("CFP_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError("thread count must be positive")
    return threads


def _run_instance(cfg, n, m, index):
    inst = gen_ellipsoids(n, m, derive_seed(cfg.base_seed, n, m, index))
    problem = inst.problem()
    x0 = inst.lifted_x0()
    rows = []
    for method in cfg.methods:
        rec = solve(problem, SolverConfig(method, cfg.eps, cfg.max_iter), x0)
        rows.append(
            Row(instance_id(n, m, index), n, m, method, rec.iterations, rec.wall_time, float(rec.final_gap), rec.status)
        )
    return rows


def run_suite(cfg):
    """Run every method on every instance of the suite."""
    jobs = [(n, m, i) for n in cfg.dims for m in cfg.set_counts for i in range(cfg.instances_per_cell)]
    threads = resolve_threads(cfg.threads)
    if threads == 1:
        chunks = [_run_instance(cfg, *job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda job: _run_instance(cfg, *job), jobs))
    return BenchResult([row for chunk in chunks for row in chunk])


def _stats(values):
    a = np.asarray(values, dtype=np.float64)
    return {"mean": float(a.mean()), "max": float(a.max()), "min": float(a.min()), "std": float(a.std())}


def summarize(result):
    """Per-method mean/max/min/std of iterations and time over converged rows.

    ``std`` is the population standard deviation. Methods without converged
    runs get ``None`` statistics.
    """
    if not result.rows:
        raise EmptyResult("no rows to summarize")
    table = {}
    for method in result.methods():
        rows = [r for r in result.rows if r.method is method]
        ok = [r for r in rows if r.status is Status.CONVERGED]
        table[method] = {
            "runs": len(rows),
            "converged": len(ok),
            "not_converged": len(rows) - len(ok),
            "iterations": _stats([r.iterations for r in ok]) if ok else None,
            "wall_time_s": _stats([r.wall_time_s for r in ok]) if ok else None,
        }
    return table


@dataclass
class Profile:
    """Performance-profile data: ``ratios[s]`` holds r_{p,s} over problems p."""

    measure: str
    problems: list
    ratios: dict

    @property
    def breakpoints(self):
        finite = np.concatenate([r[np.isfinite(r)] for r in self.ratios.values()])
        return np.unique(np.concatenate([[1.0], finite]))

    def rho(self, method, tau):
        r = self.ratios[Method(method)]
        tau = np.asarray(tau, dtype=np.float64)
        return (r[None, :] <= tau.reshape(-1, 1)).mean(axis=1).reshape(tau.shape)

    def curves(self):
        taus = self.breakpoints
        return taus, {s: self.rho(s, taus) for s in self.ratios}

    def dominates(self, method):
        """True when ``rho_method(tau) >= rho_other(tau)`` at every breakpoint."""
        taus, curves = self.curves()
        mine = curves[Method(method)]
        return all(np.all(mine >= c) for s, c in curves.items() if s is not Method(method))


def perf_profile(result, measure="time"):
    """Dolan-Moré profile over the instances of `result`; failed runs get ratio inf."""
    key = {"time": "wall_time_s", "iterations": "iterations"}.get(measure)
    if key is None:
        raise ValueError("measure must be 'time' or 'iterations'")
    grouped = result.by_instance()
    methods = result.methods()
    if not grouped or not methods:
        raise InsufficientData("no instances in the result")
    problems = sorted(grouped)
    values = np.full((len(problems), len(methods)), np.inf)
    for p, pid in enumerate(problems):
        for s, method in enumerate(methods):
            row = grouped[pid].get(method)
            if row is not None and row.status is Status.CONVERGED:
                # iterations can be 0; shift so ratios stay defined
                values[p, s] = getattr(row, key) + (1 if key == "iterations" else 0)
    best = values.min(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(np.isfinite(values), values / best, np.inf)
    return Profile(measure, problems, {m: ratios[:, s] for s, m in enumerate(methods)})


def write_csv(result, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in result.rows:
        w.writerow(r.fields())


def to_csv(result):
    buf = io.StringIO()
    write_csv(result, buf)
    return buf.getvalue()


def parse_csv(text):
    """Inverse of :func:`to_csv`."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty results file") from None
    if tuple(header) != CSV_HEADER:
        raise ParseError(f"line 1: unexpected header {header!r}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) != len(CSV_HEADER):
            raise ParseError(f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(rec)}")
        try:
            iid, n, m, method, iters, wall, gap, status = rec
            rows.append(Row(iid, int(n), int(m), Method(method), int(iters), float(wall), float(gap), Status(status)))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return BenchResult(rows)


def profile_tsv(profile):
    """Profile curves as TSV; the ``tau`` column holds log2 of the ratio."""
    taus, curves = profile.curves()
    methods = list(curves)
    lines = ["\t".join(["tau"] + [m.value for m in methods])]
    for k, tau in enumerate(taus):
        lines.append("\t".join([f"{math.log2(tau):.6g}"] + [f"{curves[m][k]:.6g}" for m in methods]))
    return "\n".join(lines) + "\n"


_COLORS = {Method.CARM: "#d62728", Method.CRM: "#1f77b4", Method.MAAP: "#2ca02c", Method.MAP: "#9467bd"}


def profile_svg(profile, width=640, height=400):
    """Step curves of the profile on a log2 tau axis, as a standalone SVG."""
    taus, curves = profile.curves()
    x = np.log2(taus)
    xmax = max(float(x[-1]), 1.0) * 1.05
    left, right, top, bottom = 60, 130, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def px(v):
        return left + pw * v / xmax

    def py(v):
        return top + ph * (1.0 - v)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle">log2(tau) ({profile.measure})</text>',
        f'<text x="15" y="{top + ph / 2}" transform="rotate(-90 15 {top + ph / 2})" text-anchor="middle">fraction of problems</text>',
    ]
    for v in (0.0, 0.5, 1.0):
        parts.append(f'<text x="{left - 6}" y="{py(v) + 4:.1f}" text-anchor="end">{v:g}</text>')
    for k in range(int(math.floor(xmax)) + 1):
        parts.append(f'<text x="{px(k):.1f}" y="{top + ph + 16}" text-anchor="middle">{k}</text>')
    for i, (method, rho) in enumerate(curves.items()):
        pts = []
        prev = 0.0
        for xv, rv in zip(x, rho):
            pts.append(f"{px(xv):.1f},{py(prev):.1f}")
            pts.append(f"{px(xv):.1f},{py(rv):.1f}")
            prev = rv
        pts.append(f"{px(xmax):.1f},{py(prev):.1f}")
        color = _COLORS.get(method, "black")
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{" ".join(pts)}"/>')
        ly = top + 15 + 18 * i
        parts.append(f'<line x1="{width - right + 10}" y1="{ly}" x2="{width - right + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{width - right + 36}" y="{ly + 4}">{method.label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
