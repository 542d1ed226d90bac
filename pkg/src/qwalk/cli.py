"""Command-line front end.

Every subcommand writes plot-ready data as CSV (default) or JSON. Reals carry
17 significant digits and nothing time-dependent is recorded, so repeated runs
with the same arguments produce byte-identical files.

Exit status: 0 success, 2 invalid configuration, 3 numerical failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from ._io import fmt_bool, fmt_real, write_csv
from .bloch import bloch_spectrum, bulk_probability, pbc_amplitude
from .dynamics import classical_fields, first_peak, quantum_fields, time_grid, transition_series
from .errors import DomainError, NumericalFailure, QWalkError
from .lattice import Boundary, LatticeSpec, build_adjacency, node_to_linear, special_nodes
from .limiting import (
    DEFAULT_ETA,
    asymmetry_scan,
    default_jobs,
    limiting_field,
    scaling_series,
)
from .spectral import decompose, eigenvalues, group_degeneracies

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("spectrum", "evolve", "limiting", "scan", "scaling", "bloch-compare")
LANDMARKS = ("corner", "middle", "opposite-corner")


class ConfigError(QWalkError):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass
class RunConfig:
    command: str
    sizes: list = field(default_factory=list)
    boundary: str = "open"
    sources: list = field(default_factory=lambda: ["corner"])
    observe: str = "source"
    kind: str = "quantum"
    times: list | None = None
    t_max: float | None = None
    dt: float = 0.01
    gamma: float = 1.0
    tau: float | None = None
    eta: float = DEFAULT_ETA
    n_min: int = 1
    n_max: int = 60
    mode: str = "transition"
    jobs: int = 1
    output: str = "-"
    format: str = "csv"

    def validate(self) -> None:
        problems = []
        if self.command not in COMMANDS:
            problems.append(f"unknown command {self.command!r}")
        if self.boundary not in ("open", "periodic"):
            problems.append(f"boundary must be open or periodic, got {self.boundary!r}")
        if self.format not in ("csv", "json"):
            problems.append(f"format must be csv or json, got {self.format!r}")
        if not self.gamma > 0:
            problems.append(f"gamma must be positive, got {self.gamma}")
        if self.tau is not None and not self.tau > 0:
            problems.append(f"tau must be positive, got {self.tau}")
        if not self.eta > 0:
            problems.append(f"eta must be positive, got {self.eta}")
        if self.jobs < 1:
            problems.append(f"jobs must be >= 1, got {self.jobs}")
        if self.command in ("spectrum", "evolve", "limiting", "bloch-compare"):
            if not self.sizes:
                problems.append("--n is required")
            for N in self.sizes:
                if N < 1:
                    problems.append(f"N must be positive, got {N}")
                elif self.boundary == "periodic" and N < 3:
                    problems.append(f"periodic boundaries need N >= 3, got {N}")
                else:
                    for s in self._source_labels():
                        try:
                            resolve_node(s, N)
                        except DomainError as exc:
                            problems.append(f"source: {exc}")
                    if self.command in ("evolve", "bloch-compare") and self.observe not in ("source", "field"):
                        try:
                            resolve_node(self.observe, N)
                        except DomainError as exc:
                            problems.append(f"observe: {exc}")
        if self.command == "evolve" and len(self.sizes) > 1:
            problems.append("evolve takes a single --n")
        if self.command == "evolve" and len(self.sources) > 1:
            problems.append("evolve takes a single --source")
        if self.command in ("evolve", "bloch-compare") and not (self.command == "bloch-compare" and self.mode == "spectra"):
            if self.times is not None:
                if any(not (t >= 0 and math.isfinite(t)) for t in self.times):
                    problems.append("times must be finite and nonnegative")
            elif self.t_max is None:
                problems.append("give either --times or --t-max (with --dt)")
            elif not (self.t_max >= 0 and self.dt > 0):
                problems.append(f"need t_max >= 0 and dt > 0, got {self.t_max}, {self.dt}")
        if self.command == "evolve" and self.kind not in ("quantum", "classical"):
            problems.append(f"kind must be quantum or classical, got {self.kind!r}")
        if self.command == "bloch-compare":
            if self.mode not in ("spectra", "transition"):
                problems.append(f"mode must be spectra or transition, got {self.mode!r}")
            if self.observe == "field":
                problems.append("bloch-compare observes single nodes only")
        if self.command in ("scan", "scaling"):
            if not 1 <= self.n_min <= self.n_max:
                problems.append(f"need 1 <= n-min <= n-max, got {self.n_min}..{self.n_max}")
        if self.command == "scaling" and len(odd_sizes(self.n_min, self.n_max)) < 3:
            problems.append("scaling needs at least 3 odd sizes in range")
        if problems:
            raise ConfigError(problems)

    def _source_labels(self):
        return self.sources if self.command in ("evolve", "limiting", "bloch-compare") else []

    def time_points(self) -> np.ndarray:
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        return time_grid(self.t_max, self.dt)


def odd_sizes(lo, hi):
    return [N for N in range(lo, hi + 1) if N % 2 == 1]


def resolve_node(label, N):
    """Landmark keyword or ``jx,jy`` to a node of the N x N lattice."""
    marks = special_nodes(N)
    if label == "corner":
        return marks.corner
    if label == "opposite-corner":
        return marks.opposite_corner
    if label == "middle":
        if marks.middle is None:
            raise DomainError(f"no middle node for even N={N}")
        return marks.middle
    try:
        jx, jy = (int(p) for p in str(label).split(","))
    except ValueError:
        raise DomainError(f"expected {', '.join(LANDMARKS)} or jx,jy; got {label!r}") from None
    node = (jx, jy)
    node_to_linear(node, N)
    return node


# ---------------------------------------------------------------- payloads


@dataclass
class Table:
    header: tuple
    rows: list
    extra: dict = field(default_factory=dict)
    comment: str | None = None


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return fmt_bool(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return fmt_real(x)
    return str(x)


def _spec(cfg, N):
    return LatticeSpec(N, Boundary(cfg.boundary), cfg.gamma)


def _label(node):
    return f"{node[0]},{node[1]}"


def cmd_spectrum(cfg):
    rows = []
    for N in cfg.sizes:
        vals = eigenvalues(build_adjacency(_spec(cfg, N)))
        rows.extend((N, i, v) for i, v in enumerate(vals))
    if len(cfg.sizes) == 1:
        return Table(("n", "lambda"), [r[1:] for r in rows])
    return Table(("N", "n", "lambda"), rows)


def cmd_evolve(cfg):
    N = cfg.sizes[0]
    src = resolve_node(cfg.sources[0], N)
    times = cfg.time_points()
    A = build_adjacency(_spec(cfg, N))
    if cfg.observe == "field":
        eig = decompose(A)
        fields = (quantum_fields if cfg.kind == "quantum" else classical_fields)(eig, src, times, cfg.gamma)
        rows = []
        for t, flat in zip(times, fields):
            for idx, v in enumerate(flat):
                jy, jx = divmod(idx, N)
                rows.append((t, jx + 1, jy + 1, 0.0 if -1e-12 < v < 0 else v))
        comment = f"N={N} source={_label(src)} kind={cfg.kind}"
        return Table(("t", "kx", "ky", "value"), rows, comment=comment)
    target = src if cfg.observe == "source" else resolve_node(cfg.observe, N)
    rows_needed = sorted({node_to_linear(src, N), node_to_linear(target, N)})
    if cfg.kind == "quantum":
        eig = decompose(A, rows=rows_needed)
        series = transition_series(eig, src, target, times, cfg.gamma)
    else:
        eig = decompose(A)
        series = classical_fields(eig, src, times, cfg.gamma)[:, node_to_linear(target, N)]
    extra = {}
    peak = first_peak(times, series) if times.size >= 3 else None
    if peak is not None:
        extra = {"first_peak_time": peak[0], "first_peak_value": peak[1]}
    comment = f"N={N} source={_label(src)} target={_label(target)} kind={cfg.kind}"
    if peak is not None:
        comment += f" first_peak_t={fmt_real(peak[0])} first_peak_value={fmt_real(peak[1])}"
    return Table(("t", "value"), list(zip(times, series)), extra, comment)


def cmd_limiting(cfg):
    rows = []
    for N in cfg.sizes:
        eig = decompose(build_adjacency(_spec(cfg, N)))
        part = group_degeneracies(eig, cfg.tau)
        for label in cfg.sources:
            src = resolve_node(label, N)
            flat = limiting_field(eig, part, src).linear()
            for idx, v in enumerate(flat):
                jy, jx = divmod(idx, N)
                rows.append((N, *src, jx + 1, jy + 1, max(v, 0.0)))
    return Table(("N", "jx", "jy", "kx", "ky", "chi"), rows)


def cmd_scan(cfg):
    records = asymmetry_scan(cfg.n_min, cfg.n_max, cfg.gamma, cfg.eta, cfg.tau, cfg.jobs,
                             upper_limit=max(60, cfg.n_max))
    rows = [(r.N, r.chi_cc, r.chi_oc, r.diff_scaled, r.asymmetric, r.tolerance_sensitive) for r in records]
    return Table(("N", "chi_cc", "chi_oc", "diff_scaled", "asymmetric", "tolerance_sensitive"), rows)


def cmd_scaling(cfg):
    res = scaling_series(odd_sizes(cfg.n_min, cfg.n_max), cfg.gamma, cfg.tau, cfg.jobs)
    rows = [(p.N, p.chi_oc, p.chi_mm, p.classical) for p in res.points]
    extra = {
        name: asdict(fit)
        for name, fit in (("fit_oc", res.fit_oc), ("fit_mm", res.fit_mm), ("fit_classical", res.fit_classical))
    }
    comment = " ".join(
        f"slope_{k}={fmt_real(f.slope)}"
        for k, f in (("oc", res.fit_oc), ("mm", res.fit_mm), ("classical", res.fit_classical))
    )
    return Table(("N", "chi_oc", "chi_mm", "classical"), rows, extra, comment)


def cmd_bloch_compare(cfg):
    if cfg.mode == "spectra":
        rows = []
        for N in cfg.sizes:
            finite = eigenvalues(build_adjacency(LatticeSpec(N, Boundary.OPEN, cfg.gamma)))
            bloch = bloch_spectrum(N)
            rows.extend((N, i, f, b, b - f) for i, (f, b) in enumerate(zip(finite, bloch)))
        return Table(("N", "n", "open", "bloch", "difference"), rows)
    times = cfg.time_points()
    rows = []
    for N in cfg.sizes:
        A = build_adjacency(LatticeSpec(N, Boundary.OPEN, cfg.gamma))
        for label in cfg.sources:
            src = resolve_node(label, N)
            target = src if cfg.observe == "source" else resolve_node(cfg.observe, N)
            eig = decompose(A, rows=sorted({node_to_linear(src, N), node_to_linear(target, N)}))
            finite = transition_series(eig, src, target, times, cfg.gamma)
            pbc = np.abs(pbc_amplitude(N, src, target, times, cfg.gamma)) ** 2 if N >= 3 else np.full(times.size, np.nan)
            bulk = bulk_probability(src, target, times, cfg.gamma)
            rows.extend((N, *src, *target, t, f, p, b) for t, f, p, b in zip(times, finite, pbc, bulk))
    return Table(("N", "jx", "jy", "kx", "ky", "t", "open", "pbc_same_n", "bulk"), rows)


HANDLERS = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "limiting": cmd_limiting,
    "scan": cmd_scan,
    "scaling": cmd_scaling,
    "bloch-compare": cmd_bloch_compare,
}


# ---------------------------------------------------------------- emitters


def _json(obj) -> str:
    # hand-rolled so every real is written with exactly the CSV formatting
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_real(obj) if math.isfinite(obj) else json.dumps(str(float(obj)))
    return json.dumps(str(obj))


def render(cfg: RunConfig, table: Table) -> str:
    if cfg.format == "csv":
        buf = io.StringIO()
        write_csv(buf, table.header, [[_cell(x) for x in r] for r in table.rows], comment=table.comment)
        return buf.getvalue()
    meta = asdict(cfg)
    meta["version"] = __version__
    meta["tolerances"] = {
        "tau": cfg.tau if cfg.tau is not None else "1e-8 * max(1, max|A|)",
        "eta": cfg.eta,
    }
    data = {"columns": list(table.header), "rows": [list(r) for r in table.rows]}
    data.update(table.extra)
    return _json({"meta": meta, "data": data}) + "\n"


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        table = HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print("configuration errors:", file=sys.stderr)
        for p in exc.problems:
            print(f"  - {p}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        where = f" (N={exc.size})" if exc.size is not None else ""
        print(f"numerical failure{where}: {exc}; residual {exc.residual:.3g}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(cfg, table)
    try:
        if cfg.output == "-":
            sys.stdout.write(text)
        else:
            with open(cfg.output, "w", newline="\n") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# ---------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qwalk", description="Quantum and classical walks on square lattices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--gamma", type=float, default=1.0, help="transmission rate (default 1)")
        p.add_argument("--output", "-o", default="-", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    def timing(p):
        p.add_argument("--t-max", type=float)
        p.add_argument("--dt", type=float, default=0.01)
        p.add_argument("--times", type=float, nargs="+", help="explicit time points instead of a grid")

    p = sub.add_parser("spectrum", help="ascending eigenvalues of the connectivity matrix")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--boundary", choices=("open", "periodic"), default="open")
    common(p)

    p = sub.add_parser("evolve", help="time series at one node, or whole-lattice snapshots")
    p.add_argument("--n", type=int, nargs=1, required=True)
    p.add_argument("--boundary", choices=("open", "periodic"), default="open")
    p.add_argument("--source", default="corner", help="corner, middle, opposite-corner or jx,jy")
    p.add_argument("--observe", default="source", help="node to follow, 'source', or 'field' for snapshots")
    p.add_argument("--kind", choices=("quantum", "classical"), default="quantum")
    timing(p)
    common(p)

    p = sub.add_parser("limiting", help="long-time averaged probabilities over the lattice")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--boundary", choices=("open", "periodic"), default="open")
    p.add_argument("--source", nargs="+", default=["corner"])
    p.add_argument("--tau", type=float, help="degeneracy tolerance (default 1e-8 * max(1, max|A|))")
    common(p)

    for name, helptext in (("scan", "corner/opposite-corner asymmetry for a range of N"),
                           ("scaling", "N dependence of limiting probabilities (odd N)")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--n-min", type=int, default=1 if name == "scan" else 9)
        p.add_argument("--n-max", type=int, default=60 if name == "scan" else 59)
        p.add_argument("--tau", type=float)
        if name == "scan":
            p.add_argument("--eta", type=float, default=DEFAULT_ETA, help="asymmetry threshold on |diff| N^2")
        p.add_argument("--jobs", type=int, help="worker processes (default $QWALK_JOBS or CPU count)")
        common(p)

    p = sub.add_parser("bloch-compare", help="open lattice against periodic and bulk baselines")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--mode", choices=("spectra", "transition"), default="transition")
    p.add_argument("--source", nargs="+", default=["corner"])
    p.add_argument("--observe", default="source")
    timing(p)
    common(p)
    return parser


def config_from_args(args) -> RunConfig:
    ns = vars(args)
    sources = ns.get("source", "corner")
    jobs = ns.get("jobs")
    return RunConfig(
        command=args.command,
        sizes=list(ns.get("n") or []),
        boundary=ns.get("boundary", "open"),
        sources=[sources] if isinstance(sources, str) else list(sources),
        observe=ns.get("observe", "source"),
        kind=ns.get("kind", "quantum"),
        times=ns.get("times"),
        t_max=ns.get("t_max"),
        dt=ns.get("dt", 0.01),
        gamma=args.gamma,
        tau=ns.get("tau"),
        eta=ns.get("eta", DEFAULT_ETA),
        n_min=ns.get("n_min", 1),
        n_max=ns.get("n_max", 60),
        mode=ns.get("mode", "transition"),
        jobs=jobs if jobs is not None else default_jobs(),
        output=args.output,
        format=args.format,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
