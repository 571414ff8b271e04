"""Monte Carlo coverage and expected-length studies.

A :class:`SimScenario` describes one cell of a coverage table: a data
generating family, group sizes, locations, the true common CV and the
methods to compare.  :func:`run_study` simulates it and :func:`emit_table`
renders results either as CSV or as markdown tables laid out with a CP row
followed by an EL row for every vector of sample sizes.

Every replication draws from streams keyed by the master seed, a hash of the
scenario and the replication index, so results do not depend on how the
replications are distributed over worker processes.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import csv
import hashlib
import io
import json
import math
import sys

import numpy as np

from . import gpv, model, mslr
from .dist import RngStream, weibull, weibull_shape_for_cv
from .errors import CVInferError, DataError

SCHEMA_VERSION = 1
FAMILIES = ("normal", "weibull")
ALL_METHODS = ("MSLR", "SLR", "GV1", "GV2", "GV3")
DEFAULT_METHODS = ("MSLR", "GV1", "GV2", "GV3")
TAUS = (0.1, 0.2, 0.3, 0.35)

N_ROWS = {
    3: ["4,4,4", "4,5,6", "6,5,4", "5,5,10", "10,5,5", "4,5,20", "20,5,4", "7,7,7", "7,8,9"],
    5: ["4,4,4,4,4", "4,4,5,5,6", "6,5,5,4,4", "5,5,5,5,10", "10,5,5,5,5",
        "4,4,5,5,20", "20,5,5,4,4", "7,7,7,7,7", "7,7,8,8,9"],
}
N_ROWS[10] = [row + "," + row for row in N_ROWS[5]]
LOCATIONS = {
    3: (20.0, 10.0, 10.0),
    5: (50.0, 40.0, 30.0, 20.0, 10.0),
    10: (50.0, 40.0, 30.0, 20.0, 10.0) * 2,
}
TABLES = {("normal", 3): "table1", ("normal", 5): "table2", ("normal", 10): "table3",
          ("weibull", 3): "table4", ("weibull", 5): "table5", ("weibull", 10): "table6"}


class ScenarioError(DataError):
    pass


@dataclass(frozen=True)
class SimScenario:
    family: str
    n: tuple
    location: tuple
    tau: float
    reps: int = 10_000
    level: float = 0.95
    methods: tuple = DEFAULT_METHODS
    gpv_draws: int = 5000
    gv1_variant: str = gpv.GV1Variant.SQRT_N.value
    master_seed: int = 0
    table: str = ""

    def __post_init__(self):
        family = str(self.family).lower()
        if family not in FAMILIES:
            raise ScenarioError(f"family must be one of {FAMILIES}, got {self.family!r}")
        object.__setattr__(self, "family", family)
        n = tuple(int(v) for v in self.n)
        loc = tuple(float(v) for v in self.location)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "location", loc)
        if len(n) < 1 or len(n) != len(loc):
            raise ScenarioError("n and location must be non-empty and of equal length")
        if any(v < 2 for v in n):
            raise ScenarioError(f"all sample sizes must be at least 2, got {n}")
        if any(not v > 0 for v in loc):
            raise ScenarioError("locations must be positive")
        if not 0 < self.tau < 1:
            raise ScenarioError(f"tau must lie in (0, 1), got {self.tau!r}")
        if not 0 < self.level < 1:
            raise ScenarioError(f"level must lie in (0, 1), got {self.level!r}")
        if int(self.reps) < 1 or int(self.gpv_draws) < 1:
            raise ScenarioError("reps and gpv_draws must be positive")
        methods = tuple(str(m).upper() for m in self.methods)
        bad = [m for m in methods if m not in ALL_METHODS]
        if bad or not methods:
            raise ScenarioError(f"unknown methods {bad}; choose from {ALL_METHODS}")
        object.__setattr__(self, "methods", methods)
        try:
            gpv.GV1Variant(self.gv1_variant)
        except ValueError:
            raise ScenarioError(f"unknown gv1_variant {self.gv1_variant!r}") from None

    @property
    def k(self):
        return len(self.n)

    @property
    def key(self):
        """64-bit hash of the data-generating design."""
        text = json.dumps([self.family, self.n, self.location, repr(float(self.tau))])
        return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")

    def with_(self, **changes):
        d = asdict(self)
        d.update(changes)
        return SimScenario(**d)


@dataclass(frozen=True)
class MethodStats:
    coverage: float
    expected_length: float
    failures: int
    mc_stderr_cp: float
    used: int


@dataclass(frozen=True)
class SimResult:
    scenario: SimScenario
    stats: dict = field(default_factory=dict)
    redraws: int = 0


def generate_replication(sc, rep):
    """Dataset for replication ``rep``; degenerate samples are redrawn."""
    data, _ = _generate(sc, rep)
    return data


def _generate(sc, rep):
    shape = weibull_shape_for_cv(sc.tau) if sc.family == "weibull" else None
    groups = []
    redraws = 0
    for i, (n_i, loc) in enumerate(zip(sc.n, sc.location)):
        stream = RngStream(sc.master_seed, sc.key, rep * sc.k + i)
        while True:
            gen = stream.generator()
            if sc.family == "normal":
                x = loc + sc.tau * loc * gen.standard_normal(n_i)
            else:
                x = weibull(gen, shape, loc, n_i)
            if np.ptp(x) > 0 and np.mean(x) > 0:
                break
            redraws += 1
            stream = stream.bumped()
        groups.append(x)
    return model.Dataset.from_groups(groups), redraws


def _gpv_seed(sc, rep):
    text = f"gpv:{sc.master_seed}:{sc.key}:{rep}"
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


def run_replication(sc, rep):
    """Intervals of every requested method for one replication.

    Returns ``(endpoints, redraws)`` where ``endpoints`` maps each method to
    ``(lower, upper)`` or ``None`` if the method failed.
    """
    data, redraws = _generate(sc, rep)
    out = {}
    fit = None
    if {"MSLR", "SLR"} & set(sc.methods):
        try:
            fit = model.fit_mle(data)
        except CVInferError:
            fit = None
    for m in ("MSLR", "SLR"):
        if m not in sc.methods:
            continue
        if fit is None:
            out[m] = None
            continue
        try:
            est = (mslr.ci_mslr if m == "MSLR" else mslr.ci_slr)(data, sc.level, fit)
            out[m] = (est.lower, est.upper)
        except CVInferError:
            out[m] = None
    gv = [m for m in sc.methods if m in gpv.METHODS]
    if gv:
        cfg = gpv.PivotalConfig(sc.gpv_draws, sc.gv1_variant, _gpv_seed(sc, rep))
        try:
            samples = gpv.pivotal_samples(data, cfg, gv)
            for m in gv:
                out[m] = gpv.percentile_interval(samples[m].values, sc.level)
        except CVInferError:
            out.update(dict.fromkeys(gv, None))
    return out, redraws


def _run_chunk(args):
    sc, reps = args
    return [run_replication(sc, rep) for rep in reps]


def _chunks(n, parts):
    size = max(1, math.ceil(n / parts))
    return [range(s, min(n, s + size)) for s in range(0, n, size)]


def run_study(sc, threads=1, executor=None):
    """Simulate a scenario and tally coverage and expected length per method.

    Replications where a method fails are left out of that method's
    coverage and length and counted in ``failures``.  Lengths are summed
    with :func:`math.fsum`, which is exact and hence independent of the
    order in which replications complete.
    """
    if threads > 1 or executor is not None:
        chunks = _chunks(sc.reps, 4 * max(threads, 1))
        if executor is None:
            with ProcessPoolExecutor(threads) as ex:
                parts = list(ex.map(_run_chunk, [(sc, c) for c in chunks]))
        else:
            parts = list(executor.map(_run_chunk, [(sc, c) for c in chunks]))
        outcomes = [o for part in parts for o in part]
    else:
        outcomes = [run_replication(sc, rep) for rep in range(sc.reps)]
    return _tally(sc, outcomes)


def _tally(sc, outcomes):
    stats = {}
    for m in sc.methods:
        ends = [o[m] for o, _ in outcomes if o[m] is not None]
        used = len(ends)
        if used:
            hits = sum(lo <= sc.tau <= hi for lo, hi in ends)
            cp = hits / used
            el = math.fsum(hi - lo for lo, hi in ends) / used
            se = math.sqrt(cp * (1.0 - cp) / used)
        else:
            cp = el = se = math.nan
        stats[m] = MethodStats(cp, el, len(outcomes) - used, se, used)
    return SimResult(sc, stats, sum(r for _, r in outcomes))


def builtin_scenarios(reps=10_000, master_seed=0, gpv_draws=5000, tables=None,
                      gv1_variant=gpv.GV1Variant.SQRT_N.value):
    """Every cell of the six coverage tables: family x k x n-row x tau."""
    out = []
    for family in FAMILIES:
        for k in (3, 5, 10):
            table = TABLES[(family, k)]
            if tables is not None and table not in tables:
                continue
            for tau in TAUS:
                for row in N_ROWS[k]:
                    out.append(SimScenario(
                        family=family, n=tuple(int(v) for v in row.split(",")),
                        location=LOCATIONS[k], tau=tau, reps=reps,
                        gpv_draws=gpv_draws, gv1_variant=gv1_variant,
                        master_seed=master_seed, table=table))
    return out


def scenario_from_dict(d, defaults=None):
    d = {**(defaults or {}), **d}
    allowed = set(SimScenario.__dataclass_fields__)
    unknown = set(d) - allowed
    if unknown:
        raise ScenarioError(f"unknown scenario fields: {sorted(unknown)}")
    try:
        return SimScenario(**d)
    except TypeError as exc:
        raise ScenarioError(str(exc)) from None


def scenario_to_dict(sc):
    d = asdict(sc)
    d["n"] = list(sc.n)
    d["location"] = list(sc.location)
    d["methods"] = list(sc.methods)
    return d


def load_scenarios(source):
    """Read scenarios from a JSON document.

    The document is an object with ``"schema_version": 1`` and either a
    ``"scenarios"`` list or the fields of a single scenario.  Fields under
    an optional ``"defaults"`` object apply to every listed scenario.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
    defaults = doc.get("defaults", {})
    if "scenarios" in doc:
        items = doc["scenarios"]
        if not isinstance(items, list):
            raise ScenarioError("'scenarios' must be a list")
    else:
        items = [{k: v for k, v in doc.items() if k not in ("schema_version", "defaults")}]
    return [scenario_from_dict(item, defaults) for item in items]


def dump_scenarios(scenarios):
    return json.dumps({"schema_version": SCHEMA_VERSION,
                       "scenarios": [scenario_to_dict(s) for s in scenarios]}, indent=2)


CSV_COLUMNS = ("family", "k", "n_vector", "tau", "method", "cp", "el", "mc_stderr",
               "failures", "reps", "seed")


def _fmt(x):
    return "nan" if isinstance(x, float) and math.isnan(x) else f"{x:.6f}"


def emit_table(results, format="csv"):
    """Render ``(scenario, result)`` pairs as CSV or markdown text."""
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for sc, res in results:
            for m in sc.methods:
                st = res.stats[m]
                w.writerow([sc.family, sc.k, ",".join(map(str, sc.n)), f"{sc.tau:g}", m,
                            _fmt(st.coverage), _fmt(st.expected_length),
                            _fmt(st.mc_stderr_cp), st.failures, sc.reps, sc.master_seed])
        return buf.getvalue()
    if format in ("markdown", "md"):
        return _markdown(results)
    raise ValueError(f"unknown format {format!r}")


def _markdown(results):
    # one table per (family, k, tau); rows are CP then EL for each n-vector
    groups = {}
    for sc, res in results:
        groups.setdefault((sc.family, sc.k, sc.tau), []).append((sc, res))
    blocks = []
    for (family, k, tau), items in groups.items():
        methods = []
        for sc, _ in items:
            methods += [m for m in sc.methods if m not in methods]
        lines = [f"**{family}, k={k}, tau={tau:g}**", "",
                 "| n | | " + " | ".join(methods) + " |",
                 "|---|---|" + "---|" * len(methods)]
        for sc, res in items:
            cells = {m: res.stats.get(m) for m in methods}
            cp = [f"{cells[m].coverage:.3f}" if cells[m] else "" for m in methods]
            el = [f"{cells[m].expected_length:.3f}" if cells[m] else "" for m in methods]
            lines.append(f"| {','.join(map(str, sc.n))} | CP | " + " | ".join(cp) + " |")
            lines.append("| | EL | " + " | ".join(el) + " |")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def progress(msg):
    print(msg, file=sys.stderr, flush=True)
