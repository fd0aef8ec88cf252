"""Timing and space measurements, plus figures for them.

The JSON inputs are built from one fixed block of records repeated until
the requested size is reached, so every size exercises the same shapes
and the live DAG should peak at the same node count regardless of length.
"""

from __future__ import annotations

import gc
import statistics
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .engine import Engine, StepRecord
from .grammar import Grammar, parse_grammar
from .oracle import FuelExhausted, Rest, interpret, with_deep_stack

BACKENDS = ("sped", "oracle")

_RECORDS = (
    '{"id": 12, "name": "alpha beta", "tags": ["x", "y\\n"], "ok": true, "v": -1.5e3}',
    '[1, 2, {"a": null}]',
    '"plain string"',
    '{"nested": {"deeper": [0, 1.25, false, {"k": "v/w"}]}, "e": [], "o": {}}',
    '{"n": 0, "neg": -42, "f": 3.0E-2, "s": "a\\tb \\"q\\" c"}',
)


def json_grammar() -> Grammar:
    """The bundled JSON-subset grammar (no non-ASCII strings, no ``\\u`` escapes)."""
    text = resources.files("sped").joinpath("grammars/json.peg").read_text()
    return parse_grammar(text)


def json_input(size: int) -> bytes:
    """A JSON array of about ``size`` bytes (never less, at most one record more)."""
    parts = ["[\n"]
    total = 2
    k = 0
    while total + 2 < size or k == 0:
        rec = _RECORDS[k % len(_RECORDS)]
        if k:
            parts.append(",\n")
            total += 2
        parts.append(rec)
        total += len(rec)
        k += 1
    parts.append("\n]")
    return "".join(parts).encode()


@dataclass
class BenchResult:
    backend: str
    input_length: int
    verdict: str
    consumed_through: Optional[int]
    times: list[float]
    max_live_nodes: Optional[int] = None
    live_per_step: list[int] = field(default_factory=list, repr=False)

    @property
    def median(self) -> float:
        return statistics.median(self.times)

    @property
    def bytes_per_second(self) -> float:
        return self.input_length / self.median if self.median > 0 else float("inf")

    def as_dict(self) -> dict:
        out = {
            "backend": self.backend,
            "input_length": self.input_length,
            "verdict": self.verdict,
            "consumed_through": self.consumed_through,
            "repeat": len(self.times),
            "median_seconds": round(self.median, 6),
            "bytes_per_second": round(self.bytes_per_second, 1),
        }
        if self.backend == "sped":
            out["max_live_nodes"] = self.max_live_nodes
        return out


def bench_sped(g: Grammar, data: bytes, repeat: int = 1, *, hash_cons: bool = False,
               keep_steps: bool = False) -> BenchResult:
    """Time ``repeat`` runs with live-node tracking on (the timed work includes it)."""
    engine = Engine(g, hash_cons=hash_cons)
    times = []
    peak = None
    live: list[int] = []
    outcome = None
    for r in range(repeat):
        hook = None
        if keep_steps and r == 0:
            def hook(rec: StepRecord) -> None:
                live.append(rec.live_nodes or 0)
        t0 = time.perf_counter()
        outcome = with_deep_stack(engine.recognize, data, stats=True, on_step=hook)
        times.append(time.perf_counter() - t0)
        peak = outcome.peak_live_nodes if peak is None else max(peak, outcome.peak_live_nodes or 0)
    assert outcome is not None
    return BenchResult("sped", len(data), outcome.verdict, outcome.consumed_through, times,
                       peak, live)


def bench_oracle(g: Grammar, data: bytes, repeat: int = 1, *, fuel: int = 10**9) -> BenchResult:
    times = []
    res = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = with_deep_stack(interpret, g.start, g, data, 0, fuel)
        times.append(time.perf_counter() - t0)
    if isinstance(res, Rest):
        verdict, through = "match", res.position
    elif isinstance(res, FuelExhausted):
        verdict, through = "no-verdict", None
    else:
        verdict, through = "fail", None
    return BenchResult("oracle", len(data), verdict, through, times)


def run_bench(g: Grammar, data: bytes, *, backend: str = "sped", repeat: int = 1,
              hash_cons: bool = False, fuel: int = 10**9, keep_steps: bool = False) -> BenchResult:
    """Median-of-``repeat`` timing; the cyclic collector is paused as ``timeit`` does."""
    if repeat < 1:
        raise ValueError("repeat must be at least 1")
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    enabled = gc.isenabled()
    gc.disable()
    try:
        if backend == "sped":
            return bench_sped(g, data, repeat, hash_cons=hash_cons, keep_steps=keep_steps)
        return bench_oracle(g, data, repeat, fuel=fuel)
    finally:
        if enabled:
            gc.enable()


@dataclass
class ScalingReport:
    results: list[BenchResult]
    # time ratio over size ratio for each consecutive pair of sizes
    linearity: list[float]
    live_nodes_equal: bool

    def within(self, factor: float) -> bool:
        return all(1 / factor <= r <= factor for r in self.linearity)

    def as_dict(self) -> dict:
        return {
            "runs": [r.as_dict() for r in self.results],
            "linearity": [round(x, 3) for x in self.linearity],
            "live_nodes_equal": self.live_nodes_equal,
        }


def scaling(g: Grammar, sizes: Sequence[int], *, repeat: int = 1,
            keep_steps: bool = False) -> ScalingReport:
    """Run the engine on generated JSON of each size and compare neighbours.

    One untimed run on the smallest input comes first so allocator and
    cache warm-up is not charged to the first size.  ``repeat`` is a
    minimum: sizes under 100 KB are repeated more, half of their runs
    before the largest size and half after, so slow phases of a shared
    machine hit every size alike.
    """
    sizes = sorted(sizes)
    if not sizes:
        return ScalingReport([], [], True)
    data = {n: json_input(n) for n in sizes}
    run_bench(g, data[sizes[0]])
    reps = {n: max(repeat, 100_000 // max(n, 1)) for n in sizes}
    done: dict[int, BenchResult] = {}

    def run(n: int, count: int, steps: bool) -> None:
        if count <= 0:
            return
        r = run_bench(g, data[n], repeat=count, keep_steps=steps)
        if n in done:
            prev = done[n]
            prev.times.extend(r.times)
            prev.max_live_nodes = max(prev.max_live_nodes or 0, r.max_live_nodes or 0)
        else:
            done[n] = r

    largest = sizes[-1]
    for n in sizes[:-1]:
        run(n, (reps[n] + 1) // 2, keep_steps)
    run(largest, reps[largest], keep_steps)
    for n in sizes[:-1]:
        run(n, reps[n] // 2, False)
    results = [done[n] for n in sizes]
    ratios = []
    for a, b in zip(results, results[1:]):
        ratios.append((b.median / a.median) / (b.input_length / a.input_length))
    peaks = {r.max_live_nodes for r in results}
    return ScalingReport(results, ratios, len(peaks) == 1)


def render_figures(results: Sequence[BenchResult], outdir: Path | str, stem: str = "bench") -> list[Path]:
    """Write time-vs-size and live-nodes-per-step plots; returns the paths written."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    by_backend: dict[str, list[BenchResult]] = {}
    for r in results:
        by_backend.setdefault(r.backend, []).append(r)
    fig, ax = plt.subplots(figsize=(5, 4))
    for name, rows in sorted(by_backend.items()):
        rows = sorted(rows, key=lambda r: r.input_length)
        ax.plot([r.input_length for r in rows], [r.median for r in rows], marker="o", label=name)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("input bytes")
    ax.set_ylabel("median seconds")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    path = outdir / f"{stem}_time.png"
    fig.savefig(path, dpi=100)
    plt.close(fig)
    written.append(path)

    traced = [r for r in results if r.live_per_step]
    if traced:
        fig, ax = plt.subplots(figsize=(6, 4))
        for r in sorted(traced, key=lambda r: r.input_length):
            ax.plot(range(1, len(r.live_per_step) + 1), r.live_per_step, lw=0.6,
                    label=f"{r.input_length} bytes")
        ax.set_xscale("log")
        ax.set_xlabel("step")
        ax.set_ylabel("live nodes")
        ax.legend()
        fig.tight_layout()
        path = outdir / f"{stem}_live.png"
        fig.savefig(path, dpi=100)
        plt.close(fig)
        written.append(path)
    return written

