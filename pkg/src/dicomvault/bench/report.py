"""Latency summaries, overhead ratios, and rendered outputs (text, CSV, JSON, figures)."""

from __future__ import annotations

import csv
import json
import statistics
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .runner import LogRow

# Published overhead ratios for the same three services, shown for comparison.
REFERENCE_RATIOS = {"STOW": 4.25, "QIDO": 3.10, "WADO": 2.45}


@dataclass(frozen=True)
class ModeStats:
    requests: int
    failures: int
    mean_ms: float
    median_ms: float
    p95_ms: float

    @classmethod
    def from_rows(cls, rows: list[LogRow]) -> "ModeStats | None":
        if not rows:
            return None
        waits = sorted(row.wait_ms for row in rows)
        p95_index = max(0, round(0.95 * (len(waits) - 1)))
        return cls(
            requests=len(rows),
            failures=sum(1 for row in rows if not 200 <= row.status < 300),
            mean_ms=statistics.fmean(waits),
            median_ms=statistics.median(waits),
            p95_ms=waits[p95_index],
        )


@dataclass
class BenchReport:
    scenario: str
    service: str
    generated_at: float
    open_stats: ModeStats | None
    protected_stats: ModeStats | None
    overhead_ratio: float | None
    mode_equivalent: bool | None
    digest_mismatches: int
    rows: list[LogRow]
    client_requests: int = 0  # every response the driver saw, warmups and mgmt included

    @classmethod
    def from_rows(cls, scenario: str, service: str, rows: list[LogRow]) -> "BenchReport":
        open_rows = [r for r in rows if r.mode == "open"]
        protected_rows = [r for r in rows if r.mode == "protected"]
        open_stats = ModeStats.from_rows(open_rows)
        protected_stats = ModeStats.from_rows(protected_rows)
        ratio = None
        if open_stats and protected_stats and open_stats.mean_ms > 0:
            ratio = protected_stats.mean_ms / open_stats.mean_ms
        equivalent, mismatches = None, 0
        if open_rows and protected_rows:
            open_digests = {r.request_id: r.body_digest for r in open_rows
                            if 200 <= r.status < 300}
            for row in protected_rows:
                if not 200 <= row.status < 300 or row.request_id not in open_digests:
                    continue
                if open_digests[row.request_id] != row.body_digest:
                    mismatches += 1
            equivalent = mismatches == 0
        return cls(scenario, service, time.time(), open_stats, protected_stats, ratio,
                   equivalent, mismatches, rows)

    # -- renderings -----------------------------------------------------------

    def summary_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "service": self.service,
            "generated_at": self.generated_at,
            "open": asdict(self.open_stats) if self.open_stats else None,
            "protected": asdict(self.protected_stats) if self.protected_stats else None,
            "overhead_ratio": self.overhead_ratio,
            "reference_ratio": REFERENCE_RATIOS.get(self.service),
            "mode_equivalent": self.mode_equivalent,
            "digest_mismatches": self.digest_mismatches,
            "log_rows": len(self.rows),
            "client_requests": self.client_requests,
        }

    def text_table(self) -> str:
        lines = [
            f"scenario: {self.scenario}   service: {self.service}",
            f"{'':>18}  {'requests':>8}  {'failed':>6}  {'mean ms':>9}  {'median ms':>9}  {'p95 ms':>9}",
        ]
        for label, stats in (("open access", self.open_stats),
                             ("protected access", self.protected_stats)):
            if stats is None:
                lines.append(f"{label:>18}  {'-':>8}")
                continue
            lines.append(f"{label:>18}  {stats.requests:>8}  {stats.failures:>6}"
                         f"  {stats.mean_ms:>9.2f}  {stats.median_ms:>9.2f}  {stats.p95_ms:>9.2f}")
        if self.overhead_ratio is not None:
            reference = REFERENCE_RATIOS.get(self.service)
            lines.append(f"{'overhead ratio':>18}  {self.overhead_ratio:>8.2f}"
                         + (f"  (published reference: {reference:.2f}x)" if reference else ""))
        if self.mode_equivalent is not None:
            lines.append(f"{'bodies equivalent':>18}  {str(self.mode_equivalent):>8}"
                         f"  ({self.digest_mismatches} digest mismatches)")
        return "\n".join(lines)

    def write(self, out_dir: str | Path) -> dict[str, Path]:
        """report.json, requests.csv, report.txt, and figures under one directory."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {}

        json_path = out / f"report-{self.service.lower()}.json"
        json_path.write_text(json.dumps(self.summary_dict(), indent=1))
        paths["json"] = json_path

        csv_path = out / f"requests-{self.service.lower()}.csv"
        with csv_path.open("w", newline="") as fp:
            writer = csv.writer(fp)
            writer.writerow(["service", "mode", "request_id", "status", "wait_ms",
                             "body_digest"])
            for row in self.rows:
                writer.writerow([row.service, row.mode, row.request_id, row.status,
                                 f"{row.wait_ms:.3f}", row.body_digest])
        paths["csv"] = csv_path

        txt_path = out / f"report-{self.service.lower()}.txt"
        txt_path.write_text(self.text_table() + "\n")
        paths["txt"] = txt_path

        paths.update(self._render_figures(out))
        return paths

    def _render_figures(self, out: Path) -> dict[str, Path]:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        figures = out / "figures"
        figures.mkdir(exist_ok=True)
        paths = {}

        labels, means, medians, p95s = [], [], [], []
        for label, stats in (("open", self.open_stats), ("protected", self.protected_stats)):
            if stats is not None:
                labels.append(label)
                means.append(stats.mean_ms)
                medians.append(stats.median_ms)
                p95s.append(stats.p95_ms)
        if labels:
            fig, ax = plt.subplots(figsize=(6, 4))
            x = range(len(labels))
            width = 0.25
            ax.bar([i - width for i in x], means, width, label="mean")
            ax.bar(list(x), medians, width, label="median")
            ax.bar([i + width for i in x], p95s, width, label="p95")
            ax.set_xticks(list(x))
            ax.set_xticklabels(labels)
            ax.set_ylabel("latency (ms)")
            ax.set_title(f"{self.service}: open vs protected")
            ax.legend()
            fig.tight_layout()
            latency_path = figures / f"latency-{self.service.lower()}.png"
            fig.savefig(latency_path, dpi=120)
            plt.close(fig)
            paths["latency_figure"] = latency_path

        if self.overhead_ratio is not None:
            fig, ax = plt.subplots(figsize=(5, 4))
            bars = ["measured"]
            values = [self.overhead_ratio]
            reference = REFERENCE_RATIOS.get(self.service)
            if reference:
                bars.append("published")
                values.append(reference)
            ax.bar(bars, values, color=["#3465a4", "#888888"][: len(bars)])
            ax.set_ylabel("protected / open mean latency")
            ax.set_title(f"{self.service} overhead ratio")
            fig.tight_layout()
            ratio_path = figures / f"overhead-{self.service.lower()}.png"
            fig.savefig(ratio_path, dpi=120)
            plt.close(fig)
            paths["ratio_figure"] = ratio_path

        return paths


def combined_text_table(reports: list[BenchReport]) -> str:
    """All services side by side, one row per mode, shaped like the published table."""
    services = [r.service for r in reports]
    header = "                    " + "".join(f"{s:>12}" for s in services)
    open_row = "Open access (ms)    " + "".join(
        f"{(r.open_stats.mean_ms if r.open_stats else float('nan')):>12.2f}" for r in reports)
    protected_row = "Protected (ms)      " + "".join(
        f"{(r.protected_stats.mean_ms if r.protected_stats else float('nan')):>12.2f}"
        for r in reports)
    ratio_row = "Overhead ratio      " + "".join(
        f"{(r.overhead_ratio if r.overhead_ratio else float('nan')):>12.2f}" for r in reports)
    reference_row = "Published ratio     " + "".join(
        f"{REFERENCE_RATIOS.get(s, float('nan')):>12.2f}" for s in services)
    return "\n".join([header, open_row, protected_row, ratio_row, reference_row])
