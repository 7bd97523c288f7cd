"""Run records, the CSV results format and the summaries built from it."""

import csv
import io
import logging
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from attr import define, field

from .errors import ReportFormatError

LOG = logging.getLogger(__name__)

CSV_HEADER = "family,d,K_or_n,alg,seed,alg_count,opt,ratio_num,ratio_den"
CSV_FIELDS = tuple(CSV_HEADER.split(","))


@define(frozen=True)
class RunReport:
    """One algorithm run on one instance, with its exact competitive ratio."""

    family: str
    d: int
    param: int
    alg: str
    seed: int
    alg_count: int
    opt: int
    verdicts: Mapping[str, bool] = field(factory=dict, eq=False)
    # per-round rows of the clustering game; not part of the CSV
    rounds: Sequence[Mapping[str, Union[int, str]]] = field(factory=list, eq=False)

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.alg_count, self.opt)

    @property
    def ratio_float(self) -> float:
        return float(self.ratio)

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def row(self) -> List[Union[int, str]]:
        ratio = self.ratio
        return [
            self.family,
            self.d,
            self.param,
            self.alg,
            self.seed,
            self.alg_count,
            self.opt,
            ratio.numerator,
            ratio.denominator,
        ]


def format_csv(reports: Iterable[RunReport]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for report in reports:
        writer.writerow(report.row())
    return out.getvalue()


def write_csv(path: Union[str, Path], reports: Iterable[RunReport]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_csv(reports))


def _parse_row(row: Sequence[str]) -> RunReport:
    if len(row) != len(CSV_FIELDS):
        raise ValueError(f"expected {len(CSV_FIELDS)} fields, got {len(row)}")
    family, d, param, alg, seed, alg_count, opt, num, den = row
    report = RunReport(
        family=family,
        d=int(d),
        param=int(param),
        alg=alg,
        seed=int(seed),
        alg_count=int(alg_count),
        opt=int(opt),
    )
    if report.opt <= 0:
        raise ValueError(f"opt must be positive, got {report.opt}")
    if Fraction(int(num), int(den)) != report.ratio:
        raise ValueError(f"ratio {num}/{den} does not match {report.alg_count}/{report.opt}")
    return report


def parse_csv(text: str) -> List[RunReport]:
    """Parse a results CSV.

    Raises:
        ReportFormatError: wrong header or unparsable rows; the message lists
            every offending line number.
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or ",".join(rows[0]) != CSV_HEADER:
        raise ReportFormatError(f"line 1: expected header {CSV_HEADER!r}")
    reports: List[RunReport] = []
    bad: List[Tuple[int, str]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            reports.append(_parse_row(row))
        except ValueError as e:
            bad.append((lineno, str(e)))
    if bad:
        raise ReportFormatError("bad rows: " + "; ".join(f"line {n}: {why}" for n, why in bad))
    return reports


def read_csv(path: Union[str, Path]) -> List[RunReport]:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_csv(f.read())


@define(frozen=True)
class Summary:
    alg: str
    family: str
    d: int
    trials: int
    worst: Fraction
    mean: Fraction


def _mean(values: Sequence[Fraction]) -> Fraction:
    return sum(values, Fraction(0)) / len(values)


def summarize(reports: Iterable[RunReport]) -> List[Summary]:
    """Trials, worst ratio and mean ratio per (alg, family, d), sorted by key."""
    groups: Dict[Tuple[str, str, int], List[Fraction]] = {}
    for report in reports:
        groups.setdefault((report.alg, report.family, report.d), []).append(report.ratio)
    return [
        Summary(alg, family, d, len(ratios), max(ratios), _mean(ratios))
        for (alg, family, d), ratios in sorted(groups.items())
    ]


def ratio_series(reports: Iterable[RunReport]) -> Dict[Tuple[str, str], Dict[int, Fraction]]:
    """Mean ratio as a function of d, per (alg, family)."""
    series: Dict[Tuple[str, str], Dict[int, Fraction]] = {}
    for row in summarize(reports):
        series.setdefault((row.alg, row.family), {})[row.d] = row.mean
    return series


Series = Mapping[Tuple[str, str], Mapping[int, Fraction]]


def format_table(summary: Sequence[Summary], series: Optional[Series] = None) -> str:
    """Fixed-width text for ``unitlab report``."""
    lines = [f"{'alg':<16}{'family':<18}{'d':>4}{'trials':>8}{'worst':>10}{'mean':>10}"]
    for row in summary:
        lines.append(
            f"{row.alg:<16}{row.family:<18}{row.d:>4}{row.trials:>8}{float(row.worst):>10.4f}{float(row.mean):>10.4f}"
        )
    if series:
        lines.append("")
        for (alg, family), by_d in sorted(series.items()):
            points = "  ".join(f"d={d}:{float(ratio):.4f}" for d, ratio in sorted(by_d.items()))
            lines.append(f"{alg} on {family}: {points}")
    return "\n".join(lines) + "\n"


@define
class DuelSummary:
    """Running totals over duel trials, folded in trial order."""

    trials: int = 0
    total: Fraction = Fraction(0)
    low: Optional[Fraction] = None
    high: Optional[Fraction] = None
    failures: Counter = field(factory=Counter)

    def add(self, ratio: Fraction, failures: Optional[Mapping[str, int]] = None) -> None:
        self.trials += 1
        self.total += ratio
        self.low = ratio if self.low is None else min(self.low, ratio)
        self.high = ratio if self.high is None else max(self.high, ratio)
        for name, count in (failures or {}).items():
            self.failures[name] += count

    @property
    def mean(self) -> Fraction:
        if not self.trials:
            raise ValueError("no trials folded")
        return self.total / self.trials

    def describe(self) -> str:
        low, high = float(self.low or 0), float(self.high or 0)
        text = f"trials={self.trials} mean={float(self.mean):.4f} min={low:.4f} max={high:.4f}"
        failed = {name: count for name, count in sorted(self.failures.items()) if count}
        if failed:
            text += " failures=" + ",".join(f"{name}:{count}" for name, count in failed.items())
        return text


def format_rounds(rows: Iterable[Mapping[str, Union[int, str]]]) -> str:
    """One line per clustering-game round."""
    return "".join(
        "round {round} [{signature}]: points={points} clusters={clusters} small={small} big={big} "
        "certified={certified} expired={expired}\n".format(**row)
        for row in rows
    )
