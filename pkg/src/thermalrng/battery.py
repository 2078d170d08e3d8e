"""Multi-sequence test battery with Table-style reporting.

Each selected test runs on every sequence; tests that emit several
p-values per sequence (CumulativeSums, Serial) produce one result row per
sub-statistic, each judged on its own.  A row passes when its p-values are
uniform (chi-square p >= 1e-4 over ten cells) and enough sequences exceed
the significance level; the battery passes when every row of every test
passes.  Reports render both as JSON and as a plain-text table with the
ten decile columns, the uniformity P-value, the proportion, and the test
name.  Rows for tests run elsewhere can be merged from per-sequence
p-value files so a full table can be assembled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import stattests
from .errors import ApplicabilityError, ContractError, DomainError

UNIFORMITY_MIN_P = 1e-4

IMPLEMENTED_TESTS = (
    "Frequency",
    "BlockFrequency",
    "CumulativeSums",
    "Runs",
    "LongestRun",
    "Rank",
    "FFT",
    "ApproximateEntropy",
    "Serial",
)


@dataclass(frozen=True)
class BatteryConfig:
    tests: tuple[str, ...] = IMPLEMENTED_TESTS
    alpha: float = 0.01
    block_frequency_size: int = 128
    serial_length: int = 2
    approximate_entropy_length: int = 2

    def __post_init__(self):
        unknown = set(self.tests) - set(IMPLEMENTED_TESTS)
        if unknown:
            raise DomainError(f"unknown tests: {sorted(unknown)}")
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass
class SubtestRow:
    """One p-value set: a single statistic of a test across all sequences."""

    label: str
    p_values: np.ndarray
    histogram: np.ndarray
    uniformity_p: float
    pass_count: int
    sequence_count: int
    threshold: int
    threshold_bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "histogram": self.histogram.tolist(),
            "uniformity_p": self.uniformity_p,
            "pass_count": self.pass_count,
            "sequence_count": self.sequence_count,
            "threshold": self.threshold,
            "threshold_bound": self.threshold_bound,
            "passed": self.passed,
        }


@dataclass
class TestResult:
    """All result rows of one named test, plus its combined verdict."""

    name: str
    subtests: list[SubtestRow]
    imported: bool = False

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.subtests)

    @property
    def worst(self) -> SubtestRow:
        """The presented row: smallest pass count, then worst uniformity."""
        return min(self.subtests, key=lambda r: (r.pass_count / r.sequence_count, r.uniformity_p))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "imported": self.imported,
            "passed": self.passed,
            "subtests": [row.to_dict() for row in self.subtests],
        }


@dataclass
class BatteryReport:
    sequence_count: int
    sequence_length: int
    alpha: float
    tests: list[TestResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.tests) and all(t.passed for t in self.tests)

    def to_dict(self) -> dict:
        return {
            "sequence_count": self.sequence_count,
            "sequence_length": self.sequence_length,
            "alpha": self.alpha,
            "passed": self.passed,
            "tests": [t.to_dict() for t in self.tests],
        }

    def render_table(self) -> str:
        """Plain-text table: decile columns, uniformity, proportion, name.

        Tests with several result rows are presented by their worst row.
        """
        header = (
            "  ".join(f"{f'C{i}':>4}" for i in range(1, 11))
            + "   P-value  Proportion  Statistical test"
        )
        lines = [header, "-" * len(header)]
        for result in self.tests:
            row = result.worst
            cells = "  ".join(f"{int(c):>4}" for c in row.histogram)
            flag = "" if result.passed else "  *FAIL*"
            lines.append(
                f"{cells}  {row.uniformity_p:8.6f}  {row.pass_count:>4}/{row.sequence_count:<5}"
                f" {result.name}{flag}"
            )
        lines.append(
            f"battery verdict: {'PASS' if self.passed else 'FAIL'} "
            f"(alpha={self.alpha}, uniformity floor={UNIFORMITY_MIN_P})"
        )
        return "\n".join(lines)


def _row_from_pvalues(
    label: str, p_values: np.ndarray, alpha: float
) -> SubtestRow:
    p_values = np.asarray(p_values, dtype=np.float64)
    if p_values.size and (p_values.min() < 0 or p_values.max() > 1):
        raise DomainError(f"{label}: p-values must lie in [0, 1]")
    k = p_values.size
    bound = stattests.proportion_bound(k, alpha)
    threshold = stattests.proportion_threshold(k, alpha)
    uniformity = stattests.uniformity_p(p_values)
    pass_count = int((p_values >= alpha).sum())
    return SubtestRow(
        label=label,
        p_values=p_values,
        histogram=stattests.pvalue_histogram(p_values),
        uniformity_p=uniformity,
        pass_count=pass_count,
        sequence_count=k,
        threshold=threshold,
        threshold_bound=bound,
        passed=(uniformity >= UNIFORMITY_MIN_P) and (pass_count >= threshold),
    )


def _test_runners(config: BatteryConfig) -> dict:
    return {
        "Frequency": lambda bits: [("Frequency", stattests.frequency(bits))],
        "BlockFrequency": lambda bits: [
            ("BlockFrequency", stattests.block_frequency(bits, config.block_frequency_size))
        ],
        "CumulativeSums": lambda bits: [
            ("CumulativeSums-Forward", stattests.cumulative_sums(bits, "forward")),
            ("CumulativeSums-Backward", stattests.cumulative_sums(bits, "backward")),
        ],
        "Runs": lambda bits: [("Runs", stattests.runs(bits))],
        "LongestRun": lambda bits: [("LongestRun", stattests.longest_run(bits))],
        "Rank": lambda bits: [("Rank", stattests.rank(bits))],
        "FFT": lambda bits: [("FFT", stattests.spectral_fft(bits))],
        "ApproximateEntropy": lambda bits: [
            ("ApproximateEntropy", stattests.approximate_entropy(bits, config.approximate_entropy_length))
        ],
        "Serial": lambda bits: [
            (f"Serial-{i + 1}", p)
            for i, p in enumerate(stattests.serial(bits, config.serial_length))
        ],
    }


def partition_bits(packed: np.ndarray, sequence_count: int, sequence_length: int) -> np.ndarray:
    """Slice a packed bitstream into (sequence_count, bytes) rows.

    sequence_length must be a whole number of bytes so rows stay aligned.
    """
    if sequence_length % 8 != 0:
        raise ContractError("sequence_length must be a multiple of 8 bits")
    packed = np.asarray(packed, dtype=np.uint8).reshape(-1)
    row_bytes = sequence_length // 8
    need = sequence_count * row_bytes
    if packed.size < need:
        raise ContractError(
            f"need {need} bytes for {sequence_count} x {sequence_length} bits, "
            f"got {packed.size}"
        )
    return packed[:need].reshape(sequence_count, row_bytes)


def run_battery(
    packed_sequences: np.ndarray,
    sequence_length: int,
    config: BatteryConfig | None = None,
) -> BatteryReport:
    """Run the configured tests over equal-length packed bit sequences.

    packed_sequences: (sequence_count, bytes_per_sequence) uint8, MSB-first.
    """
    config = config or BatteryConfig()
    packed = np.asarray(packed_sequences, dtype=np.uint8)
    if packed.ndim != 2:
        raise ContractError("packed_sequences must be a 2-D array of bytes")
    n_seq, row_bytes = packed.shape
    if sequence_length > row_bytes * 8:
        raise ContractError(
            f"rows hold {row_bytes * 8} bits, requested {sequence_length}"
        )
    if n_seq < 100:
        raise ApplicabilityError(
            f"battery needs at least 100 sequences, got {n_seq}"
        )
    runners = _test_runners(config)
    collected: dict[str, dict[str, list[float]]] = {
        name: {} for name in config.tests
    }
    for row in packed:
        bits = np.unpackbits(row, count=sequence_length)
        for name in config.tests:
            for label, p in runners[name](bits):
                collected[name].setdefault(label, []).append(p)
    report = BatteryReport(
        sequence_count=n_seq,
        sequence_length=sequence_length,
        alpha=config.alpha,
    )
    for name in config.tests:
        rows = [
            _row_from_pvalues(label, np.array(ps), config.alpha)
            for label, ps in collected[name].items()
        ]
        report.tests.append(TestResult(name=name, subtests=rows))
    return report


def merge_external(
    report: BatteryReport, name: str, p_values, alpha: float | None = None
) -> BatteryReport:
    """Add a result row computed elsewhere (one p-value per sequence).

    The external sequence count may differ from the battery's own (some
    reference tests skip inapplicable sequences); the pass threshold is
    computed at the imported count.
    """
    if any(t.name == name for t in report.tests):
        raise ContractError(f"report already has a test named {name!r}")
    row = _row_from_pvalues(name, np.asarray(p_values, dtype=np.float64), alpha or report.alpha)
    report.tests.append(TestResult(name=name, subtests=[row], imported=True))
    return report


def load_pvalues(path) -> np.ndarray:
    """One decimal p-value per line; blank lines ignored."""
    values = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError as exc:
                raise ContractError(f"{path}:{ln}: not a p-value: {text!r}") from exc
    return np.asarray(values, dtype=np.float64)
