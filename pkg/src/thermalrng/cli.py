"""Batch command-line frontend.

Subcommands: simulate, analyze, extract, battery, pipeline.  Every stage
is deterministic given its configuration and seeds.  Options can come from
an INI-style config file (--config) with sections [source], [run], [adc],
[toeplitz], [battery], [output]; command-line flags win over the file.

Exit codes: 0 success, 1 statistical failure, 2 usage or configuration
error, 3 I/O or format error, 4 security refusal.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import battery as battery_mod
from .acquisition import (
    AdcConfig,
    adc_spanning,
    clipped_fraction,
    dequantize,
    load_record,
    quantize,
    save_record,
)
from .analysis import (
    autocorrelation,
    calibrate_snu,
    chi_square_gaussian,
    histogram_codes,
    min_entropy,
)
from .battery import BatteryConfig, IMPLEMENTED_TESTS, load_pvalues, merge_external, partition_bits, run_battery
from .errors import (
    ApplicabilityError,
    CalibrationError,
    ConfigurationError,
    ContractError,
    DomainError,
    FormatError,
    SecurityError,
)
from .extractor import (
    ToeplitzSpec,
    epsilon_for,
    extract_stream,
    seed_from_generator,
)
from .source import (
    SourceParams,
    mean_photon_number,
    model_variance_for,
    sample_quadratures,
)

EXIT_OK = 0
EXIT_STATISTICAL = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SECURITY = 4

_USAGE_ERRORS = (ConfigurationError, DomainError, ContractError, ApplicabilityError, CalibrationError)


def _load_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if path:
        read = cp.read(path)
        if not read:
            raise FormatError(f"config file not found: {path}")
    return cp


def _cfg(cp, section, key, fallback, conv=str):
    if cp.has_option(section, key):
        raw = cp.get(section, key)
        if conv is bool:
            return cp.getboolean(section, key)
        return conv(raw)
    return fallback


def _pick(flag_value, cp, section, key, fallback, conv=str):
    """Flags win over the config file; the file wins over defaults."""
    if flag_value is not None:
        return flag_value
    return _cfg(cp, section, key, fallback, conv)


def _emit(payload: dict, fmt: str, out_path: str | None = None):
    if fmt == "json":
        text = json.dumps(payload, indent=2)
    else:
        lines = []

        def walk(prefix, value):
            if isinstance(value, dict):
                for k, v in value.items():
                    walk(f"{prefix}.{k}" if prefix else k, v)
            elif isinstance(value, list) and len(value) > 12:
                lines.append(f"{prefix}: [{len(value)} values]")
            else:
                lines.append(f"{prefix}: {value}")

        walk("", payload)
        text = "\n".join(lines)
    print(text)
    if out_path:
        Path(out_path).write_text(json.dumps(payload, indent=2))


def _source_from(args, cp) -> SourceParams:
    return SourceParams(
        wavelength=_pick(args.wavelength_nm, cp, "source", "wavelength_nm", 1542.0, float) * 1e-9,
        filter_bandwidth=_pick(args.bandwidth_nm, cp, "source", "bandwidth_nm", 0.8, float) * 1e-9,
        optical_power=_pick(args.power_uw, cp, "source", "power_uw", 29.0, float) * 1e-6,
        efficiency=_pick(args.efficiency, cp, "source", "efficiency", 0.5, float),
        detector_noise_var=_pick(
            args.detector_noise, cp, "source", "detector_noise_var", 0.62, float
        ),
        lo_enabled=_pick(args.lo, cp, "source", "lo_enabled", True, bool),
        ase_enabled=_pick(args.ase, cp, "source", "ase_enabled", True, bool),
    )


def _simulate_payload(args, cp, record_path: str) -> dict:
    params = _source_from(args, cp)
    n_mode = _pick(args.n_mode, cp, "source", "n_mode", None, float)
    if n_mode is None:
        n_mode = mean_photon_number(params)
    count = _pick(args.count, cp, "run", "count", 1_000_000, int)
    rate = _pick(args.rate_hz, cp, "run", "sampling_rate_hz", 100e6, float)
    seed = _pick(args.seed, cp, "run", "seed", 20180131, int)
    bits = _pick(args.bits, cp, "adc", "resolution_bits", 8, int)
    sigmas = _pick(args.range_sigmas, cp, "adc", "range_sigmas", 4.0, float)
    fs_min = _pick(getattr(args, "full_scale_min", None), cp, "adc", "full_scale_min", None, float)
    fs_max = _pick(getattr(args, "full_scale_max", None), cp, "adc", "full_scale_max", None, float)

    series = sample_quadratures(params, n_mode, count, seed)
    if fs_min is not None or fs_max is not None:
        if fs_min is None or fs_max is None:
            raise ConfigurationError("full_scale_min and full_scale_max go together")
        adc = AdcConfig(bits, fs_min, fs_max)
    else:
        adc = adc_spanning(series.model_variance, bits, sigmas)
    record = quantize(series, adc, rate, provenance=f"simulated:seed={seed}")
    n_bytes = save_record(record, record_path)
    return {
        "record": str(record_path),
        "bytes_written": n_bytes,
        "samples": count,
        "seed": seed,
        "mean_photon_number": n_mode,
        "expected_variance_snu": model_variance_for(params, n_mode),
        "sampling_rate_hz": rate,
        "resolution_bits": bits,
        "full_scale": [adc.full_scale_min, adc.full_scale_max],
        "clipped_fraction": clipped_fraction(series, adc),
    }


def cmd_simulate(args) -> int:
    cp = _load_config(args.config)
    out = args.out or _cfg(cp, "output", "record", "record.trng")
    payload = _simulate_payload(args, cp, out)
    _emit(payload, args.format)
    return EXIT_OK


def _analyze_payload(args, cp, record) -> dict:
    hist = histogram_codes(record)
    ent = min_entropy(hist)
    max_lag = _pick(args.max_lag, cp, "analysis", "max_lag", 100, int)
    max_lag = min(max_lag, (len(record) - 1) // 2)
    values = dequantize(record)
    acf = autocorrelation(values, max_lag)
    payload = {
        "record": record.provenance,
        "samples": len(record),
        "resolution_bits": record.adc.resolution_bits,
        "histogram_nonzero_bins": int((hist.counts > 0).sum()),
        "histogram_counts": hist.counts.tolist(),
        "entropy": ent.to_dict(),
        "autocorrelation_max_abs": float(np.abs(acf[1:]).max()) if max_lag >= 1 else None,
        "autocorrelation": acf.tolist(),
    }
    if args.gof:
        subset = values[: args.gof_samples]
        stat, p = chi_square_gaussian(subset, bin_count=10)
        payload["gaussian_fit"] = {
            "samples": int(len(subset)),
            "chi_square": stat,
            "p_value": p,
        }
    if args.vacuum_record or args.detector_record:
        if not (args.vacuum_record and args.detector_record):
            raise ConfigurationError(
                "calibration needs both --vacuum-record and --detector-record"
            )
        v_vac = float(np.var(dequantize(load_record(args.vacuum_record))))
        v_det = float(np.var(dequantize(load_record(args.detector_record))))
        cal = calibrate_snu(float(np.var(values)), v_vac, v_det)
        payload["calibration"] = cal.to_dict()
    return payload


def cmd_analyze(args) -> int:
    cp = _load_config(args.config)
    record = load_record(args.record)
    payload = _analyze_payload(args, cp, record)
    _emit(payload, args.format, args.out)
    return EXIT_OK


def _toeplitz_from(args, cp) -> ToeplitzSpec:
    n_in = _pick(args.n, cp, "toeplitz", "n_in", 400, int)
    m_out = _pick(args.m, cp, "toeplitz", "m_out", 256, int)
    seed_file = _pick(args.seed_file, cp, "toeplitz", "seed_file", None)
    if seed_file:
        return ToeplitzSpec.from_seed_bytes(n_in, m_out, Path(seed_file).read_bytes())
    seed_source = _pick(args.seed_source, cp, "toeplitz", "seed_source", 3141592653, int)
    return ToeplitzSpec(n_in, m_out, seed_from_generator(n_in + m_out - 1, seed_source))


def _extract_payload(args, cp, record, bits_path: str) -> dict:
    spec = _toeplitz_from(args, cp)
    h_min = args.h_min
    if h_min is None:
        h_min = min_entropy(histogram_codes(record)).h_min
    raw_bits = record.adc.resolution_bits
    surplus = spec.n_in * h_min / raw_bits - spec.m_out
    epsilon = None
    if surplus <= 0:
        if not args.force:
            raise SecurityError(
                f"refusing unsound extraction: n={spec.n_in}, m={spec.m_out} at "
                f"h_min={h_min:.4f} bits/sample leaves no entropy surplus "
                "(use --force to override)"
            )
    else:
        epsilon = epsilon_for(spec.n_in, spec.m_out, h_min, raw_bits)
    t0 = time.perf_counter()
    result = extract_stream(record, spec)
    elapsed = time.perf_counter() - t0
    result.bits.tofile(bits_path)
    return {
        "bits_file": str(bits_path),
        "n_in": spec.n_in,
        "m_out": spec.m_out,
        "h_min_per_sample": h_min,
        "epsilon": epsilon,
        "epsilon_log2": None if epsilon is None else float(np.log2(epsilon)),
        "output_bits": result.bit_count,
        "blocks": result.block_count,
        "residual_bits": result.residual_bits,
        "bits_per_sample": result.bit_count / len(record),
        "throughput_mbit_s": result.bit_count / elapsed / 1e6,
        "forced": bool(args.force and surplus <= 0),
    }


def cmd_extract(args) -> int:
    cp = _load_config(args.config)
    record = load_record(args.record)
    out = args.out or _cfg(cp, "output", "bits", "extracted.bits")
    payload = _extract_payload(args, cp, record, out)
    _emit(payload, args.format)
    return EXIT_OK


def _battery_payload(args, cp, packed: np.ndarray) -> tuple[dict, bool]:
    seq_len = _pick(args.sequence_length, cp, "battery", "sequence_length", 1_000_000, int)
    total_bits = packed.size * 8
    n_seq = _pick(args.sequences, cp, "battery", "sequences", None, int)
    if n_seq is None:
        n_seq = total_bits // seq_len
    if total_bits < n_seq * seq_len:
        raise ConfigurationError(
            f"insufficient bits: need {n_seq} x {seq_len}, have {total_bits}"
        )
    tests = _pick(args.tests, cp, "battery", "tests", None)
    config = BatteryConfig(
        tests=tuple(t.strip() for t in tests.split(",")) if tests else IMPLEMENTED_TESTS,
        alpha=_pick(args.alpha, cp, "battery", "alpha", 0.01, float),
    )
    rows = partition_bits(packed, n_seq, seq_len)
    report = run_battery(rows, seq_len, config)
    for item in args.import_rows or []:
        name, _, path = item.partition("=")
        if not path:
            raise ConfigurationError(f"--import expects NAME=path, got {item!r}")
        merge_external(report, name, load_pvalues(path))
    payload = report.to_dict()
    payload["table"] = report.render_table()
    return payload, report.passed


def cmd_battery(args) -> int:
    cp = _load_config(args.config)
    chunks = [np.fromfile(path, dtype=np.uint8) for path in args.bits]
    packed = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
    payload, passed = _battery_payload(args, cp, packed)
    if args.format == "text":
        print(payload["table"])
        if args.out:
            Path(args.out).write_text(json.dumps(payload, indent=2))
    else:
        _emit(payload, args.format, args.out)
    return EXIT_OK if passed else EXIT_STATISTICAL


def cmd_pipeline(args) -> int:
    cp = _load_config(args.config)
    workdir = Path(args.workdir or ".")
    workdir.mkdir(parents=True, exist_ok=True)
    record_path = workdir / _cfg(cp, "output", "record", "record.trng")
    bits_path = workdir / _cfg(cp, "output", "bits", "extracted.bits")
    report_path = workdir / _cfg(cp, "output", "report", "pipeline_report.json")

    combined: dict = {}
    combined["simulate"] = _simulate_payload(args, cp, str(record_path))
    record = load_record(record_path)
    combined["analyze"] = _analyze_payload(args, cp, record)
    combined["extract"] = _extract_payload(args, cp, record, str(bits_path))
    packed = np.fromfile(bits_path, dtype=np.uint8)
    battery_payload, passed = _battery_payload(args, cp, packed)
    combined["battery"] = battery_payload
    combined["passed"] = passed
    report_path.write_text(json.dumps(combined, indent=2))
    if args.format == "text":
        print(battery_payload["table"])
        print(f"pipeline report: {report_path}")
    else:
        print(json.dumps(combined, indent=2))
    return EXIT_OK if passed else EXIT_STATISTICAL


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI config file; flags override it")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--out", help="output path")


def _add_source_flags(p: argparse.ArgumentParser):
    p.add_argument("--wavelength-nm", type=float, dest="wavelength_nm")
    p.add_argument("--bandwidth-nm", type=float, dest="bandwidth_nm")
    p.add_argument("--power-uw", type=float, dest="power_uw")
    p.add_argument("--efficiency", type=float)
    p.add_argument("--detector-noise", type=float, dest="detector_noise")
    p.add_argument("--lo", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--ase", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--n-mode", type=float, dest="n_mode",
                   help="override the power-derived mean photon number")
    p.add_argument("--count", type=int)
    p.add_argument("--rate-hz", type=float, dest="rate_hz")
    p.add_argument("--seed", type=int)
    p.add_argument("--bits", type=int, help="ADC resolution bits")
    p.add_argument("--range-sigmas", type=float, dest="range_sigmas")
    p.add_argument("--full-scale-min", type=float, dest="full_scale_min")
    p.add_argument("--full-scale-max", type=float, dest="full_scale_max")


def _add_toeplitz_flags(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, help="extractor input bits per block")
    p.add_argument("--m", type=int, help="extractor output bits per block")
    p.add_argument("--seed-file", dest="seed_file", help="raw seed bytes, MSB-first")
    p.add_argument("--seed-source", type=int, dest="seed_source",
                   help="deterministic generator id for the extractor seed")
    p.add_argument("--h-min", type=float, dest="h_min",
                   help="override the measured min-entropy per sample")
    p.add_argument("--force", action="store_true",
                   help="extract even without entropy surplus")


def _add_battery_flags(p: argparse.ArgumentParser):
    p.add_argument("--sequences", type=int)
    p.add_argument("--sequence-length", type=int, dest="sequence_length")
    p.add_argument("--alpha", type=float)
    p.add_argument("--tests", help="comma-separated test names")
    p.add_argument("--import", dest="import_rows", action="append", metavar="NAME=FILE",
                   help="merge an externally computed p-value column")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermalrng",
        description="Thermal-light RNG chain: simulate, analyze, extract, validate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate and digitize quadrature samples")
    _add_common(p)
    _add_source_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="characterize a raw record")
    _add_common(p)
    p.add_argument("record")
    p.add_argument("--max-lag", type=int, dest="max_lag")
    p.add_argument("--gof", action="store_true", help="Gaussian goodness-of-fit")
    p.add_argument("--gof-samples", type=int, dest="gof_samples", default=1000)
    p.add_argument("--vacuum-record", dest="vacuum_record")
    p.add_argument("--detector-record", dest="detector_record")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("extract", help="Toeplitz-hash a raw record into output bits")
    _add_common(p)
    p.add_argument("record")
    _add_toeplitz_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("battery", help="run the statistical battery on bit files")
    _add_common(p)
    p.add_argument("bits", nargs="+", help="packed bit file(s)")
    _add_battery_flags(p)
    p.set_defaults(func=cmd_battery)

    p = sub.add_parser("pipeline", help="simulate -> analyze -> extract -> battery")
    _add_common(p)
    _add_source_flags(p)
    _add_toeplitz_flags(p)
    _add_battery_flags(p)
    p.add_argument("--workdir", help="directory for stage artifacts")
    p.add_argument("--max-lag", type=int, dest="max_lag")
    p.add_argument("--gof", action="store_true")
    p.add_argument("--gof-samples", type=int, dest="gof_samples", default=1000)
    p.add_argument("--vacuum-record", dest="vacuum_record")
    p.add_argument("--detector-record", dest="detector_record")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SecurityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SECURITY
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
