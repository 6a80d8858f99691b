"""Command-line reports: stock experiments, ad-hoc simulation, readout.

Every report command resolves an output directory (--out, else $MEMNET_OUT,
else ./memnet-out/<command>), probes it for writability up front, writes
delimited/structured data plus rendered figures, and finishes with a
manifest.json recording the command, resolved parameters, input-file hashes,
package version, and wall-clock duration.

Exit codes: 0 success, 1 usage or unparseable input, 2 validation failures,
3 numerical failures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    ConvergenceError,
    DriveError,
    SimulationConfig,
    SimulationStepError,
    SingularSystemError,
    simulate,
)
from .network import (
    Network,
    NetworkFormatError,
    NetworkValidationError,
    build_cube,
    build_series_benchmark,
    load_file,
    validate,
)
from .readout import WaveformTaskConfig, task_to_document, waveform_task
from .signals import Signal
from .spectral import (
    ZeroOutputError,
    analyze_outputs,
    combine,
    dft,
    rank_outputs,
    reports_to_csv,
    reports_to_document,
    spectrum_to_csv,
)


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written next to every report."""

    command: str
    parameters: dict
    inputs: dict  # path -> sha256
    version: str
    duration_seconds: float

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "parameters": self.parameters,
            "inputs": self.inputs,
            "version": self.version,
            "duration_seconds": self.duration_seconds,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _resolve_out(given, command: str) -> Path:
    if given:
        return Path(given)
    env = os.environ.get("MEMNET_OUT")
    base = Path(env) if env else Path("memnet-out")
    return base / command


def _prepare_out(out: Path) -> Path:
    """Create the output directory and fail fast if it is not writable, so
    a bad --out never leaves partial files."""
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        with open(probe, "w", encoding="utf-8") as fh:
            fh.write("")
        probe.unlink()
    except OSError as exc:
        raise _CliError(1, f"output directory {out} is not writable: {exc}") from None
    return out


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _write_manifest(out: Path, command: str, parameters: dict, inputs: dict, t0: float):
    manifest = RunManifest(
        command=command,
        parameters=parameters,
        inputs={str(p): _sha256(p) for p in inputs},
        version=__version__,
        duration_seconds=time.perf_counter() - t0,
    )
    _write_text(out / "manifest.json", manifest.to_json())


def _load_network_file(path) -> Network:
    try:
        return load_file(path)
    except OSError as exc:
        raise _CliError(1, f"cannot read network file {path}: {exc}") from None


def _load_drives_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise _CliError(1, f"cannot read drives file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise _CliError(
            1,
            f"drives file {path}: malformed JSON at line {exc.lineno}, "
            f"column {exc.colno}: {exc.msg}",
        ) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("drives"), list):
        raise _CliError(1, f"drives file {path}: expected a top-level 'drives' list")
    drives = {}
    for pos, entry in enumerate(doc["drives"]):
        if not isinstance(entry, dict) or "node" not in entry:
            raise _CliError(1, f"drives file {path}: entry #{pos} needs a 'node'")
        nid = entry["node"]
        if nid in drives:
            raise _CliError(1, f"drives file {path}: duplicate drive for node {nid}")
        try:
            drives[nid] = Signal.from_dict(entry)
        except ValueError as exc:
            raise _CliError(1, f"drives file {path}: entry #{pos}: {exc}") from None
    return drives


# --- analysis shared by cube and simulate ------------------------------------


def _analyze_trace(network: Network, trace, exclude_dc: bool):
    """Score every internal voltage and memristance against the drives.

    Voltage fits include the DC bin unless exclude_dc is set; resistance
    fits always exclude it (the series ride on a large static offset)."""
    inputs = [trace.voltage_of(nid) for nid in network.external_nodes]
    voltage_outputs = [
        (f"V{nid}", trace.voltage_of(nid)) for nid in network.internal_nodes
    ]
    resistance_outputs = [
        (f"R{k + 1}", trace.resistances[:, k]) for k in range(len(network.links))
    ]
    v_reports = analyze_outputs(voltage_outputs, inputs, trace.dt, exclude_dc=exclude_dc)
    r_reports = analyze_outputs(resistance_outputs, inputs, trace.dt, exclude_dc=True)
    return inputs, v_reports, r_reports


def _series_of(network: Network, trace, output_id: str):
    if output_id.startswith("V"):
        return trace.voltage_of(int(output_id[1:]))
    return trace.resistances[:, int(output_id[1:]) - 1]


def _write_analysis(out: Path, network: Network, trace, inputs, v_reports, r_reports,
                    exclude_dc: bool):
    from . import figures

    _write_text(out / "delta_voltages.csv", reports_to_csv(v_reports))
    _write_text(out / "delta_resistances.csv", reports_to_csv(r_reports))
    _write_text(
        out / "delta_voltages.json",
        json.dumps(reports_to_document(v_reports), indent=2, sort_keys=True) + "\n",
    )
    _write_text(
        out / "delta_resistances.json",
        json.dumps(reports_to_document(r_reports), indent=2, sort_keys=True) + "\n",
    )

    spectra_dir = out / "spectra"
    spectra_dir.mkdir(exist_ok=True)
    input_specs = [dft(series, trace.dt) for series in inputs]
    for nid, spec in zip(network.external_nodes, input_specs):
        _write_text(spectra_dir / f"V{nid}.csv", spectrum_to_csv(spec))
    for nid in network.internal_nodes:
        _write_text(
            spectra_dir / f"V{nid}.csv",
            spectrum_to_csv(dft(trace.voltage_of(nid), trace.dt)),
        )
    for k in range(len(network.links)):
        _write_text(
            spectra_dir / f"R{k + 1}.csv",
            spectrum_to_csv(dft(trace.resistances[:, k], trace.dt)),
        )

    # spectrum panels: two hardest and the easiest of each family
    by_id_v = {r.output_id: r for r in v_reports}
    by_id_r = {r.output_id: r for r in r_reports}
    for reports, by_id, name in (
        (v_reports, by_id_v, "voltages"),
        (r_reports, by_id_r, "resistances"),
    ):
        if not reports:
            continue
        ranking = rank_outputs(reports)
        highlight = ranking[:2] + ranking[-1:]
        panels = []
        for output_id in highlight:
            report = by_id[output_id]
            out_spec = dft(_series_of(network, trace, output_id), trace.dt)
            fit_spec = combine(input_specs, report.weights)
            _write_text(spectra_dir / f"fit_{output_id}.csv", spectrum_to_csv(fit_spec))
            panels.append(
                (f"{output_id}: delta = {report.delta:.3f}", out_spec, fit_spec)
            )
        figures.save_spectrum_panels(panels, out / f"spectra_{name}.png")
        print(f"wrote {out / f'spectra_{name}.png'}")

    # hardest-to-mimic memristances as a time-series figure and table
    if r_reports:
        ranking = rank_outputs(r_reports)
        top = ranking[:3]
        positions = [int(rid[1:]) - 1 for rid in top]
        labels = [
            f"{rid} ({trace.link_names[pos]}), delta = {by_id_r[rid].delta:.3f}"
            for rid, pos in zip(top, positions)
        ]
        figures.save_memristance_series(
            trace, positions, labels, out / "top_memristances.png"
        )
        print(f"wrote {out / 'top_memristances.png'}")
        header = "t," + ",".join(f"R_link_{rid[1:]}" for rid in top)
        rows = [header]
        for i, t in enumerate(trace.times):
            vals = [format(trace.resistances[i, pos], ".16e") for pos in positions]
            rows.append(",".join([format(t, ".16e")] + vals))
        _write_text(out / "top_memristances.csv", "\n".join(rows) + "\n")


# --- commands -----------------------------------------------------------------


def cmd_benchmark(args) -> int:
    t0 = time.perf_counter()
    out = _prepare_out(_resolve_out(args.out, "benchmark"))
    from . import figures

    network = build_series_benchmark()
    runs = []
    for freq in args.frequencies:
        if freq <= 0:
            raise _CliError(1, f"frequency must be positive, got {freq}")
        steps = args.steps if args.steps else max(1, round(3.0 / (freq * args.dt)))
        runs.append((freq, {1: Signal.cosine(2.0, freq)}, SimulationConfig(args.dt, steps)))

    def run(item):
        freq, drives, config = item
        return freq, simulate(network, drives, config)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            items = list(pool.map(run, runs))
    else:
        items = [run(r) for r in runs]

    for freq, trace in items:
        _write_text(out / f"trace_{freq:g}Hz.csv", trace.to_csv())
    figures.save_benchmark_overlay(items, out / "overlay.png")
    print(f"wrote {out / 'overlay.png'}")
    figures.save_benchmark_loops(items, out / "loops.png")
    print(f"wrote {out / 'loops.png'}")

    _write_manifest(
        out,
        "benchmark",
        {
            "frequencies": list(args.frequencies),
            "dt": args.dt,
            "steps": args.steps,
            "jobs": args.jobs,
        },
        [],
        t0,
    )
    return 0


def cmd_cube(args) -> int:
    t0 = time.perf_counter()
    out = _prepare_out(_resolve_out(args.out, "cube"))
    from . import figures

    network = build_cube()
    drives = {
        1: Signal.sine(1.0, 2.0),
        2: Signal.sine(1.0, 3.0),
        3: Signal.sine(1.0, 5.0),
    }
    config = SimulationConfig(dt=args.dt, n_steps=args.steps)
    trace = simulate(network, drives, config)
    _write_text(out / "trace.csv", trace.to_csv())

    figures.save_network_panels(
        trace, network.external_nodes, network.internal_nodes, out / "series.png"
    )
    print(f"wrote {out / 'series.png'}")

    inputs, v_reports, r_reports = _analyze_trace(network, trace, args.exclude_dc)
    _write_analysis(out, network, trace, inputs, v_reports, r_reports, args.exclude_dc)

    _write_manifest(
        out,
        "cube",
        {
            "dt": args.dt,
            "steps": args.steps,
            "exclude_dc": args.exclude_dc,
        },
        [],
        t0,
    )
    return 0


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    network = _load_network_file(args.network)
    drives = _load_drives_file(args.drives)
    out = _prepare_out(_resolve_out(args.out, "simulate"))
    from . import figures

    config = SimulationConfig(dt=args.dt, n_steps=args.steps)
    trace = simulate(network, drives, config)
    _write_text(out / "trace.csv", trace.to_csv())
    _write_text(
        out / "trace.json",
        json.dumps(trace.to_document(), indent=2, sort_keys=True) + "\n",
    )
    figures.save_network_panels(
        trace, network.external_nodes, network.internal_nodes, out / "series.png"
    )
    print(f"wrote {out / 'series.png'}")

    if args.analyze:
        inputs, v_reports, r_reports = _analyze_trace(network, trace, args.exclude_dc)
        _write_analysis(
            out, network, trace, inputs, v_reports, r_reports, args.exclude_dc
        )

    _write_manifest(
        out,
        "simulate",
        {
            "network": str(args.network),
            "drives": str(args.drives),
            "dt": args.dt,
            "steps": args.steps,
            "analyze": args.analyze,
            "exclude_dc": args.exclude_dc,
        },
        [args.network, args.drives],
        t0,
    )
    return 0


def cmd_readout(args) -> int:
    t0 = time.perf_counter()
    network = _load_network_file(args.network) if args.network else build_cube()
    out = _prepare_out(_resolve_out(args.out, "readout"))
    from . import figures

    config = WaveformTaskConfig(
        n_episodes=args.episodes,
        drive_amplitude=args.amplitude,
        drive_frequency=args.frequency,
        episode_duration=args.duration,
        dt=args.dt,
        samples_per_episode=args.samples,
        train_fraction=args.train_fraction,
        ridge=args.ridge,
        seed=args.seed,
        include_resistances=args.include_resistances,
        shuffle_labels=args.shuffle_labels,
    )
    result = waveform_task(network, config, jobs=args.jobs)

    _write_text(
        out / "report.json",
        json.dumps(task_to_document(result), indent=2, sort_keys=True) + "\n",
    )
    _write_text(out / "features.csv", result.features.to_csv())
    figures.save_readout_scores(result, out / "scores.png")
    print(f"wrote {out / 'scores.png'}")
    print(
        f"accuracy: {result.accuracy:.3f} on {result.n_test} held-out episodes "
        f"(train {result.train_accuracy:.3f} on {result.n_train})"
    )

    _write_manifest(
        out,
        "readout",
        {
            "network": str(args.network) if args.network else "builtin:cube",
            "episodes": args.episodes,
            "seed": args.seed,
            "dt": args.dt,
            "frequency": args.frequency,
            "amplitude": args.amplitude,
            "duration": args.duration,
            "samples": args.samples,
            "train_fraction": args.train_fraction,
            "ridge": args.ridge,
            "include_resistances": args.include_resistances,
            "shuffle_labels": args.shuffle_labels,
            "jobs": args.jobs,
        },
        [args.network] if args.network else [],
        t0,
    )
    return 0


def cmd_validate(args) -> int:
    try:
        network = load_file(args.network)
    except OSError as exc:
        raise _CliError(1, f"cannot read network file {args.network}: {exc}") from None
    except NetworkValidationError as exc:
        for violation in exc.violations:
            print(violation)
        return 2
    violations = validate(network)
    if violations:
        for violation in violations:
            print(violation)
        return 2
    print(
        f"OK: {len(network.nodes)} nodes "
        f"({len(network.external_nodes)} external, "
        f"{len(network.grounded_nodes)} grounded), {len(network.links)} links"
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="memnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("benchmark", help="series element benchmark at several drive frequencies")
    p.add_argument("--frequencies", type=float, nargs="+", default=[0.2, 1.0, 5.0],
                   metavar="HZ")
    p.add_argument("--dt", type=float, default=0.006)
    p.add_argument("--steps", type=int, default=None,
                   help="steps per run (default: 3 drive periods)")
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("cube", help="27-node cube experiment with mimicry analysis")
    p.add_argument("--dt", type=float, default=0.006)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--exclude-dc", action="store_true",
                   help="exclude the DC bin from voltage fits too")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cube)

    p = sub.add_parser("simulate", help="simulate a network file with a drives file")
    p.add_argument("network")
    p.add_argument("--drives", required=True)
    p.add_argument("--dt", type=float, default=0.006)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--analyze", action="store_true",
                   help="also score outputs against the drives")
    p.add_argument("--exclude-dc", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("readout", help="train the square-vs-sawtooth readout")
    p.add_argument("network", nargs="?", default=None,
                   help="network file (default: built-in cube)")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=0.006)
    p.add_argument("--frequency", type=float, default=1.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--duration", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--ridge", type=float, default=1e-6)
    p.add_argument("--include-resistances", action="store_true")
    p.add_argument("--shuffle-labels", action="store_true",
                   help="control run: labels decoupled from drives")
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_readout)

    p = sub.add_parser("validate", help="check a network file")
    p.add_argument("network")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.code
    except NetworkFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NetworkValidationError, DriveError) as exc:
        if isinstance(exc, NetworkValidationError):
            for violation in exc.violations:
                print(violation, file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SimulationStepError, ConvergenceError, SingularSystemError,
            ZeroOutputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
