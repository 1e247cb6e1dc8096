"""Command-line front end.

Subcommands: ``simulate``, ``sweep``, ``twirl-check``, ``tomo-demo`` and ``plot``.
Run settings come from flags, optionally layered over a ``key = value``
config file (``--config``).  A ``--config`` pointing at a previously written
CSV replays the run recorded in its header.

Exit codes: 0 success, 2 usage error, 3 I/O or input-file error,
4 numerical invariant violation.
"""

import argparse
import contextlib
import dataclasses
import logging
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channels, drives, moments, plotting, seriesio, su2, tomo

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


class UsageError(ValueError):
    pass


_ANGLE = re.compile(r"^\s*([+-]?)\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*(pi)?\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(text):
    """Radians from ``'0.38pi'``, ``'pi/8'``, ``'-2pi/3'`` or a plain number."""
    m = _ANGLE.match(str(text))
    if not m or (m.group(2) is None and m.group(3) is None):
        raise UsageError(f"cannot parse angle {text!r}")
    value = float(m.group(2)) if m.group(2) is not None else 1.0
    if m.group(1) == "-":
        value = -value
    if m.group(3):
        value *= math.pi
    if m.group(4):
        if float(m.group(4)) == 0:
            raise UsageError(f"angle {text!r} divides by zero")
        value /= float(m.group(4))
    if not math.isfinite(value):
        raise UsageError(f"angle {text!r} is not finite")
    return value


NAMED_STATES = {
    "0": (0.0, 0.0),
    "1": (math.pi, 0.0),
    "+": (math.pi / 2, 0.0),
    "-": (math.pi / 2, math.pi),
}


@dataclass
class RunConfig:
    drive: str = "fibonacci"
    theta_x: float = 0.38 * math.pi
    theta_y: float = math.pi / 8
    theta_z: float = 0.22 * math.pi
    omega2: float = None
    arcs: str = ""
    init: str = "0,0"
    steps: int = 987
    kmax: int = 4
    samples: str = "geom:100"
    seed: int = 0
    shots: int = 0
    l0: float = 1.0
    l1: float = 0.7
    pe: float = 0.92

    def validate(self):
        try:
            drives.DriveKind(self.drive)
        except ValueError:
            raise UsageError(f"drive: unknown drive {self.drive!r}") from None
        for name in ("theta_x", "theta_y", "theta_z"):
            if not math.isfinite(getattr(self, name)):
                raise UsageError(f"{name}: must be finite")
        if self.steps < 1:
            raise UsageError("steps: must be >= 1")
        if not 1 <= self.kmax <= moments.K_CAP:
            raise UsageError(f"kmax: must be in [1, {moments.K_CAP}]")
        if self.shots < 0:
            raise UsageError("shots: must be >= 0")
        if self.drive == "custom" and self.omega2 is None:
            raise UsageError("omega2: required for the custom drive")
        if self.drive != "custom" and self.omega2 is not None:
            raise UsageError("omega2: only the custom drive accepts an override")
        self.protocol()
        self.sample_times()
        return self

    def protocol(self):
        try:
            if self.drive == "floquet":
                return drives.floquet(self.theta_x, self.theta_y)
            if self.drive == "smoothqp":
                return drives.smooth_qp()
            if self.drive == "fibonacci":
                return drives.fibonacci(self.theta_x, self.theta_z)
            return drives.custom(_parse_arcs(self.arcs), self.omega2)
        except ValueError as exc:
            raise UsageError(f"drive: {exc}") from None

    def sample_times(self):
        policy = self.samples.strip()
        if policy == "all":
            return list(range(1, self.steps + 1))
        if policy.startswith("geom"):
            _, _, n = policy.partition(":")
            try:
                n = int(n) if n else 100
            except ValueError:
                raise UsageError(f"samples: bad point count in {policy!r}") from None
            if n < 1:
                raise UsageError("samples: need at least one point")
            proto = self.protocol()
            return moments.default_sample_times(self.steps, proto, n)
        try:
            times = sorted({int(x) for x in policy.split(",") if x.strip()})
        except ValueError:
            raise UsageError(f"samples: cannot parse {policy!r}") from None
        if not times or times[0] < 1 or times[-1] > self.steps:
            raise UsageError("samples: explicit times must lie in [1, steps]")
        return times

    def initial_state(self, trial=0):
        init = self.init.strip()
        if init in NAMED_STATES:
            return su2.bloch_to_spinor(*NAMED_STATES[init])
        if init.startswith("floquet-eigenstate"):
            _, _, which = init.partition(":")
            try:
                pair = drives.floquet_eigenstates(self.theta_x, self.theta_y)
            except ValueError as exc:
                raise UsageError(f"init: {exc}") from None
            return pair[int(which or 0)]
        if init == "haar-random":
            return su2.haar_random_spinor(su2.substream(self.seed, trial))
        parts = init.split(",")
        if len(parts) != 2:
            raise UsageError(f"init: expected THETA,PHI or a keyword, got {init!r}")
        return su2.bloch_to_spinor(parse_angle(parts[0]), parse_angle(parts[1]))

    def calibration(self):
        try:
            return tomo.TomoCalibration(self.l0, self.l1, self.pe)
        except ValueError as exc:
            raise UsageError(f"calibration: {exc}") from None

    def header(self):
        fields = dataclasses.asdict(self)
        if fields["omega2"] is None:
            fields["omega2"] = "none"
        if not fields["arcs"]:
            fields.pop("arcs")
        return fields


def _parse_arcs(text):
    """``start:end:gx:gy:gz;...`` with every entry an angle expression."""
    arcs = []
    for item in filter(None, (s.strip() for s in str(text).split(";"))):
        parts = item.split(":")
        if len(parts) != 5:
            raise UsageError(f"arcs: expected start:end:gx:gy:gz, got {item!r}")
        vals = [parse_angle(p) for p in parts]
        arcs.append(drives.Arc(vals[0], vals[1], vals[2:]))
    return arcs


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}
_ANGLE_FIELDS = {"theta_x", "theta_y", "theta_z", "omega2"}
_ALIASES = {"pe": "pe", "p_e": "pe", "k_max": "kmax", "t_max": "steps"}


def _coerce(key, value):
    key = _ALIASES.get(key, key).replace("-", "_")
    if key not in _FIELD_TYPES:
        return None, None
    if key == "omega2" and str(value).lower() == "none":
        return key, None
    try:
        if key in _ANGLE_FIELDS:
            return key, parse_angle(value)
        if key in ("steps", "kmax", "seed", "shots"):
            return key, int(value)
        if key in ("l0", "l1", "pe"):
            return key, float(value)
    except ValueError:
        raise UsageError(f"{key}: cannot parse {value!r}") from None
    return key, str(value)


def read_config_file(path):
    """Settings from a ``key = value`` file, or from the header of an emitted CSV."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    replay = seriesio.COLUMNS in (line.strip() for line in lines)
    for lineno, line in enumerate(lines, start=1):
        if replay:
            header = seriesio.parse_header(line) if line.startswith("#") else {}
            if "drive" in header:
                for k, v in header.items():
                    key, val = _coerce(k, v)
                    if key:
                        values[key] = val
                break
            continue
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        k, val = _coerce(key.strip(), value.strip())
        if k is None:
            raise UsageError(f"{path}:{lineno}: unknown key {key.strip()!r}")
        values[k] = val
    return values


# --- subcommand bodies ---------------------------------------------------------

def _run_block(args):
    cfg, trial, extra = args
    proto = cfg.protocol()
    psi0 = cfg.initial_state(trial)
    series = moments.delta_series(proto, psi0, cfg.kmax, cfg.sample_times())
    header = dict(extra)
    header.update(cfg.header())
    return header, series.records


def run_simulate(cfg, out, figure=None):
    header, records = _run_block((cfg, 0, {}))
    _write_blocks(out, [(header, records)])
    if figure:
        plotting.plot_blocks([(header, records)], figure, title=cfg.drive)


def parse_grid(text):
    """``theta_x=0.43pi,theta_z=0.37pi;theta_x=...`` -> list of override dicts."""
    points = []
    for chunk in filter(None, (s.strip() for s in text.split(";"))):
        point = {}
        for item in filter(None, (s.strip() for s in chunk.split(","))):
            key, sep, value = item.partition("=")
            if not sep:
                raise UsageError(f"grid: expected key=value, got {item!r}")
            k, v = _coerce(key.strip(), value.strip())
            if k is None:
                raise UsageError(f"grid: unknown key {key.strip()!r}")
            point[k] = v
        points.append(point)
    if not points:
        raise UsageError("grid: empty parameter grid")
    return points


def run_sweep(cfg, grid, trials, jobs, out, figure=None):
    tasks = []
    for g, point in enumerate(grid):
        point_cfg = dataclasses.replace(cfg, **point).validate()
        for trial in range(trials):
            tasks.append((point_cfg, trial, {"block": len(tasks), "grid": g, "trial": trial}))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(_run_block, tasks))
    else:
        blocks = [_run_block(t) for t in tasks]
    _write_blocks(out, blocks)
    if figure:
        plotting.plot_blocks(blocks, figure, title=f"{cfg.drive} sweep")


def run_twirl_check(cfg, T_list, trials, out):
    proto = cfg.protocol()
    inputs = [su2.density(su2.haar_random_spinor(su2.substream(cfg.seed, i))) for i in range(trials)]
    reports = channels.depolarization_residual(proto, T_list, trials, inputs=inputs)
    A, p = channels.fit_power_law([r.T for r in reports], [r.residual for r in reports])
    with _open_out(out) as fh:
        fh.write(seriesio.format_header(cfg.header()) + "\n")
        for trial in range(trials):
            label = next(r.input for r in reports if r.trial == trial)
            fh.write(f"# trial={trial}, input={label}\n")
        fh.write(f"# fit: A={A:.17g}, p={p:.17g}\n")
        fh.write("T,trial,residual\n")
        for r in reports:
            fh.write(f"{r.T},{r.trial},{r.residual:.17g}\n")
    return reports, (A, p)


def run_tomo_demo(cfg, prefix, records_path=None):
    """Forward-simulate tomography records (or load them) and analyse the recovered trajectory."""
    times = cfg.sample_times()
    if records_path:
        records, cal, seed = tomo.read_records(records_path)
    else:
        cal = cfg.calibration()
        seed = cfg.seed
        traj = drives.evolve(cfg.protocol(), cfg.initial_state(), cfg.steps)
        records = tomo.measure_trajectory(traj.states, cal, cfg.shots, seed)
        tomo.write_records(f"{prefix}.records.txt", records, cal, seed)
    raw, spinors = tomo.recover_trajectory(records, cal)
    if len(spinors) < times[-1]:
        raise UsageError(f"samples: record file holds only {len(spinors)} states")
    with _open_out(f"{prefix}.bloch.csv") as fh:
        fh.write(seriesio.format_header(cfg.header()) + "\n")
        fh.write("t,rx,ry,rz,raw_norm\n")
        for t, (state, psi) in enumerate(zip(raw, spinors)):
            r = su2.spinor_to_bloch(psi)
            fh.write(f"{t},{r[0]:.17g},{r[1]:.17g},{r[2]:.17g},{np.linalg.norm(state.bloch):.17g}\n")
    recovered = moments.states_delta_series(spinors, cfg.kmax, times)
    blocks = [({"source": "reconstructed", **cfg.header()}, recovered.records)]
    if not records_path:
        ideal = moments.delta_series(cfg.protocol(), cfg.initial_state(), cfg.kmax, times)
        blocks.append(({"source": "ideal", **cfg.header()}, ideal.records))
    _write_blocks(f"{prefix}.delta.csv", blocks)
    return blocks


@contextlib.contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _write_blocks(out, blocks):
    with _open_out(out) as fh:
        for header, records in blocks:
            seriesio.write_block(fh, [header], records)


# --- argument parsing ------------------------------------------------------------

def _add_run_flags(p):
    p.add_argument("--config", help="key = value file, or a CSV whose header should be replayed")
    p.add_argument("--drive", choices=[k.value for k in drives.DriveKind])
    p.add_argument("--theta-x", dest="theta_x")
    p.add_argument("--theta-y", dest="theta_y")
    p.add_argument("--theta-z", dest="theta_z")
    p.add_argument("--omega2", help="circle frequency, custom drive only")
    p.add_argument("--arcs", help="custom drive arcs start:end:gx:gy:gz;...")
    p.add_argument("--init", help="THETA,PHI | 0 | 1 | + | - | floquet-eigenstate[:1] | haar-random")
    p.add_argument("--steps", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--samples", help="geom[:N] | all | T1,T2,...")
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--l0", type=float)
    p.add_argument("--l1", type=float)
    p.add_argument("--pe", type=float)
    p.add_argument("--out", default="-")
    p.add_argument("--jobs", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="hse-sim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="trace-distance series for one run")
    _add_run_flags(p)
    p.add_argument("--figure", help="also write an SVG figure here")

    p = sub.add_parser("sweep", help="series over a parameter grid and/or random trials")
    _add_run_flags(p)
    p.add_argument("--grid", required=True, help="theta_x=..,theta_z=..;theta_x=..,theta_z=..")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--figure")

    p = sub.add_parser("twirl-check", help="distance of the time-averaged state from I/2")
    _add_run_flags(p)
    p.add_argument("--trials", type=int, default=10)

    p = sub.add_parser("tomo-demo", help="simulate tomography and analyse recovered trajectories")
    _add_run_flags(p)
    p.add_argument("--records", help="re-ingest this record file instead of simulating")

    p = sub.add_parser("plot", help="render a series CSV as a log-log SVG")
    p.add_argument("csv")
    p.add_argument("--out", required=True)
    return parser


_RUN_KEYS = ("drive", "theta_x", "theta_y", "theta_z", "omega2", "arcs", "init", "steps",
             "kmax", "samples", "seed", "shots", "l0", "l1", "pe")


def config_from_args(args):
    values = read_config_file(args.config) if args.config else {}
    for key in _RUN_KEYS:
        raw = getattr(args, key, None)
        if raw is None:
            continue
        k, v = _coerce(key, raw) if isinstance(raw, str) else (key, raw)
        values[k] = v
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    return cfg.validate()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "plot":
            plotting.plot_series_file(args.csv, args.out)
            return 0
        cfg = config_from_args(args)
        if args.jobs < 1:
            raise UsageError("jobs: must be >= 1")
        if args.command == "simulate":
            run_simulate(cfg, args.out, args.figure)
        elif args.command == "sweep":
            if args.trials < 1:
                raise UsageError("trials: must be >= 1")
            run_sweep(cfg, parse_grid(args.grid), args.trials, args.jobs, args.out, args.figure)
        elif args.command == "twirl-check":
            if args.trials < 1:
                raise UsageError("trials: must be >= 1")
            run_twirl_check(cfg, cfg.sample_times(), args.trials, args.out)
        elif args.command == "tomo-demo":
            if args.out == "-":
                raise UsageError("out: tomo-demo needs a file prefix")
            run_tomo_demo(cfg, args.out, args.records)
    except UsageError as exc:
        parser.error(str(exc))
    except (seriesio.SeriesParseError, tomo.RecordParseError) as exc:
        print(f"hse-sim: parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"hse-sim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except moments.NumericalInvariantError as exc:
        print(f"hse-sim: numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
