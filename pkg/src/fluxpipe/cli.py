"""Command-line front end: fabric, plan, schedule, masks, check, simulate.

Exit status: 0 on success, 1 when a check reports violations, 2 for usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .errors import FluxPipeError
from .fabric import PatchSpec, build_fabric, cell_anchors, unit_cell_census
from .freqplan import (ARRANGEMENTS, VARIANTS, ErrorModelParams, build_ladder,
                       fourth_order_pairs, required_detuning)
from .pulsemask import (CompiledCycle, compile_cycle, load_edits, primitives,
                        schedule_provider, sweetspots, synthesize_masks, verify)
from .schedule import (Durations, ancilla_depth, ascii_diagram, cycle_time, parallel_cycle,
                       pipelined_cycle, slot_durations, substitute_hadamards)

EXIT_OK, EXIT_VIOLATIONS, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    distance: int = 3
    torus: str | None = None
    f2: float = 6.0
    delta_f: float = 0.4
    alpha: float = -0.3
    arrangement: str = "standard"
    variant: str = "standard"
    guard: float = 0.05
    tau_1q: float = 20.0
    tau_2q: float = 40.0
    tau_ro: float = 500.0
    seed: int = 0
    edits: str | None = None

    def validate(self):
        if self.arrangement not in ARRANGEMENTS:
            raise ValueError(f"arrangement must be one of {ARRANGEMENTS}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.guard <= 0:
            raise ValueError("guard must be positive")
        Durations(self.tau_1q, self.tau_2q, self.tau_ro)
        self.patch_spec()
        self.ladder()
        return self

    def patch_spec(self) -> PatchSpec:
        if self.torus:
            return PatchSpec.parse(f"torus:{self.torus}")
        return PatchSpec.planar(self.distance)

    def ladder(self):
        return build_ladder(self.f2, self.delta_f, self.alpha, self.arrangement,
                            self.variant, self.guard)

    def durations(self) -> Durations:
        return Durations(self.tau_1q, self.tau_2q, self.tau_ro)

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if k in ("f2", "delta_f", "alpha", "guard"):
                k = f"{k}_ghz"
            elif k.startswith("tau_"):
                k = f"{k}_ns"
            out[k] = v
        return out


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment; keys mirror the long flags."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _coerce(key: str, value):
    kind = _TYPES[key]
    if value is None:
        return None
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    return str(value)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for name in _TYPES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = _coerce(name, v)
    return RunConfig(**values).validate()


# -- output helpers -----------------------------------------------------------

def _stamp(cfg: RunConfig, body: dict) -> dict:
    return {"version": __version__, "config": cfg.to_dict(), **body}


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _load_edits(cfg: RunConfig):
    if not cfg.edits:
        return []
    return load_edits(Path(cfg.edits).read_text())


# -- subcommands ----------------------------------------------------------------

def cmd_fabric(args, cfg: RunConfig) -> int:
    fabric = build_fabric(cfg.patch_spec())
    body = {"fabric": fabric.to_dict()}
    if fabric.is_torus and fabric.patch.rows >= 4 and fabric.patch.cols >= 4:
        census = {f"{r},{c}": unit_cell_census(fabric, (r, c)) for r, c in cell_anchors(fabric)}
        body["census"] = census
        first = next(iter(census.values()))
        body["internal_cz"] = first["internal_cz"]
        body["boundary_cz"] = first["boundary_cz"]
        body["census_uniform"] = all(v == first for v in census.values())
    _emit(_dump(_stamp(cfg, body)), args.out)
    if args.svg:
        svg_path = args.svg if args.svg != "-" else None
        if svg_path:
            Path(svg_path).write_text(fabric.to_svg())
        else:
            sys.stdout.write(fabric.to_svg() + "\n")
    return EXIT_OK


def cmd_plan(args, cfg: RunConfig) -> int:
    ladder = cfg.ladder()
    model = ErrorModelParams.from_durations(cfg.tau_1q, cfg.tau_2q)
    body = {
        "ladder": ladder.to_dict(),
        "xi_rad_per_ns": model.xi,
        "residual_error": model.residual_error(cfg.delta_f),
        "primitives": [p.id for p in primitives(cfg.variant, cfg.arrangement)],
    }
    if args.epsilon is not None:
        body["required_delta_f_ghz"] = required_detuning(args.epsilon, model.xi, cfg.tau_1q)
    _emit(_dump(_stamp(cfg, body)), args.out)
    return EXIT_OK


def _schedule_for(cfg: RunConfig, mode: str):
    fabric = build_fabric(cfg.patch_spec())
    if mode == "parallel":
        return parallel_cycle(fabric)
    return pipelined_cycle(fabric)


def cmd_schedule(args, cfg: RunConfig) -> int:
    schedule = _schedule_for(cfg, args.mode)
    if args.substitute_h:
        schedule = substitute_hadamards(schedule)
    depths = {ancilla_depth(schedule, a) for a in schedule.fabric.ancillas}
    if args.ascii:
        _emit(ascii_diagram(schedule) + "\n", args.out)
        return EXIT_OK
    body = {
        "schedule": schedule.to_dict(),
        "slot_durations_ns": slot_durations(schedule, cfg.durations()),
        "cycle_time_ns": cycle_time(schedule, cfg.durations()),
        "ancilla_depths": sorted(depths),
    }
    _emit(_dump(_stamp(cfg, body)), args.out)
    return EXIT_OK


def _compiled(cfg: RunConfig) -> CompiledCycle:
    schedule = pipelined_cycle(build_fabric(cfg.patch_spec()))
    return compile_cycle(schedule, _load_edits(cfg), cfg.variant, cfg.arrangement)


def cmd_masks(args, cfg: RunConfig) -> int:
    compiled = _compiled(cfg)
    if args.format == "csv":
        _emit(compiled.masks.to_csv(), args.out)
    else:
        _emit(_dump(_stamp(cfg, {"masks": compiled.masks.to_dict()})), args.out)
    return EXIT_OK


def cmd_check(args, cfg: RunConfig) -> int:
    ladder = cfg.ladder()
    compiled = _compiled(cfg)
    result = verify(compiled, ladder)
    seqs = result["sequences"]
    body = {
        "summary": result["summary"],
        "primitives": len(primitives(cfg.variant, cfg.arrangement)),
        "distinct_sequences": len(seqs.distinct_sequences()),
        "realized_cz_match": result["cz_match"],
        "sweetspot_steps": {r: f"{a}/{b}" for r, (a, b) in sweetspots(seqs).items()},
        "fourth_order_pairs": len(fourth_order_pairs(compiled.schedule.fabric,
                                                     seqs.slot_frequencies("A"))),
    }
    if cfg.arrangement == "inverted":
        standard = build_ladder(cfg.f2, cfg.delta_f, cfg.alpha, "standard", "standard", cfg.guard)
        ref = verify(CompiledCycle(compiled.schedule, synthesize_masks(compiled.schedule)),
                     standard)
        body["sweetspot_steps_standard"] = {
            r: f"{a}/{b}" for r, (a, b) in sweetspots(ref["sequences"]).items()}
    if args.reports:
        body["reports"] = [r.to_dict() for r in result["reports"]
                           if args.reports == "all" or r.status == "violation"]
    if args.sequences:
        body["sequences"] = seqs.to_dict()
    _emit(_dump(_stamp(cfg, body)), args.out)
    violations = result["summary"]["violations"] + (0 if result["cz_match"] else 1)
    return EXIT_VIOLATIONS if violations else EXIT_OK


def _simulate_one(payload: tuple) -> str:
    """Run one seed and return its JSON-lines stream (top level for process pools)."""
    from .cliffsim import ErrorInjection, run_cycles, syndrome_stream

    cfg_dict, mode, cycles, injections, init, seed = payload
    cfg = RunConfig(**cfg_dict)
    schedule = _schedule_for(cfg, mode)
    edits = _load_edits(cfg)
    provider = schedule_provider(schedule, edits) if edits else None
    inj = [ErrorInjection.parse(s) for s in injections]
    records = run_cycles(schedule, n_cycles=cycles, injections=inj, seed=seed, init=init,
                         schedule_for_cycle=provider)
    return syndrome_stream(records)


def cmd_simulate(args, cfg: RunConfig) -> int:
    from .cliffsim import ErrorInjection, _check_injections, logical_operator_check

    injections = list(args.inject or [])
    parsed = [ErrorInjection.parse(s) for s in injections]
    schedule = _schedule_for(cfg, args.mode)
    _check_injections(schedule, parsed, args.cycles)
    if args.ancilla_one:
        edits = [e for e in _load_edits(cfg) if e.kind == "stabilizer_off_h_mask"]
        if not edits:
            raise ValueError("--ancilla-one needs an edits file with a stabilizer_off_h_mask edit")
        fabric = schedule.fabric
        reports = []
        for e in edits:
            for state in (0, 1):
                r = logical_operator_check(fabric, e, state)
                reports.append({"target": list(e.target), "ancilla_state": state,
                                "plaquette": fabric.plaquette(e.target).kind,
                                "data_pauli": r["label"]})
        _emit(_dump(_stamp(cfg, {"logical_operator": reports})), args.out)
        return EXIT_OK

    header = json.dumps(_stamp(cfg, {"mode": args.mode, "cycles": args.cycles,
                                     "init": args.init, "injections": injections}),
                        sort_keys=True) + "\n"
    seeds = [cfg.seed + k for k in range(args.sweep_seeds or 1)]
    payloads = [(asdict(cfg), args.mode, args.cycles, injections, args.init, s) for s in seeds]
    if len(payloads) > 1:
        with ProcessPoolExecutor() as pool:
            streams = list(pool.map(_simulate_one, payloads))
        text = header + "".join(
            "".join(json.dumps({"seed": s, **json.loads(line)}, sort_keys=True) + "\n"
                    for line in stream.splitlines())
            for s, stream in zip(seeds, streams))
    else:
        text = header + _simulate_one(payloads[0])
    _emit(text, args.out)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("configuration (flags override --config)")
    g.add_argument("--config", help="flat key = value configuration file")
    g.add_argument("-d", "--distance", type=int)
    g.add_argument("--torus", help="ROWSxCOLS torus (census mode)")
    g.add_argument("--f2", type=float, help="ancilla frequency (GHz)")
    g.add_argument("--delta-f", dest="delta_f", type=float, help="detuning scale (GHz)")
    g.add_argument("--alpha", type=float, help="anharmonicity (GHz, negative)")
    g.add_argument("--arrangement", choices=ARRANGEMENTS)
    g.add_argument("--variant", choices=VARIANTS)
    g.add_argument("--guard", type=float, help="guard band around zones (GHz)")
    g.add_argument("--tau-1q", dest="tau_1q", type=float, help="ns")
    g.add_argument("--tau-2q", dest="tau_2q", type=float, help="ns")
    g.add_argument("--tau-ro", dest="tau_ro", type=float, help="ns, readout plus depletion")
    g.add_argument("--seed", type=int)
    g.add_argument("--edits", help="JSON list of logical edits")
    p.add_argument("-o", "--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluxpipe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fabric", help="build a fabric, export JSON/SVG, torus census")
    _common(p)
    p.add_argument("--svg", nargs="?", const="-", help="write SVG (to file, or stdout)")
    p.set_defaults(func=cmd_fabric)

    p = sub.add_parser("plan", help="frequency ladder and residual-error model")
    _common(p)
    p.add_argument("--epsilon", type=float, help="also report the detuning needed for this error")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("schedule", help="QEC-cycle schedule, depths and timing")
    _common(p)
    p.add_argument("--mode", choices=("pipelined", "parallel"), default="pipelined")
    p.add_argument("--ascii", action="store_true", help="print a timing diagram")
    p.add_argument("--substitute-h", action="store_true", help="replace H by Y rotations")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("masks", help="flux-pulse mask table")
    _common(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_masks)

    p = sub.add_parser("check", help="compile masks and run every zone check")
    _common(p)
    p.add_argument("--reports", choices=("violations", "all"),
                   help="include individual zone reports")
    p.add_argument("--sequences", action="store_true", help="include detuning sequences")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="stabilizer simulation of repeated cycles")
    _common(p)
    p.add_argument("--mode", choices=("pipelined", "parallel"), default="pipelined")
    p.add_argument("--cycles", type=int, default=3)
    p.add_argument("--inject", action="append", metavar="P@ROW,COL@cycleN",
                   help="Pauli error after cycle N (repeatable)")
    p.add_argument("--init", choices=("zero", "code"), default="zero")
    p.add_argument("--sweep-seeds", type=int, metavar="N",
                   help="run seeds seed..seed+N-1 in parallel")
    p.add_argument("--ancilla-one", action="store_true",
                   help="report the net data Pauli of H-masked ancillas started in |1>")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if getattr(args, "cycles", 1) is not None and getattr(args, "cycles", 1) < 1:
            raise ValueError("--cycles must be at least 1")
        if getattr(args, "sweep_seeds", None) is not None and args.sweep_seeds < 1:
            raise ValueError("--sweep-seeds must be at least 1")
        return args.func(args, cfg)
    except (FluxPipeError, ValueError, OSError, KeyError) as exc:
        name = type(exc).__name__
        print(f"error: {name}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
