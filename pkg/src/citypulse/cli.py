"""Command line entry points: serve the engine, replay scripts, generate load.

Exit codes: 0 success, 1 I/O or connection failure, 2 parse/validation error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .replay import (
    ReplayScript,
    ScriptError,
    SynthScenario,
    load_script,
    petclinic_fixture,
    replay,
    run_synth,
    save_script,
)
from .wire import WireError

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2


def _parse_target(value: str) -> tuple[str, int]:
    host, sep, port = value.rpartition(":")
    if not sep or not host:
        raise argparse.ArgumentTypeError(f"target must be host:port, got {value!r}")
    try:
        return host, int(port)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad port in target {value!r}") from exc


def _parse_phase(value: str) -> tuple[tuple[float, float], ...]:
    """Parse a phase schedule like '0:1.0,30:2.5' (offset-seconds:multiplier)."""
    phases = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        offset, sep, multiplier = part.partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(f"phase {part!r} is not offset:multiplier")
        phases.append((float(offset), float(multiplier)))
    return tuple(phases)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citypulse",
        description="Live software-city engine: ingest spans, serve snapshots.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP/TCP server and tick loop")
    serve.add_argument("--tick-seconds", type=float, default=None)
    serve.add_argument("--window-size", type=int, default=None)
    serve.add_argument("--decay", type=float, default=None)
    serve.add_argument("--http-port", type=int, default=None)
    serve.add_argument("--ingest-tcp-port", type=int, default=None)
    serve.add_argument("--config", type=Path, default=None, help="key=value config file")
    serve.add_argument("--frontend-dir", type=Path, default=None, help="static UI to serve at /")
    serve.add_argument("--bind-host", default="0.0.0.0")
    serve.set_defaults(func=_cmd_serve)

    rep = sub.add_parser("replay", help="replay a recorded NDJSON script")
    rep.add_argument("file", type=Path)
    rep.add_argument("--target", type=_parse_target, default=("127.0.0.1", 9000))
    rep.add_argument("--speed", type=float, default=1.0)
    rep.add_argument("--loop", action="store_true")
    rep.add_argument("--connections", type=int, default=1)
    rep.set_defaults(func=_cmd_replay)

    synth = sub.add_parser("synth", help="stream a deterministic synthetic workload")
    synth.add_argument("--classes", type=int, default=20)
    synth.add_argument("--fanout", type=int, default=4)
    synth.add_argument("--cps", type=float, default=50.0, help="spans per second")
    synth.add_argument("--ctor-frac", type=float, default=0.2)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--duration", type=float, default=None, help="seconds; default: run until interrupted")
    synth.add_argument("--phase", type=_parse_phase, default=(), help="rate schedule, e.g. 0:1,30:2.5")
    synth.add_argument("--connections", type=int, default=1)
    synth.add_argument("--target", type=_parse_target, default=None)
    synth.add_argument("--out", type=Path, default=None, help="write the stream to a file instead")
    synth.set_defaults(func=_cmd_synth)

    fixture = sub.add_parser("fixture", help="write the bundled acceptance workload")
    fixture.add_argument("out", type=Path, nargs="?", default=Path("petclinic.ndjson"))
    fixture.set_defaults(func=_cmd_fixture)

    return parser


def _cmd_serve(args: argparse.Namespace) -> int:
    from .server import CityServer

    flags = {
        "tick_seconds": args.tick_seconds,
        "window_size": args.window_size,
        "decay": args.decay,
        "http_port": args.http_port,
        "ingest_tcp_port": args.ingest_tcp_port,
    }
    config = load_config(flags=flags, config_file=args.config)
    CityServer(config, frontend_dir=args.frontend_dir, bind_host=args.bind_host).run()
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    records = load_script(args.file)
    script = ReplayScript(records=records, speed=args.speed, loop=args.loop)
    summary = replay(script, args.target, connections=args.connections)
    print(f"sent {summary.records_sent} records in {summary.duration_seconds:.2f}s")
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    scenario = SynthScenario(
        class_count=args.classes,
        package_fanout=args.fanout,
        calls_per_second=args.cps,
        constructor_fraction=args.ctor_frac,
        duration_seconds=args.duration,
        phase_schedule=args.phase,
        seed=args.seed,
    )
    scenario.validate()
    if args.out is not None:
        if args.duration is None:
            print("synth --out needs --duration (a file cannot be endless)", file=sys.stderr)
            return EXIT_PARSE
        from .replay import generate_synth

        count = save_script(generate_synth(scenario), args.out)
        print(f"wrote {count} records to {args.out}")
        return EXIT_OK
    if args.target is None:
        print("synth needs --target or --out", file=sys.stderr)
        return EXIT_PARSE
    summary = run_synth(scenario, args.target, connections=args.connections)
    print(f"sent {summary.records_sent} records in {summary.duration_seconds:.2f}s")
    return EXIT_OK


def _cmd_fixture(args: argparse.Namespace) -> int:
    count = save_script(petclinic_fixture(), args.out)
    print(f"wrote {count} records to {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScriptError, WireError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except KeyboardInterrupt:
        return EXIT_OK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
