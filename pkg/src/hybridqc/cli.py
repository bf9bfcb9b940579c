"""Command-line front end.

Exit codes: 0 success, 1 oracle failure, 2 configuration or input error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import secrets
import sys
from dataclasses import replace

from . import harness
from .adversary import AttackStrategy
from .errors import ConfigError, InvalidArgument, ReportParseError
from .oracles import run_oracles
from .scenario import KEYS, PRESETS, from_items, load_config, to_items

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

TABLE_HEADER = "role,accuracy,acc_sigma,fidelity,fid_sigma,visibility,window"


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="key = value scenario file")
    p.add_argument("--preset", metavar="NAME", choices=sorted(PRESETS), help="preset filling missing keys")
    p.add_argument("--seed", metavar="U64", type=int, help="master seed (drawn from entropy if omitted)")
    p.add_argument("--trials", metavar="N", type=int)
    p.add_argument("--out", metavar="PATH", default="-", help="output file, '-' for stdout")
    p.add_argument("--dump-trials", metavar="PATH", help="write per-trial records as TSV")
    p.add_argument("--windows", metavar="N", type=int, help="sample windows for sigma (default 50)")
    p.add_argument("--workers", metavar="N", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hybridqc", description="Hybrid entanglement/phase-obfuscation simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="run one scenario and write a report"))
    _common(sub.add_parser("compare-roles", help="Bob versus each eavesdropper, as a CSV table"))
    sw = sub.add_parser("sweep", help="vary one config key and tabulate Bob's metrics")
    _common(sw)
    sw.add_argument("--key", required=True, choices=KEYS)
    sw.add_argument("--values", required=True, help="comma-separated values")
    rp = sub.add_parser("report", help="tabulate a saved report")
    rp.add_argument("path")
    rp.add_argument("--out", metavar="PATH", default="-")
    sub.add_parser("oracle-check", help="check analytic oracles")
    return ap


def resolve_config(args, **extra):
    if args.config:
        cfg = load_config(args.config, args.preset)
    else:
        cfg = from_items({}, args.preset or "default-5.1")
    items = to_items(cfg)
    if args.trials is not None:
        items["trials"] = str(args.trials)
    if args.windows is not None:
        items["windows_for_sigma"] = str(args.windows)
    items.update(extra)
    cfg = from_items(items)
    if args.seed is not None:
        seed = args.seed
    elif cfg.master_seed is not None:
        seed = cfg.master_seed
    else:
        seed = secrets.randbits(64)
        print(f"master_seed = {seed}", file=sys.stderr)
    try:
        return cfg.with_seed(seed)
    except ConfigError:
        raise
    except InvalidArgument as exc:
        raise ConfigError("master_seed", str(exc)) from None


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _sig(x) -> str:
    return "undefined" if x is None else repr(x)


def role_rows(summary: harness.RoleSummary, visibility: float) -> list[str]:
    return [f"{summary.role},{mean!r},{_sig(sigma)},{summary.fidelity!r},{_sig(summary.fid_sigma)},"
            f"{visibility!r},{w!r}" for w, mean, sigma in summary.accuracy]


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    report = harness.run_scenario(cfg, workers=args.workers)
    _write(args.out, harness.format_report(report))
    if args.dump_trials:
        harness.dump_trials(report.records, args.dump_trials)
    out = sys.stderr if args.out == "-" else sys.stdout
    for r in report.roles:
        for w, mean, sigma in r.accuracy:
            print(f"{r.role} accuracy@{w:.6f} = {mean:.6f} +/- {_sig(sigma)}", file=out)
        print(f"{r.role} fidelity = {r.fidelity:.6f} +/- {_sig(r.fid_sigma)}", file=out)
        print(f"{r.role} visibility = {r.visibility:.6f} +/- {_sig(r.vis_sigma)}", file=out)
    print(f"negativity = {report.negativity:.6f}", file=out)
    print(f"holevo_bits = {report.holevo_bits:.6f}", file=out)
    return EXIT_OK


def compare_roles(cfg, workers=1):
    """Run Bob alone and under each attack; return (table text, all records)."""
    policy = cfg.attack.basis_policy if cfg.attack.kind == "InterceptResend" else "RandomEquatorial"
    rows, records = [TABLE_HEADER], []
    for strategy in (AttackStrategy("None"), AttackStrategy("PassiveTap"), AttackStrategy("UniversalClone"),
                     AttackStrategy("InterceptResend", policy)):
        rep = harness.run_scenario(replace(cfg, attack=strategy), workers=workers)
        records.extend(rep.records)
        bob = rep.role("Bob")
        if strategy.kind == "None":
            rows += role_rows(bob, bob.visibility)
        else:
            rows += role_rows(rep.role(strategy.eve_role), bob.visibility)
    return "\n".join(rows) + "\n", records


def cmd_compare_roles(args) -> int:
    cfg = resolve_config(args)
    table, records = compare_roles(cfg, args.workers)
    _write(args.out, table)
    if args.dump_trials:
        harness.dump_trials(records, args.dump_trials)
    return EXIT_OK


def cmd_sweep(args) -> int:
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError(args.key, "no sweep values given")
    base = resolve_config(args)
    header = (["key", "value", "fidelity", "fid_sigma", "visibility", "vis_sigma", "negativity", "holevo_bits"]
              + [f"accuracy@{w!r}" for w in base.window_deltas])
    rows = [",".join(header)]
    for value in values:
        items = to_items(base)
        items[args.key] = value
        cfg = from_items(items)
        rep = harness.run_scenario(cfg, workers=args.workers)
        bob = rep.role("Bob")
        rows.append(",".join([args.key, value, repr(bob.fidelity), _sig(bob.fid_sigma), repr(bob.visibility),
                              _sig(bob.vis_sigma), repr(rep.negativity), repr(rep.holevo_bits)]
                             + [repr(mean) for _, mean, _ in bob.accuracy]))
    _write(args.out, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_report(args) -> int:
    report = harness.load_report(args.path)
    rows = [TABLE_HEADER]
    for r in report.roles:
        rows += role_rows(r, r.visibility)
    _write(args.out, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    results = run_oracles()
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"FAILED {r.name}: actual={r.actual!r} expected={r.expected!r}", file=sys.stderr)
    print(f"{len(results) - len(failed)}/{len(results)} oracles passed")
    return EXIT_FAIL if failed else EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "compare-roles": cmd_compare_roles,
    "sweep": cmd_sweep,
    "report": cmd_report,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReportParseError as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
