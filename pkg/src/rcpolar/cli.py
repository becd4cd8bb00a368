"""Command-line front end: construct codes, design schemes, run simulations.

Commands read a JSON config file (--config) whose keys may be overridden on
the command line; every output file embeds the resolved config and the tool
version.  Exit codes: 0 ok, 2 bad usage/config, 3 runtime failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import ChannelParams, channel_llr_distribution
from .codec import code_to_dict
from .construct import construct_rcp
from .design import HarqScheme, build_bler_curve, design_scheme
from .reliability import ga_evolve
from .simulate import bler_monte_carlo, bound_check, run_campaign

SCHEMA_VERSION = 1


class ConfigError(Exception):
    pass


def _load_config(args) -> dict:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    for item in args.set or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            cfg[key] = json.loads(raw)
        except json.JSONDecodeError:
            cfg[key] = raw
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.threads is not None:
        cfg["threads"] = args.threads
    if args.out is not None:
        cfg["out"] = args.out
    cfg.setdefault("seed", 0)
    cfg.setdefault("threads", 1)
    return cfg


def _require(cfg: dict, *keys):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    return [cfg[k] for k in keys]


def _snr_list(value):
    values = value if isinstance(value, list) else [value]
    try:
        return [float(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError(f"snr_db must be a number or list, got {value!r}")


def _out_dir(cfg: dict) -> Path:
    out = Path(_require(cfg, "out")[0])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _envelope(command: str, cfg: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "rcpolar",
        "tool_version": __version__,
        "command": command,
        "config": cfg,
    }


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _csv_header(fp, command: str, cfg: dict) -> None:
    fp.write(f"# schema_version={SCHEMA_VERSION}\n")
    fp.write(f"# tool=rcpolar {__version__}\n")
    fp.write(f"# command={command}\n")
    fp.write(f"# config={json.dumps(cfg, sort_keys=True)}\n")


def cmd_construct(cfg: dict) -> int:
    n, k, m, snr_db = _require(cfg, "n", "k", "m", "snr_db")
    out = _out_dir(cfg)
    params = ChannelParams(snr_db=float(snr_db))
    channel = channel_llr_distribution(params)
    code, plan, bler = construct_rcp(int(n), int(k), int(m), channel)

    doc = _envelope("construct", cfg)
    doc["code"] = code_to_dict(code)
    doc["bler_estimate"] = bler
    _write_json(out / "code.json", doc)

    means = np.full(code.spec.n0, channel.mean)
    means[code.spec.puncture_set] = 0.0
    table = ga_evolve(means)
    with open(out / "reliability.csv", "w") as fp:
        _csv_header(fp, "construct", cfg)
        table.to_csv(fp)
    print(f"wrote {out / 'code.json'} and {out / 'reliability.csv'}",
          file=sys.stderr)
    return 0


def cmd_design(cfg: dict) -> int:
    k, t_max, q, snr_db = _require(cfg, "k", "t_max", "q", "snr_db")
    out = _out_dir(cfg)
    force = bool(cfg.get("force_n1_equals_m", False))
    schemes = []
    for snr in _snr_list(snr_db):
        channel = channel_llr_distribution(ChannelParams(snr_db=snr))
        scheme = design_scheme(int(k), int(t_max), int(q), channel,
                               force_first_length_equals_m=force)
        curve = build_bler_curve(scheme.k, scheme.m, int(q), channel)
        curve_path = out / f"bler_curve_snr{snr:g}.csv"
        with open(curve_path, "w") as fp:
            _csv_header(fp, "design", cfg)
            fp.write("n,bler\n")
            for i, e in enumerate(curve.e):
                fp.write(f"{curve.m + i},{float(e)!r}\n")
        schemes.append({
            "snr_db": snr,
            "k": scheme.k,
            "t_max": int(t_max),
            "q": int(q),
            "s": list(scheme.s),
            "eta_estimate": scheme.eta_estimate,
            "bler_curve_path": curve_path.name,
        })
        print(f"snr {snr:+.2f} dB -> s={scheme.s} eta~{scheme.eta_estimate:.4f}",
              file=sys.stderr)
    doc = _envelope("design", cfg)
    doc["schemes"] = schemes
    _write_json(out / "schemes.json", doc)
    return 0


def _load_schemes(path: str):
    try:
        doc = json.loads(Path(path).read_text())
        entries = doc["schemes"]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise ConfigError(f"cannot read schemes from {path}: {exc}")
    out = []
    for entry in entries:
        s = entry["s"]
        out.append((float(entry["snr_db"]),
                    HarqScheme(k=int(entry["k"]), m=int(s[0]),
                               lengths=tuple(int(v) for v in s[1:]),
                               eta_estimate=float(entry["eta_estimate"]))))
    return out


def cmd_simulate(cfg: dict) -> int:
    schemes_path, trials = _require(cfg, "schemes", "trials")
    out = _out_dir(cfg)
    seed = int(cfg["seed"])
    threads = int(cfg["threads"])
    wanted = set(_snr_list(cfg["snr_db"])) if "snr_db" in cfg else None

    results = []
    for snr, scheme in _load_schemes(str(schemes_path)):
        if wanted is not None and snr not in wanted:
            continue
        params = ChannelParams(snr_db=snr)
        print(f"simulating snr {snr:+.2f} dB, {trials} trials", file=sys.stderr)
        report = run_campaign(scheme, params, int(trials), seed,
                              threads=threads)
        check = bound_check(report)
        results.append((report, check))

    if not results:
        raise ConfigError("no scheme matched the requested snr_db values")

    doc = _envelope("simulate", cfg)
    doc["reports"] = []
    for report, check in results:
        doc["reports"].append({
            "snr_db": report.snr_db,
            "k": report.k,
            "s": [report.m, *report.lengths],
            "trials": report.trials,
            "base_seed": report.base_seed,
            "pr_e": list(report.pr_e),
            "pr_first_success": list(report.pr_first_success),
            "e_k": report.e_k,
            "e_n": report.e_n,
            "eta": report.eta,
            "eta_analytic": report.eta_analytic,
            "ci95": {key: (list(v) if isinstance(v, tuple) else v)
                     for key, v in report.ci95.items()},
            "nesting_violations": report.nesting_violations,
            "bound_check": {
                "rows": [vars(row) for row in check.rows],
                "eta_holds": check.eta_holds,
                "all_hold": check.all_hold,
            },
        })
    _write_json(out / "report.json", doc)

    with open(out / "report.csv", "w") as fp:
        _csv_header(fp, "simulate", cfg)
        fp.write("snr_db,t,pr_e,pr_first_success,eta,ci_pr_e,"
                 "ci_pr_first_success,ci_eta\n")
        for report, _ in results:
            for t in range(1, len(report.pr_e) + 1):
                fp.write(f"{report.snr_db},{t},{report.pr_e[t-1]!r},"
                         f"{report.pr_first_success[t-1]!r},{report.eta!r},"
                         f"{report.ci95['pr_e'][t-1]!r},"
                         f"{report.ci95['pr_first_success'][t-1]!r},"
                         f"{report.ci95['eta']!r}\n")
    return 0


def cmd_bler(cfg: dict) -> int:
    codes, snr_db, trials = _require(cfg, "codes", "snr_db", "trials")
    out = _out_dir(cfg)
    seed = int(cfg["seed"])
    threads = int(cfg["threads"])
    rows = []
    for entry in codes:
        n, k, m = (int(v) for v in entry)
        for snr in _snr_list(snr_db):
            params = ChannelParams(snr_db=snr)
            print(f"bler ({n},{k},{m}) at {snr:+.2f} dB", file=sys.stderr)
            rows.append(bler_monte_carlo(n, k, m, params, int(trials), seed,
                                         threads=threads))
    with open(out / "bler.csv", "w") as fp:
        _csv_header(fp, "bler", cfg)
        fp.write("snr_db,n,k,m,trials,errors,bler,ci95,bler_analytic\n")
        for row in rows:
            fp.write(f"{row['snr_db']},{row['n']},{row['k']},{row['m']},"
                     f"{row['trials']},{row['errors']},{row['bler']!r},"
                     f"{row['ci95']!r},{row['bler_analytic']!r}\n")
    return 0


_COMMANDS = {
    "construct": cmd_construct,
    "design": cmd_design,
    "simulate": cmd_simulate,
    "bler": cmd_bler,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcpolar",
        description="Length-adjustable polar coding: construction, "
                    "transmission-scheme design, and Monte Carlo validation.")
    parser.add_argument("--version", action="version",
                        version=f"rcpolar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry (value parsed as JSON)")
        p.add_argument("--seed", type=int, help="base random seed")
        p.add_argument("--threads", type=int, help="worker processes")
        p.add_argument("--out", help="output directory")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return args.func(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
