"""Command-line pipeline: parse configuration, run stages, emit bit-exact
reports.

Configuration is ``key = value`` text (``#`` comments); flags override
file values.  Reports are canonical JSON with sorted keys inside each
section, exact rationals rendered as ``num/den`` strings, and a trailing
newline, so identical configs produce byte-identical output.

Exit codes: 0 when every non-vacuous check passes, 1 when any check
fails, 2 on a pipeline error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .certify import CHECK_NAMES, Certificate, fmt_rat, run_all
from .coarse import analytic_moduli, choose_scale, estimate_moduli, make_coarse_map
from .coupling import build_partition, psi, serialize_density
from .errors import CouplingCertError, PipelineError, PreconditionError
from .groups import make_group
from .windows import build_window, greedy_net, packing_number

_CONFIG_KEYS = {
    "H": "group_H",
    "G": "group_G",
    "map": "map_descriptor",
    "rH": "radius_H",
    "rG": "radius_G",
    "eval": "eval_radius",
    "seed": "seed",
    "scale": "scale_override",
    "checks": "checks",
    "out": "output_path",
    "core": "core_radius",
    "tmax": "t_max",
    "epsilon": "epsilon",
    "mslack": "m_slack",
}
_INT_FIELDS = {"radius_H", "radius_G", "eval_radius", "seed", "scale_override",
               "core_radius", "t_max", "m_slack"}


@dataclass
class RunConfig:
    group_H: str = "Z^1"
    group_G: str = "Z^1"
    map_descriptor: str = "identity"
    radius_H: int = 24
    radius_G: int = 40
    eval_radius: int = 8
    seed: int = 0
    scale_override: int = 0
    core_radius: int = 0
    t_max: int = 0
    m_slack: int = 0
    epsilon: str = "1/2"
    checks: Optional[list] = None
    output_path: Optional[str] = None


# the three built-in demo configurations exercised by `demo`
DEMO_CONFIGS = (
    ("identity-z", RunConfig(group_H="Z^1", group_G="Z^1", map_descriptor="identity",
                             radius_H=24, radius_G=40, eval_radius=8, seed=7)),
    ("scale2-z", RunConfig(group_H="Z^1", group_G="Z^1", map_descriptor="scale:2",
                           radius_H=16, radius_G=40, eval_radius=6)),
    ("shear-z2", RunConfig(group_H="Z^2", group_G="Z^2", map_descriptor="matrix:1,1,0,1",
                           radius_H=10, radius_G=30, eval_radius=2)),
)


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines into RunConfig field values."""
    values: dict = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise PreconditionError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise PreconditionError(f"{path}:{lineno}: unknown key {key!r}")
        values[_CONFIG_KEYS[key]] = value
    return values


def build_config(args) -> RunConfig:
    """Merge config file and flags (flags win) into a validated RunConfig."""
    cfg = RunConfig()
    values: dict = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    for flag, fieldname in _CONFIG_KEYS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[fieldname] = v
    for fieldname, v in values.items():
        if fieldname == "checks":
            if isinstance(v, str):
                v = [c.strip() for c in v.split(",") if c.strip()]
            if v == ["all"]:
                v = None
            setattr(cfg, fieldname, v)
            continue
        if fieldname in _INT_FIELDS and isinstance(v, str):
            try:
                v = int(v)
            except ValueError:
                raise PreconditionError(f"config value for {fieldname} must be an integer: {v!r}")
        setattr(cfg, fieldname, v)
    if cfg.radius_H <= 0 or cfg.radius_G <= 0 or cfg.eval_radius < 0:
        raise PreconditionError("radii must be positive and eval radius nonnegative")
    if cfg.checks:
        unknown = set(cfg.checks) - set(CHECK_NAMES)
        if unknown:
            raise PreconditionError(f"unknown checks: {sorted(unknown)}")
    Fraction(cfg.epsilon)  # validate exact-rational syntax
    return cfg


def render_report(cert: Certificate) -> str:
    return json.dumps(cert.to_report(), indent=2) + "\n"


def emit_report(cert: Certificate, path: Optional[str]) -> int:
    """Write (or print) the canonical report; return the exit code."""
    text = render_report(cert)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if cert.all_pass() else 1


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--H", help="source group descriptor, e.g. Z^1, F_2, Heis")
    p.add_argument("--G", help="target group descriptor")
    p.add_argument("--map", help="identity | scale:k | embed | swap | matrix:a,b,c,d | table:path")
    p.add_argument("--rH", type=int, help="source window radius")
    p.add_argument("--rG", type=int, help="target window radius")
    p.add_argument("--eval", type=int, help="evaluation window radius")
    p.add_argument("--seed", type=int, help="sampling seed")
    p.add_argument("--scale", type=int, help="override the selected scale s")
    p.add_argument("--checks", help="comma-separated check subset, or 'all'")
    p.add_argument("--out", help="report output path (default stdout)")
    p.add_argument("--core", type=int, help="coboundedness core-window radius")
    p.add_argument("--tmax", type=int, help="moduli table extent")
    p.add_argument("--epsilon", help="threshold for [K, eps] membership, e.g. 1/2")
    p.add_argument("--mslack", type=int, help="extra slack added to M (testing aid)")


def _groups_and_map(cfg: RunConfig):
    H = make_group(cfg.group_H)
    G = make_group(cfg.group_G)
    phi = make_coarse_map(cfg.map_descriptor, H, G)
    return H, G, phi


def _moduli_for(cfg: RunConfig, phi, W_H, W_G):
    if phi.has_analytic_moduli:
        return analytic_moduli(phi, 2 * (cfg.radius_G + cfg.radius_H) + 8)
    t_req = cfg.t_max if cfg.t_max else 2 * cfg.radius_H
    return estimate_moduli(phi, W_H, W_G, min(t_req, 2 * cfg.radius_H), strict=False)


def cmd_ball(cfg: RunConfig) -> int:
    H = make_group(cfg.group_H)
    W = build_window(H, cfg.radius_H)
    print(f"group {H.descriptor} radius {W.radius}: {len(W)} elements")
    by_level: dict = {}
    for l in W.lengths:
        by_level[l] = by_level.get(l, 0) + 1
    for l in sorted(by_level):
        print(f"  length {l}: {by_level[l]}")
    return 0


def cmd_moduli(cfg: RunConfig) -> int:
    H, G, phi = _groups_and_map(cfg)
    W_H = build_window(H, cfg.radius_H)
    W_G = build_window(G, cfg.radius_G)
    t_req = cfg.t_max if cfg.t_max else 2 * cfg.radius_H
    m = estimate_moduli(phi, W_H, W_G, min(t_req, 2 * cfg.radius_H), strict=False)
    print(f"# window-estimated moduli of {phi.descriptor}, t_max {m.t_max}")
    print("# t kappa omega pairs")
    for t in range(m.t_max + 1):
        print(f"{t} {m.kappa[t]} {m.omega[t]} {m.pair_counts[t]}")
    return 0


def cmd_net(cfg: RunConfig, s: Optional[int]) -> int:
    H = make_group(cfg.group_H)
    W = build_window(H, cfg.radius_H)
    if s is None:
        raise PreconditionError("net needs --s")
    net = greedy_net(W, s)
    print(f"# maximal {s}-discrete net in {H.descriptor} radius {cfg.radius_H}: "
          f"{len(net.points)} points")
    for y in net.points:
        print(H.format_element(y))
    return 0


def cmd_packing(cfg: RunConfig, separation, diam) -> int:
    G = make_group(cfg.group_G)
    W = build_window(G, cfg.radius_G)
    res = packing_number(W, separation, diam)
    kind = "exact" if res.exact else "upper-bound"
    print(f"M = {res.value} ({kind})")
    if res.note:
        print(f"# {res.note}")
    return 0


def cmd_psi(cfg: RunConfig, h_text: Optional[str]) -> int:
    H, G, phi = _groups_and_map(cfg)
    W_H = build_window(H, cfg.radius_H)
    W_G = build_window(G, cfg.radius_G)
    m = _moduli_for(cfg, phi, W_H, W_G)
    s = cfg.scale_override if cfg.scale_override else choose_scale(m)
    P = build_partition(W_H, W_G, phi, m, s, m_slack=cfg.m_slack)
    h = H.parse_element(h_text if h_text is not None else H.format_element(H.identity))
    sys.stdout.write(serialize_density(psi(P, phi, h)))
    return 0


def cmd_certify(cfg: RunConfig) -> int:
    cert = run_all(cfg)
    return emit_report(cert, cfg.output_path)


def cmd_demo() -> int:
    rows = []
    worst = 0
    for name, cfg in DEMO_CONFIGS:
        cert = run_all(cfg)
        statuses = {c.name: c.status for c in cert.checks}
        failed = [n for n, st in statuses.items() if st == "fail"]
        vacuous = [n for n, st in statuses.items() if st == "vacuous"]
        ok = not failed
        worst = max(worst, 0 if ok else 1)
        rows.append((name, cert.constants["s"], cert.constants["M"],
                     "pass" if ok else "FAIL",
                     ",".join(vacuous) if vacuous else "-"))
    print(f"{'config':<12} {'s':>3} {'M':>5} {'verdict':>8}  vacuous")
    for name, s, M, verdict, vac in rows:
        print(f"{name:<12} {fmt_rat(s):>3} {M:>5} {verdict:>8}  {vac}")
    return worst


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="couplingcert",
        description="Finite-window certificates for topological couplings "
                    "built from coarse equivalences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("ball", "moduli", "net", "packing", "psi", "certify"):
        p = sub.add_parser(name)
        _add_common_flags(p)
        if name == "net":
            p.add_argument("--s", type=int, help="net scale")
        if name == "packing":
            p.add_argument("--sep", type=int, default=3, help="separation (default 3)")
            p.add_argument("--diam", type=int, required=True, help="diameter bound")
        if name == "psi":
            p.add_argument("--h", dest="h_text", help="evaluation point (element syntax)")
    sub.add_parser("demo")

    args = parser.parse_args(argv)
    try:
        if args.command == "demo":
            return cmd_demo()
        cfg = build_config(args)
        if args.command == "ball":
            return cmd_ball(cfg)
        if args.command == "moduli":
            return cmd_moduli(cfg)
        if args.command == "net":
            return cmd_net(cfg, args.s)
        if args.command == "packing":
            return cmd_packing(cfg, args.sep, args.diam)
        if args.command == "psi":
            return cmd_psi(cfg, args.h_text)
        if args.command == "certify":
            return cmd_certify(cfg)
        raise PreconditionError(f"unknown command {args.command!r}")
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CouplingCertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
