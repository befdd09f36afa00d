"""Command-line front end.

Subcommands: equilibrium | blocks | bifurcations | stability | verify | sweep.
Reports are emitted as JSON (default) or CSV, with sorted keys and fixed
17-significant-digit float formatting so identical configurations produce
byte-identical output.

Exit codes: 0 success (possibly with an empty payload), 2 invalid input,
3 every requested amplitude is degenerate, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import blocks, classify, orbits
from .model import (RingSystem, cubic_potential, custom_potential,
                    gradient_V, saturable_potential, standing_wave)
from .symmetry import assemble_P, block_extract, symmetry_residual

SCHEMA_VERSION = "1"

CSV_COLUMNS = ["n", "k", "mu", "alpha", "gamma", "delta", "nu_minus", "nu_plus",
               "eta_minus", "eta_plus", "isotropy", "regime", "stable"]

_EXIT_OK = 0
_EXIT_USAGE = 2
_EXIT_ALL_DEGENERATE = 3
_EXIT_NUMERICAL = 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    n: int | None = None
    potential: str = "cubic"
    h_expr: str | None = None
    h_prime_expr: str | None = None
    g_expr: str | None = None
    mu: float | None = None
    mu_range: str | None = None
    k: int | None = None
    branch: str | None = None
    steps: int = 24
    ds: float = 0.03
    p_max: int = 256
    nu_min: float | None = None
    nu_max: float | None = None
    t_final: float = 100.0
    dt: float = 0.01
    format: str = "json"
    out: str | None = None
    config: str | None = None


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _to_json(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key in sorted(obj):
            items.append(f'{pad}  "{key}": {_to_json(obj[key], indent + 1)}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {_to_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if math.isinf(obj):
            return '"inf"' if obj > 0 else '"-inf"'
        return _fmt(obj)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(obj)}")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _fmt(v)
    return str(v)


def _to_csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _build_potential(cfg: RunConfig):
    if cfg.potential == "cubic":
        return cubic_potential()
    if cfg.potential == "saturable":
        return saturable_potential()
    if cfg.potential == "custom":
        if not cfg.h_expr or not cfg.h_prime_expr:
            raise ConfigError("custom potential needs --h-expr and --h-prime-expr")
        h = _expr_fn(cfg.h_expr)
        hp = _expr_fn(cfg.h_prime_expr)
        G = _expr_fn(cfg.g_expr) if cfg.g_expr else None
        pot = custom_potential(h, hp, G)
        pot.validate()
        return pot
    raise ConfigError(f"unknown potential kind: {cfg.potential}")


def _expr_fn(expr: str):
    """Expression of s evaluated with the numpy namespace."""
    namespace = {"np": np, "exp": np.exp, "log": np.log, "log1p": np.log1p,
                 "sin": np.sin, "cos": np.cos, "tan": np.tan, "sqrt": np.sqrt,
                 "tanh": np.tanh, "pi": np.pi, "abs": np.abs}
    code = compile(expr, "<potential-expr>", "eval")

    def fn(s, _code=code, _ns=namespace):
        return eval(_code, {"__builtins__": {}}, dict(_ns, s=np.asarray(s, dtype=float)))

    return fn


def _make_ring(cfg: RunConfig, mu: float) -> RingSystem:
    if cfg.n is None:
        raise ConfigError("--n is required")
    try:
        return RingSystem(n=cfg.n, mu=mu, potential=_build_potential(cfg))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _mu_values(cfg: RunConfig) -> list[float]:
    if cfg.mu_range:
        try:
            a, b, count = cfg.mu_range.split(":")
            a, b, count = float(a), float(b), int(count)
        except ValueError as exc:
            raise ConfigError("--mu-range must be start:stop:count") from exc
        if count < 1 or not (0 < a <= b):
            raise ConfigError("empty or invalid mu range")
        return [float(m) for m in np.linspace(a, b, count)]
    if cfg.mu is None:
        raise ConfigError("either --mu or --mu-range is required")
    if cfg.mu <= 0:
        raise ConfigError("mu must be positive")
    return [cfg.mu]


def _config_echo(cfg: RunConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(RunConfig)}


def _report(cfg: RunConfig, payload) -> dict:
    return {"schema_version": SCHEMA_VERSION, "config": _config_echo(cfg),
            "payload": payload}


def _point_record(mu: float, pt: classify.BifurcationPoint) -> dict:
    return {
        "mu": mu, "k": pt.k, "nu": pt.nu, "period": pt.period, "eta": pt.eta,
        "root": pt.root, "isotropy": pt.isotropy.label, "regime": pt.regime,
        "admissibility_note": pt.admissibility_note,
    }


def _bifurcation_rows(ring: RingSystem, mu: float,
                      points: list[classify.BifurcationPoint],
                      stable: bool) -> list[list]:
    """One CSV row per mode k = 1..n-1 with both roots side by side."""
    rows = []
    by_k: dict[int, dict[str, classify.BifurcationPoint]] = {}
    for pt in points:
        by_k.setdefault(pt.k, {})[pt.root] = pt
    for k in range(1, ring.n):
        c = blocks.coefficients(ring.n, k)
        plus = by_k.get(k, {}).get("plus")
        minus = by_k.get(k, {}).get("minus")
        some = plus or minus
        rows.append([
            ring.n, k, mu, c.alpha, c.gamma,
            "-" if c.delta is None else _fmt(c.delta),
            minus.nu if minus else None, plus.nu if plus else None,
            minus.eta if minus else None, plus.eta if plus else None,
            f"Z~_{ring.n}({k})", some.regime if some else "", stable,
        ])
    return rows


# ---------------------------------------------------------------------------
# subcommands


def cmd_equilibrium(cfg: RunConfig):
    mus = _mu_values(cfg)
    ring = _make_ring(cfg, mus[0])
    a_bar, omega = standing_wave(ring)
    res = float(np.abs(gradient_V(ring, a_bar)).max())
    payload = {
        "a_bar": [[float(a_bar[2 * j]), float(a_bar[2 * j + 1])] for j in range(ring.n)],
        "omega": omega,
        "gradient_residual": res,
    }
    rows = [[j + 1, a_bar[2 * j], a_bar[2 * j + 1]] for j in range(ring.n)]
    return _report(cfg, payload), ["j", "re", "im"], rows, _EXIT_OK


def cmd_blocks(cfg: RunConfig):
    mus = _mu_values(cfg)
    ring = _make_ring(cfg, mus[0])
    from .model import hessian_V
    P = assemble_P(ring.n)
    decomp = block_extract(P, hessian_V(ring, standing_wave(ring)[0]))
    records = []
    rows = []
    for k in range(1, ring.n + 1):
        c = blocks.coefficients(ring.n, k)
        B = blocks.block_B(ring, k)
        extract_err = float(np.abs(B - decomp.blocks[k - 1]).max())
        records.append({
            "k": k, "alpha": c.alpha, "gamma": c.gamma,
            "delta": c.delta,
            "B": [[[float(B[i, j].real), float(B[i, j].imag)] for j in range(2)]
                  for i in range(2)],
            "extract_residual": extract_err,
        })
        rows.append([k, c.alpha, c.gamma, "-" if c.delta is None else _fmt(c.delta),
                     _fmt(B[0, 0].real), _fmt(B[0, 1].imag), _fmt(B[1, 1].real),
                     extract_err])
    payload = {"mu": ring.mu, "blocks": records,
               "off_block_residual": decomp.off_block_residual}
    header = ["k", "alpha", "gamma", "delta", "B00_re", "B01_im", "B11_re",
              "extract_residual"]
    return _report(cfg, payload), header, rows, _EXIT_OK


def cmd_bifurcations(cfg: RunConfig):
    mus = _mu_values(cfg)
    records = []
    rows = []
    excluded = []
    degenerate_failures = 0
    for mu in mus:
        ring = _make_ring(cfg, mu)
        stable = blocks.linear_stability(ring).stable
        try:
            points = classify.enumerate_bifurcations(ring)
        except classify.DegenerateAmplitude as exc:
            excluded.append({"mu": mu, "k": exc.k})
            degenerate_failures += 1
            continue
        if cfg.k is not None:
            points = [pt for pt in points if pt.k == cfg.k]
        if cfg.nu_min is not None:
            points = [pt for pt in points if pt.nu >= cfg.nu_min]
        if cfg.nu_max is not None:
            points = [pt for pt in points if pt.nu <= cfg.nu_max]
        records.extend(_point_record(mu, pt) for pt in points)
        rows.extend(_bifurcation_rows(ring, mu, points, stable))
    if degenerate_failures == len(mus):
        payload = {"points": [], "excluded": excluded}
        return _report(cfg, payload), CSV_COLUMNS, [], _EXIT_ALL_DEGENERATE
    records.sort(key=lambda r: (r["mu"], r["k"], r["nu"]))
    payload = {"points": records, "excluded": excluded}
    return _report(cfg, payload), CSV_COLUMNS, rows, _EXIT_OK


def cmd_stability(cfg: RunConfig):
    mus = _mu_values(cfg)
    ring = _make_ring(cfg, mus[0])
    verdict = blocks.linear_stability(ring)
    spectrum = blocks.full_spectrum_oracle(ring)
    oracle = blocks.spectrum_max_real(spectrum)
    payload = {
        "stable": verdict.stable,
        "margin": verdict.margin,
        "method": verdict.method,
        "oracle_max_real_part": oracle,
        "oracle_agrees": verdict.stable == (oracle <= 1e-8),
    }
    rows = [[ring.n, ring.mu, verdict.stable, verdict.margin, verdict.method, oracle]]
    header = ["n", "mu", "stable", "margin", "method", "oracle_max_real_part"]
    return _report(cfg, payload), header, rows, _EXIT_OK


def cmd_verify(cfg: RunConfig):
    mus = _mu_values(cfg)
    ring = _make_ring(cfg, mus[0])
    if cfg.k is None or cfg.branch not in ("plus", "minus"):
        raise ConfigError("verify needs --k and --branch {plus,minus}")
    if cfg.k == ring.n:
        raise ConfigError("k = n carries no bifurcation with full symmetry")
    points = classify.enumerate_bifurcations(ring)
    matches = [pt for pt in points if pt.k == cfg.k and pt.root == cfg.branch]
    if not matches:
        raise ConfigError(
            f"no {cfg.branch}-branch bifurcation point for k = {cfg.k} at mu = {ring.mu}")
    bif = matches[0]
    exit_code = _EXIT_OK
    try:
        branch = orbits.continue_branch(ring, bif, steps=cfg.steps, ds=cfg.ds,
                                        p_max=cfg.p_max)
        failure = None
    except (orbits.NoConvergence, orbits.SingularJacobian) as exc:
        branch = orbits.ContinuationBranch(origin=bif, points=[],
                                           termination="solver-error")
        failure = str(exc)
        exit_code = _EXIT_NUMERICAL
    if branch.termination == "step-failure":
        exit_code = _EXIT_NUMERICAL
        failure = "continuation stopped early after repeated step halvings"
    point_records = []
    rows = []
    for bp in branch.points:
        sym = symmetry_residual(bp.orbit, cfg.k)
        point_records.append({
            "amplitude": bp.amplitude, "nu": bp.nu,
            "residual": bp.orbit.residual_norm,
            "symmetry_residual": max(sym.pattern, sym.norms),
        })
        rows.append([bp.amplitude, bp.nu, bp.orbit.residual_norm,
                     max(sym.pattern, sym.norms)])
    extrapolated = orbits.extrapolate_nu_to_zero(branch) if branch.points else None
    passed = (extrapolated is not None
              and abs(extrapolated - bif.nu) <= 1e-4
              and exit_code == _EXIT_OK)
    payload = {
        "k": cfg.k, "branch": cfg.branch, "predicted_nu": bif.nu,
        "points": point_records,
        "extrapolated_nu": extrapolated,
        "tolerance": 1e-4,
        "passed": passed,
        "termination": branch.termination,
        "failure": failure,
    }
    header = ["amplitude", "nu", "residual", "symmetry_residual"]
    return _report(cfg, payload), header, rows, exit_code


def _interval_json(iv) -> list:
    return [iv[0], "inf" if math.isinf(iv[1]) else iv[1]]


def _regimes_json(report: classify.RegimeReport) -> dict:
    return {
        "n": report.n,
        "potential": report.potential_kind,
        "entries": [{
            "k": e.k, "condition": e.condition,
            "mu_interval": _interval_json(e.mu_interval),
            "two_sided": e.two_sided, "mirror_of": e.mirror_of,
        } for e in report.entries],
        "excluded": [{"k": k, "mu": mu} for k, mu in report.excluded],
        "stability": [_interval_json(iv) for iv in report.stability],
        "notes": list(report.notes),
    }


def cmd_sweep(cfg: RunConfig):
    if not cfg.mu_range:
        raise ConfigError("sweep needs --mu-range")
    mus = _mu_values(cfg)
    if cfg.potential == "cubic":
        regimes = classify.schrodinger_regimes(cfg.n)
    elif cfg.potential == "saturable":
        regimes = classify.saturable_regimes(cfg.n)
    else:
        regimes = None
    samples = []
    rows = []
    excluded = []
    degenerate_failures = 0
    for mu in mus:
        ring = _make_ring(cfg, mu)
        stable = blocks.linear_stability(ring).stable
        try:
            points = classify.enumerate_bifurcations(ring)
        except classify.DegenerateAmplitude as exc:
            excluded.append({"mu": mu, "k": exc.k})
            degenerate_failures += 1
            continue
        samples.append({
            "mu": mu, "stable": stable, "count": len(points),
            "points": sorted((_point_record(mu, pt) for pt in points),
                             key=lambda r: (r["mu"], r["k"], r["nu"])),
        })
        rows.extend(_bifurcation_rows(ring, mu, points, stable))
    if degenerate_failures == len(mus):
        payload = {"regimes": _regimes_json(regimes) if regimes else None,
                   "samples": [], "excluded": excluded}
        return _report(cfg, payload), CSV_COLUMNS, [], _EXIT_ALL_DEGENERATE
    payload = {"regimes": _regimes_json(regimes) if regimes else None,
               "samples": samples, "excluded": excluded}
    return _report(cfg, payload), CSV_COLUMNS, rows, _EXIT_OK


# ---------------------------------------------------------------------------
# argument handling


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnlsring",
        description="Bifurcation analysis of a ring of coupled dNLS oscillators")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
            ("equilibrium", "rotating-wave equilibrium and residual"),
            ("blocks", "mode-block coefficients and matrices"),
            ("bifurcations", "forced bifurcation points"),
            ("stability", "linear stability verdict with spectral cross-check"),
            ("verify", "continue a branch and verify the predicted frequency"),
            ("sweep", "regime report and bifurcation counts over a mu range")]:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--n", type=int)
        sp.add_argument("--potential", choices=["cubic", "saturable", "custom"])
        sp.add_argument("--h-expr", dest="h_expr")
        sp.add_argument("--h-prime-expr", dest="h_prime_expr")
        sp.add_argument("--g-expr", dest="g_expr")
        sp.add_argument("--mu", type=float)
        sp.add_argument("--mu-range", dest="mu_range")
        sp.add_argument("--format", choices=["json", "csv"])
        sp.add_argument("--out")
        sp.add_argument("--config")
        if name in ("bifurcations", "sweep", "verify"):
            sp.add_argument("--k", type=int)
            sp.add_argument("--nu-min", dest="nu_min", type=float)
            sp.add_argument("--nu-max", dest="nu_max", type=float)
        if name == "verify":
            sp.add_argument("--branch", choices=["plus", "minus"])
            sp.add_argument("--steps", type=int)
            sp.add_argument("--ds", type=float)
            sp.add_argument("--p-max", dest="p_max", type=int)
        if name == "stability":
            sp.add_argument("--t-final", dest="t_final", type=float)
            sp.add_argument("--dt", type=float)
    return parser


_CONFIG_TYPES = {
    "n": int, "k": int, "steps": int, "p_max": int,
    "mu": float, "ds": float, "nu_min": float, "nu_max": float,
    "t_final": float, "dt": float,
}


def _load_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_no}: expected KEY=VALUE")
                key, value = (part.strip() for part in line.split("=", 1))
                key = key.replace("-", "_")
                if key not in {f.name for f in fields(RunConfig)}:
                    raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
                caster = _CONFIG_TYPES.get(key, str)
                values[key] = caster(value)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return values


def _merge_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    file_values = _load_config_file(ns.config) if getattr(ns, "config", None) else {}
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        flag = getattr(ns, f.name, None)
        if flag is not None:
            setattr(cfg, f.name, flag)
        elif f.name in file_values:
            setattr(cfg, f.name, file_values[f.name])
    if cfg.format not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    return cfg


_COMMANDS = {
    "equilibrium": cmd_equilibrium,
    "blocks": cmd_blocks,
    "bifurcations": cmd_bifurcations,
    "stability": cmd_stability,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return _EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        cfg = _merge_config(ns)
        report, header, rows, code = _COMMANDS[ns.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except classify.DegenerateAmplitude as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_ALL_DEGENERATE
    except (orbits.NoConvergence, orbits.SingularJacobian, blocks.SingularBlock,
            blocks.SearchRangeExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    if cfg.format == "json":
        text = _to_json(report) + "\n"
    else:
        text = _to_csv(header, rows)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def entry() -> None:  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
