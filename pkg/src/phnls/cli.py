"""Command line front end: config files, subcommands, deterministic artifacts.

Subcommands
    simulate-pnls     march the confined cubic flow, write CSV + snapshots
    simulate-dcr      march the resonant model, write CSV + snapshots
    compare-profiles  confined-vs-resonant comparison table over lambdas
    tensor            compute | dump | check the coupling tensor
    diagnose          one diagnostic CSV row per snapshot file

Configuration is an INI file with sections [grid], [run], [initial] and
[diagnostics]; every key can be overridden by the flag of the same name
(``--n-y``, ``--dt``, ...).  All floats are written with 17 significant
digits so the CSV round-trips doubles exactly; identical config and seed
give bit-identical outputs on one platform.

Exit codes: 0 success, 2 validation failure, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from .dcr import simulate_dcr
from .hermite import basis_matrix, build_quadrature
from .pnls import NumericalAbort, _step_count, simulate_pnls
from .state import (DEFAULT_EPS0, DiagnosticRecord, Field, dealias,
                    energy_pnls, load_snapshot, make_grid, norm_report,
                    phys_to_spectral, save_snapshot)
from .tensor import compute_tensor, tensor_checksum

CSV_HEADER = "step,t,mass,energy,e0,l2h1,sigma,l4_integrand,morawetz,halfderiv"
PROFILE_HEADER = "lambda,t,err_l2h1,err_l4acc,mass_u,mass_w"

_MASK64 = (1 << 64) - 1


def splitmix64(seed: int):
    """Deterministic 64-bit stream (splitmix-style); yields uniform [0,1)."""
    z = seed & _MASK64
    while True:
        z = (z + 0x9E3779B97F4A7C15) & _MASK64
        t = z
        t = ((t ^ (t >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        t = ((t ^ (t >> 27)) * 0x94D049BB133111EB) & _MASK64
        t ^= t >> 31
        yield (t >> 11) * 2.0 ** -53


def _fmt(x: float) -> str:
    return "%.17g" % x


# ---------------------------------------------------------------------------
# configuration

class ConfigError(ValueError):
    """Config rejection; str() carries file and line when known."""

    def __init__(self, source: str, lineno: int, msg: str):
        self.source = source
        self.lineno = lineno
        loc = f"{source}:{lineno}" if lineno > 0 else source
        super().__init__(f"{loc}: {msg}")


@dataclass(frozen=True)
class RunConfig:
    n_y: int
    n_h: int
    box_len: float = 32.0
    quad_count: int = 0            # 0 means the 2*n_h default
    dt: float = 1e-3
    t_end: float = 1.0
    system: str = ""      # resolved by the subcommand when left empty
    lambda_list: tuple = (2.0, 4.0)
    eps0: float = DEFAULT_EPS0
    nonlinearity: str = "defocusing"
    order: int = 2
    kind: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0
    mode_n: int = 0
    perturb: float = 0.0
    k1: int = 0
    k2: int = 0
    path: str = ""
    seed: int = 0
    snapshot_every: int = 0
    diag_every: int = 0

    @property
    def coupling(self) -> float:
        return 0.0 if self.nonlinearity == "off" else 1.0


_SCHEMA = {
    "grid": ("n_y", "box_len", "n_h", "quad_count"),
    "run": ("dt", "t_end", "system", "lambda_list", "eps0", "nonlinearity",
            "order"),
    "initial": ("kind", "amplitude", "width", "mode_n", "perturb", "k1",
                "k2", "path", "seed"),
    "diagnostics": ("snapshot_every", "diag_every"),
}
_REQUIRED = (("grid", "n_y"), ("grid", "n_h"))
_FLAG_SECTION = {k: s for s, keys in _SCHEMA.items() for k in keys}


def _find_line(lines, section: str, key: str | None) -> int:
    """Best-effort line number of `key` inside `section` (or of the header)."""
    header = 0
    inside = False
    for i, raw in enumerate(lines, start=1):
        text = raw.strip()
        if text.startswith("["):
            inside = text == f"[{section}]"
            if inside:
                header = i
        elif inside and key is not None:
            name = text.split("=", 1)[0].split(":", 1)[0].strip()
            if name == key:
                return i
    return header


def _convert(source, lineno, key, raw, conv, what):
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError(source, lineno, f"{key} must be {what}, "
                          f"got {raw!r}") from None


def parse_config(path: str, overrides: dict | None = None) -> RunConfig:
    """Read and validate a run configuration.

    overrides maps config keys to raw strings (from command line flags) and
    is applied after the file; errors in overridden values are reported
    against 'command line' instead of a file line.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                       interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
        parser.read_string("".join(lines), source=path)
    except OSError as exc:
        raise ConfigError(str(path), 0, f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", 0) or 0
        raise ConfigError(str(path), lineno,
                          f"malformed config: {exc.message}") from None

    src = str(path)
    values: dict[str, str] = {}
    where: dict[str, tuple[str, int]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(src, _find_line(lines, section, None),
                              f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(src, _find_line(lines, section, key),
                                  f"unknown key {key} in [{section}]")
            values[key] = parser[section][key]
            where[key] = (src, _find_line(lines, section, key))
    if overrides:
        for key, raw in overrides.items():
            if raw is None:
                continue
            if key not in _FLAG_SECTION:
                raise ConfigError("command line", 0, f"unknown key {key}")
            values[key] = raw
            where[key] = ("command line", 0)

    for section, key in _REQUIRED:
        if key not in values:
            raise ConfigError(src, _find_line(lines, section, None),
                              f"missing required key {key} in [{section}]")

    def get(key, conv, what, default):
        if key not in values:
            return default
        s, n = where[key]
        return _convert(s, n, key, values[key], conv, what)

    def loc(key):
        return where.get(key, (src, 0))

    n_y = get("n_y", int, "an integer", None)
    if n_y < 4 or (n_y & (n_y - 1)) != 0:
        raise ConfigError(*loc("n_y"), f"n_y must be a power of two (>= 4), "
                          f"got {n_y}")
    n_h = get("n_h", int, "an integer", None)
    if n_h < 1:
        raise ConfigError(*loc("n_h"), f"n_h must be positive, got {n_h}")
    box_len = get("box_len", float, "a number", 32.0)
    if not box_len > 0:
        raise ConfigError(*loc("box_len"),
                          f"box_len must be positive, got {box_len}")
    quad_count = get("quad_count", int, "an integer", 2 * n_h)
    if quad_count < 2 * n_h:
        raise ConfigError(*loc("quad_count"),
                          f"quad_count={quad_count} cannot integrate the "
                          f"cubic projection exactly at n_h={n_h}: "
                          f"requires quad_count >= {2 * n_h}")

    dt = get("dt", float, "a number", 1e-3)
    if not 0.0 < dt <= 0.1:
        raise ConfigError(*loc("dt"), f"dt must lie in (0, 0.1], got {dt}")
    t_end = get("t_end", float, "a number", 1.0)
    system = get("system", str, "a word", "")
    if system not in ("pnls", "dcr", ""):
        raise ConfigError(*loc("system"),
                          f"system must be pnls or dcr, got {system!r}")

    def lam_conv(raw):
        return tuple(float(tok) for tok in raw.split(","))
    lambda_list = get("lambda_list", lam_conv, "comma-separated numbers",
                      (2.0, 4.0))
    for lam in lambda_list:
        log2 = math.log2(lam) if lam > 0 else -1.0
        if lam <= 0 or abs(log2 - round(log2)) > 1e-12:
            raise ConfigError(*loc("lambda_list"),
                              f"lambda_list entries must be powers of two, "
                              f"got {lam}")
    eps0 = get("eps0", float, "a number", DEFAULT_EPS0)
    if not 0.0 < eps0 < 0.5:
        raise ConfigError(*loc("eps0"),
                          f"eps0 must lie in (0, 1/2), got {eps0}")
    nonlinearity = get("nonlinearity", str, "a word", "defocusing")
    if nonlinearity == "focusing":
        raise ConfigError(*loc("nonlinearity"),
                          "the focusing sign is rejected: the cubic term "
                          "is defocusing (use defocusing or off)")
    if nonlinearity not in ("defocusing", "off"):
        raise ConfigError(*loc("nonlinearity"),
                          f"nonlinearity must be defocusing or off, "
                          f"got {nonlinearity!r}")
    order = get("order", int, "an integer", 2)
    if order not in (2, 4):
        raise ConfigError(*loc("order"), f"order must be 2 or 4, got {order}")

    kind = get("kind", str, "a word", "gaussian")
    if kind not in ("gaussian", "mode", "file"):
        raise ConfigError(*loc("kind"),
                          f"kind must be gaussian, mode or file, got {kind!r}")
    amplitude = get("amplitude", float, "a number", 1.0)
    width = get("width", float, "a number", 1.0)
    if not width > 0:
        raise ConfigError(*loc("width"), f"width must be positive, got {width}")
    mode_n = get("mode_n", int, "an integer", 0)
    if not 0 <= mode_n < n_h:
        raise ConfigError(*loc("mode_n"),
                          f"mode_n must lie in [0, {n_h}), got {mode_n}")
    perturb = get("perturb", float, "a number", 0.0)
    if perturb < 0:
        raise ConfigError(*loc("perturb"),
                          f"perturb must be nonnegative, got {perturb}")
    k1 = get("k1", int, "an integer", 0)
    k2 = get("k2", int, "an integer", 0)
    if kind == "mode":
        band = n_y // 3
        if max(abs(k1), abs(k2)) > band:
            raise ConfigError(*loc("k1" if abs(k1) > band else "k2"),
                              f"mode ({k1},{k2}) lies outside the retained "
                              f"band |m| <= {band} for n_y={n_y}")
    file_path = get("path", str, "a path", "")
    if kind == "file" and not file_path:
        raise ConfigError(*loc("kind"),
                          "kind=file requires the path key in [initial]")
    seed = get("seed", int, "an integer", 0)
    if seed < 0:
        raise ConfigError(*loc("seed"), f"seed must be nonnegative, got {seed}")
    snapshot_every = get("snapshot_every", int, "an integer", 0)
    diag_every = get("diag_every", int, "an integer", 0)
    if snapshot_every < 0 or diag_every < 0:
        key = "snapshot_every" if snapshot_every < 0 else "diag_every"
        raise ConfigError(*loc(key), f"{key} must be nonnegative")

    return RunConfig(
        n_y=n_y, n_h=n_h, box_len=box_len, quad_count=quad_count, dt=dt,
        t_end=t_end, system=system, lambda_list=lambda_list, eps0=eps0,
        nonlinearity=nonlinearity, order=order, kind=kind,
        amplitude=amplitude, width=width, mode_n=mode_n, perturb=perturb,
        k1=k1, k2=k2, path=file_path, seed=seed,
        snapshot_every=snapshot_every, diag_every=diag_every)


# ---------------------------------------------------------------------------
# initial data

def build_initial(cfg: RunConfig) -> Field:
    """Assemble the configured initial field (dealiased, time from source)."""
    grid = make_grid(cfg.n_y, cfg.box_len, cfg.n_h, quad_count=cfg.quad_count)
    if cfg.kind == "file":
        field = load_snapshot(cfg.path)
        g = field.grid
        if (g.n_y, g.box_len, g.n_h) != (cfg.n_y, cfg.box_len, cfg.n_h):
            raise ConfigError(cfg.path, 0,
                              f"snapshot grid (n_y={g.n_y}, box_len="
                              f"{g.box_len}, n_h={g.n_h}) does not match the "
                              f"configured (n_y={cfg.n_y}, box_len="
                              f"{cfg.box_len}, n_h={cfg.n_h})")
        return dealias(field)

    coeffs = np.zeros((cfg.n_y, cfg.n_y, cfg.n_h), dtype=np.complex128)
    if cfg.kind == "gaussian":
        y, _, _ = grid.coords()
        env = cfg.amplitude * np.exp(-(y[:, None] ** 2 + y[None, :] ** 2)
                                     / (2.0 * cfg.width ** 2))
        c_phys = np.zeros_like(coeffs)
        c_phys[:, :, cfg.mode_n] = env
        coeffs = phys_to_spectral(grid, c_phys)
        if cfg.perturb > 0.0:
            stream = splitmix64(cfg.seed)
            noise = np.empty(coeffs.shape, dtype=np.complex128)
            flat = noise.reshape(-1)
            for i in range(flat.size):
                re = 2.0 * next(stream) - 1.0
                im = 2.0 * next(stream) - 1.0
                flat[i] = complex(re, im)
            coeffs = coeffs + cfg.perturb * cfg.amplitude * noise
    else:                                   # mode
        coeffs[cfg.k1 % cfg.n_y, cfg.k2 % cfg.n_y, cfg.mode_n] = \
            cfg.amplitude * cfg.box_len
    return dealias(Field(grid=grid, coeffs=coeffs, time=0.0))


# ---------------------------------------------------------------------------
# CSV plumbing

def _record_row(rec: DiagnosticRecord) -> str:
    r = rec.report
    cols = [str(rec.step), _fmt(rec.time), _fmt(r.mass), _fmt(r.energy),
            _fmt(r.kinetic_e0), _fmt(r.l2h1), _fmt(r.sigma),
            _fmt(r.l4_integrand), _fmt(rec.morawetz), _fmt(rec.halfderiv)]
    return ",".join(cols)


def _write_lines(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


# ---------------------------------------------------------------------------
# subcommands

def _run_simulate(cfg: RunConfig, outdir: str) -> int:
    os.makedirs(outdir, exist_ok=True)
    init = build_initial(cfg)
    n_steps = _step_count(init.time, cfg.t_end, cfg.dt)
    diag = cfg.diag_every if cfg.diag_every > 0 else max(n_steps, 1)
    emit_every = math.gcd(diag, cfg.snapshot_every) \
        if cfg.snapshot_every > 0 else diag

    rows = []

    def sink(rec: DiagnosticRecord) -> None:
        if rec.step % diag == 0 or rec.step == n_steps:
            rows.append(_record_row(rec))
        if cfg.snapshot_every > 0 and rec.step % cfg.snapshot_every == 0:
            save_snapshot(rec.field,
                          os.path.join(outdir, f"snapshot_{rec.step:08d}.bin"))

    try:
        if cfg.system == "pnls":
            final = simulate_pnls(init, cfg.t_end, cfg.dt, sinks=(sink,),
                                  coupling=cfg.coupling, order=cfg.order,
                                  diag_every=emit_every, eps0=cfg.eps0)
        else:
            tensor = compute_tensor(cfg.n_h, init.grid.rule,
                                    with_overlaps=cfg.n_h <= 32)
            final = simulate_dcr(init, cfg.t_end, cfg.dt, tensor,
                                 sinks=(sink,), coupling=cfg.coupling,
                                 order=cfg.order, diag_every=emit_every,
                                 eps0=cfg.eps0)
    except NumericalAbort:
        # keep whatever diagnostics were emitted before the blow-up
        _write_lines(os.path.join(outdir, "diagnostics.csv"), CSV_HEADER, rows)
        raise

    _write_lines(os.path.join(outdir, "diagnostics.csv"), CSV_HEADER, rows)
    save_snapshot(final, os.path.join(outdir, "final.bin"))
    return 0


def _run_compare(cfg: RunConfig, outdir: str, n_outputs: int) -> int:
    from .analysis import profile_compare
    os.makedirs(outdir, exist_ok=True)
    grid = make_grid(cfg.n_y, cfg.box_len, cfg.n_h, quad_count=cfg.quad_count)
    base = build_initial(cfg)
    tensor = compute_tensor(cfg.n_h, grid.rule)
    results = profile_compare(base, cfg.lambda_list, cfg.t_end, cfg.dt,
                              grid=grid, tensor=tensor,
                              coupling=cfg.coupling, n_outputs=n_outputs,
                              order=cfg.order)
    rows = []
    for cmp in results:
        for lam, t, e1, e2, mu, mw in cmp.rows():
            rows.append(",".join([_fmt(lam), _fmt(t), _fmt(e1), _fmt(e2),
                                  _fmt(mu), _fmt(mw)]))
    _write_lines(os.path.join(outdir, "profiles.csv"), PROFILE_HEADER, rows)
    return 0


def _resonant_triples(n_max: int):
    for n1 in range(n_max):
        for n2 in range(n_max):
            for n3 in range(n_max):
                n = n1 - n2 + n3
                if 0 <= n < n_max:
                    yield n1, n2, n3, n


def _tensor_check(n_max: int, out) -> int:
    """Symmetry, parity and brute-force checks; prints the checksum."""
    rule = build_quadrature(2 * n_max, n_max)
    t = compute_tensor(n_max, rule, with_overlaps=True)
    d = t.values
    checks = []

    checks.append(("finite", bool(np.all(np.isfinite(d)))))
    sym13 = float(np.max(np.abs(d - d.transpose(2, 1, 0))))
    checks.append(("symmetry n1<->n3", sym13 < 1e-12))
    # swapping the conjugated pair (n2 <-> n) preserves the resonant set
    sym2n = 0.0
    for n1, n2, n3, n in _resonant_triples(n_max):
        sym2n = max(sym2n, abs(d[n1, n2, n3] - d[n1, n, n3]))
    checks.append(("symmetry n2<->n", sym2n < 1e-12))
    # parity: the quadruple product integrates to zero for odd total degree
    odd = 0.0
    for n1 in range(n_max):
        for n2 in range(n_max):
            for n3 in range(n_max):
                for n4 in range(n_max):
                    if (n1 + n2 + n3 + n4) % 2 == 1:
                        odd = max(odd, abs(t.quad_overlaps[n1, n2, n3, n4]))
    checks.append(("odd parity vanishes", odd < 1e-12))
    # resonant slice of the dense overlaps reproduces the tensor
    gather = 0.0
    for n1, n2, n3, n in _resonant_triples(n_max):
        gather = max(gather,
                     abs(t.quad_overlaps[n1, n2, n3, n] - d[n1, n2, n3]))
    checks.append(("overlap gather", gather < 1e-13))
    # dense-grid oracle for every resonant entry
    x = np.linspace(-10.0, 10.0, 4001)
    basis = basis_matrix(x, n_max)
    worst = 0.0
    for n1, n2, n3, n in _resonant_triples(n_max):
        prod = basis[:, n1] * basis[:, n2] * basis[:, n3] * basis[:, n]
        brute = np.trapezoid(prod, x)
        worst = max(worst, abs(brute - d[n1, n2, n3]))
    checks.append(("dense-grid oracle", worst < 1e-8))

    ok = all(flag for _, flag in checks)
    for name, flag in checks:
        print(f"{name}: {'ok' if flag else 'FAIL'}", file=out)
    print(f"checksum {_fmt(tensor_checksum(t))}", file=out)
    return 0 if ok else 2


def _tensor_cmd(args, out) -> int:
    n_max = args.nmax
    if n_max < 1:
        print(f"error: --nmax must be positive, got {n_max}", file=sys.stderr)
        return 2
    if args.action == "check":
        return _tensor_check(n_max, out)
    count = args.count if args.count else 2 * n_max
    rule = build_quadrature(count, n_max)
    t = compute_tensor(n_max, rule, with_overlaps=args.with_overlaps)
    if args.action == "compute":
        if not args.out:
            print("error: tensor compute requires --out", file=sys.stderr)
            return 2
        payload = {"n_max": np.int64(t.n_max), "values": t.values}
        if t.quad_overlaps is not None:
            payload["quad_overlaps"] = t.quad_overlaps
        np.savez(args.out, **payload)
        print(f"wrote tensor n_max={n_max} to {args.out}", file=out)
        return 0
    # dump: CSV of the resonant entries
    lines = ["n1,n2,n3,n,value"]
    for n1, n2, n3, n in _resonant_triples(n_max):
        lines.append(f"{n1},{n2},{n3},{n},{_fmt(t.values[n1, n2, n3])}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        for line in lines:
            print(line, file=out)
    return 0


def _diagnose(paths, out_path, out) -> int:
    rows = []
    for i, path in enumerate(paths):
        field = load_snapshot(path)
        rec = DiagnosticRecord(
            step=i, time=field.time,
            report=norm_report(field, energy=energy_pnls(field)),
            morawetz=_morawetz(field), halfderiv=_halfderiv(field),
            field=field)
        rows.append(_record_row(rec))
    if out_path:
        _write_lines(out_path, CSV_HEADER, rows)
    else:
        print(CSV_HEADER, file=out)
        for row in rows:
            print(row, file=out)
    return 0


def _morawetz(field):
    from .analysis import morawetz_action
    return morawetz_action(field)


def _halfderiv(field):
    from .analysis import morawetz_halfderiv
    return morawetz_halfderiv(field)


# ---------------------------------------------------------------------------
# argument parsing

def _add_overrides(sub) -> None:
    for key in _FLAG_SECTION:
        sub.add_argument("--" + key.replace("_", "-"), dest=key, default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phnls",
        description="Pseudospectral simulator for the confined cubic flow "
                    "and its resonant model.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, system in (("simulate-pnls", "pnls"), ("simulate-dcr", "dcr")):
        p = sub.add_parser(name, help=f"run the {system} system")
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True, help="output directory")
        _add_overrides(p)
        p.set_defaults(system_override=system)

    p = sub.add_parser("compare-profiles",
                       help="confined flow vs rescaled resonant model")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lambdas", dest="lambda_list", default=None,
                   help="alias for --lambda-list")
    p.add_argument("--n-outputs", type=int, default=6)
    _add_overrides(p)

    p = sub.add_parser("tensor", help="coupling tensor utilities")
    p.add_argument("action", choices=("compute", "dump", "check"))
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--count", type=int, default=0,
                   help="quadrature size (default 2*nmax)")
    p.add_argument("--out", default="")
    p.add_argument("--with-overlaps", action="store_true")

    p = sub.add_parser("diagnose", help="diagnostic rows for snapshots")
    p.add_argument("snapshots", nargs="+")
    p.add_argument("--out", default="")
    return parser


def _overrides_from(args) -> dict:
    return {key: getattr(args, key, None) for key in _FLAG_SECTION}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    threads = os.environ.get("PHNLS_THREADS")
    if threads is not None:
        from . import _kernels
        _kernels.set_num_threads(int(threads))
    try:
        if args.command in ("simulate-pnls", "simulate-dcr"):
            cfg = parse_config(args.config, _overrides_from(args))
            if cfg.system == "":
                cfg = replace(cfg, system=args.system_override)
            elif cfg.system != args.system_override:
                raise ConfigError("command line", 0,
                                  f"system={cfg.system} conflicts with the "
                                  f"{args.command} subcommand")
            return _run_simulate(cfg, args.out)
        if args.command == "compare-profiles":
            cfg = parse_config(args.config, _overrides_from(args))
            return _run_compare(cfg, args.out, args.n_outputs)
        if args.command == "tensor":
            return _tensor_cmd(args, sys.stdout)
        if args.command == "diagnose":
            return _diagnose(args.snapshots, args.out, sys.stdout)
        raise AssertionError(f"unhandled command {args.command}")
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
