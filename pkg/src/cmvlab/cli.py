"""Batch front-end: every pipeline as a subcommand with reproducible outputs.

Each run reads one JSON config (flags override config fields), writes numeric
CSVs at full 17-significant-digit precision plus JSON reports into the output
directory, and stamps a manifest.json recording the command, parameters,
seed, tool version, and output list.  Identical manifests reproduce
byte-identical numeric outputs.

Exit codes: 0 success, 2 validation error, 3 numerical-stability error.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import coefficients as coeffs
from . import floquet, operator, qwalk, transfer, weyl
from .errors import NumericalInstabilityError
from .spectral_sets import CircleArcSet, TWO_PI

__all__ = ["main"]


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int
    tool_version: str = __version__
    outputs: list = field(default_factory=list)

    def write(self, out_dir: str) -> None:
        path = os.path.join(out_dir, "manifest.json")
        with open(path, "w") as fh:
            json.dump(
                {
                    "command": self.command,
                    "parameters": self.parameters,
                    "seed": self.seed,
                    "tool_version": self.tool_version,
                    "outputs": self.outputs,
                },
                fh,
                indent=2,
                sort_keys=True,
            )
            fh.write("\n")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(manifest: RunManifest, out_dir: str, name: str,
               header: list[str], rows) -> None:
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write("# manifest: manifest.json\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    manifest.outputs.append(name)


def _write_json(manifest: RunManifest, out_dir: str, name: str, payload: dict
                ) -> None:
    path = os.path.join(out_dir, name)
    payload = dict(payload)
    payload["manifest"] = "manifest.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest.outputs.append(name)


def _load_config(path: str) -> dict:
    if path is None:
        raise ValueError("--config PATH is required")
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValueError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValueError(f"config is not valid JSON ({path}, line {exc.lineno}): "
                         f"{exc.msg}")


def _sequence_from_config(cfg: dict, seed: int) -> coeffs.CoefficientSequence:
    d = cfg.get("sequence")
    if not isinstance(d, dict):
        raise ValueError("config field 'sequence' must be an object")
    if d.get("kind") == "random_periodic":
        q = int(d.get("q", 4))
        radius = float(d.get("radius", 0.5))
        if not 0.0 <= radius < 1.0:
            raise ValueError(f"sequence.radius must lie in [0, 1), got {radius}")
        rng = np.random.default_rng(seed)
        vals = radius * rng.random(q) * np.exp(2j * math.pi * rng.random(q))
        return coeffs.periodic_table_seq(vals)
    return coeffs.sequence_from_spec(d)


def _require_even(name: str, value: int) -> int:
    value = int(value)
    if value < 2 or value % 2 != 0:
        raise ValueError(f"config field '{name}' must be a positive even integer "
                         f"(got {value})")
    return value


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_bands(cfg: dict, manifest: RunManifest, out_dir: str, threads: int) -> None:
    seq = _sequence_from_config(cfg, manifest.seed)
    q = _require_even("q", cfg.get("q", 2))
    k_points = int(cfg.get("k_points", 64))
    if k_points < 2:
        raise ValueError(f"config field 'k_points' must be >= 2, got {k_points}")
    resolution = int(cfg.get("resolution", 4096))

    # strictly interior k grid (band eigenvalues may degenerate at 0 and pi/q)
    ks = [(j + 0.5) * (math.pi / q) / k_points for j in range(k_points)]
    rows = []
    for k in ks:
        pairs = floquet.band_eigens(seq, q, k)
        for n, pair in enumerate(pairs):
            dz = floquet.band_derivative(pair, seq, q)
            rows.append((q, n, k, pair.z.real, pair.z.imag, dz.real, dz.imag))
    _write_csv(manifest, out_dir, "bands.csv",
               ["q", "n", "k", "re_z", "im_z", "re_dzdk", "im_dzdk"], rows)

    arcs = floquet.periodic_spectrum(seq, q, resolution=resolution)
    _write_json(manifest, out_dir, "band_arcs.json",
                {**arcs.to_json(), "measure": arcs.measure(), "q": q})
    _write_csv(manifest, out_dir, "band_arcs.csv", ["lo", "hi"],
               [tuple(a) for a in arcs.arcs])


def _lyap_sweep(seq, thetas, n_steps, threads):
    zs = [cmath.exp(1j * t) for t in thetas]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(lambda z: transfer.lyapunov(seq, z, n_steps), zs))
    else:
        vals = [transfer.lyapunov(seq, z, n_steps) for z in zs]
    return np.array(vals)


def _cmd_lyapunov(cfg: dict, manifest: RunManifest, out_dir: str, threads: int
                  ) -> None:
    seq = _sequence_from_config(cfg, manifest.seed)
    grid_size = int(cfg.get("grid_size", 512))
    if grid_size < 8:
        raise ValueError(f"config field 'grid_size' must be >= 8, got {grid_size}")
    n_steps = int(cfg.get("n_steps", 100_000))
    if n_steps < 1_000:
        raise ValueError(f"config field 'n_steps' must be >= 1000, got {n_steps}")
    eps_L = float(cfg.get("epsilon_L", 1e-2))
    if eps_L <= 0:
        raise ValueError(f"config field 'epsilon_L' must be positive, got {eps_L}")

    thetas = np.arange(grid_size) * (TWO_PI / grid_size)
    vals = _lyap_sweep(seq, thetas, n_steps, threads)
    _write_csv(manifest, out_dir, "lyapunov.csv",
               ["theta", "L", "N", "epsilon"],
               [(t, v, n_steps, eps_L) for t, v in zip(thetas, vals)])
    _write_json(manifest, out_dir, "lyapunov.json", {
        "theta": [float(t) for t in thetas],
        "L": [float(v) for v in vals],
        "N": n_steps,
        "epsilon_L": eps_L,
    })
    z_arcs = transfer.arcs_from_grid(thetas, vals, eps_L)
    _write_json(manifest, out_dir, "zero_set.json",
                {**z_arcs.to_json(), "measure": z_arcs.measure(),
                 "N": n_steps, "epsilon_L": eps_L})
    _write_csv(manifest, out_dir, "zero_set.csv", ["lo", "hi"],
               [tuple(a) for a in z_arcs.arcs])


def _cmd_approx(cfg: dict, manifest: RunManifest, out_dir: str, threads: int
                ) -> None:
    fam_spec = cfg.get("family")
    if not isinstance(fam_spec, dict):
        raise ValueError("config field 'family' must be an object")
    family = coeffs.family_from_spec(fam_spec)
    grid_size = int(cfg.get("grid_size", 4096))
    if grid_size < 8:
        raise ValueError(f"config field 'grid_size' must be >= 8, got {grid_size}")
    n_steps = int(cfg.get("n_steps", 100_000))
    eps_L = float(cfg.get("epsilon_L", 1e-2))
    k_index = int(cfg.get("k", 0))
    resolution = int(cfg.get("resolution", 4096))

    thetas = np.arange(grid_size) * (TWO_PI / grid_size)
    vals = _lyap_sweep(family.limit, thetas, n_steps, threads)
    z_est = transfer.arcs_from_grid(thetas, vals, eps_L)

    periods = family.periods()
    levels = []
    stage_arcs = []
    for qn, stage in zip(periods, family.stages):
        arcs_n = floquet.periodic_spectrum(stage, qn, resolution=resolution)
        stage_arcs.append(arcs_n)
        per2q = coeffs.periodize(family.limit, 2 * qn)
        sigma_2q = floquet.periodic_spectrum(per2q, 2 * qn, resolution=resolution)
        levels.append({
            "q": qn,
            "sigma_measure": arcs_n.measure(),
            "sigma2q_minus_Z": sigma_2q.diff_measure(z_est),
        })
    hausdorff_seq = [
        stage_arcs[i].hausdorff(stage_arcs[i + 1])
        for i in range(len(stage_arcs) - 1)
    ]
    sigma_k = stage_arcs[k_index].measure()
    verdict = coeffs.lp_sum_criterion(family, k_index, sigma_k)

    _write_json(manifest, out_dir, "approx_report.json", {
        "levels": levels,
        "lp_sum_criterion": verdict,
        "hausdorff_consecutive": hausdorff_seq,
        "zero_set_measure": z_est.measure(),
        "N": n_steps,
        "epsilon_L": eps_L,
        "k": k_index,
    })


def _coins_from_config(cfg: dict) -> qwalk.CoinSequence:
    d = cfg.get("coins")
    if not isinstance(d, dict):
        raise ValueError("config field 'coins' must be an object")
    kind = d.get("kind")
    if kind == "identity":
        return qwalk.identity_coins()
    if kind == "hadamard":
        return qwalk.hadamard_coins()
    if kind == "constant":
        m = d.get("matrix")
        q = _coin_matrix(m, site=0)
        return qwalk.constant_coins(q)
    if kind == "table":
        mats = d.get("matrices")
        if not isinstance(mats, list) or not mats:
            raise ValueError("coins.matrices must be a nonempty list")
        table = [_coin_matrix(m, site=i) for i, m in enumerate(mats)]
        p = len(table)
        return qwalk.CoinSequence(fn=lambda n: table[n % p], period=p)
    if kind == "cgmv_table":
        gs = d.get("gammas")
        if not isinstance(gs, list) or not gs:
            raise ValueError("coins.gammas must be a nonempty list")
        vals = [complex(re, im) for re, im in gs]
        p = len(vals)
        return qwalk.cgmv_coins(lambda n: vals[n % p], period=p)
    raise ValueError(f"unknown coins kind {kind!r}")


def _coin_matrix(m, site: int) -> np.ndarray:
    try:
        q = np.array(
            [[complex(*m[0][0]), complex(*m[0][1])],
             [complex(*m[1][0]), complex(*m[1][1])]],
            dtype=complex,
        )
    except (TypeError, IndexError, ValueError):
        raise ValueError(
            f"coin at site {site} is malformed: expected a 2x2 table of "
            "[re, im] pairs"
        )
    res = np.max(np.abs(q @ q.conj().T - np.eye(2)))
    if res > 1e-12:
        raise ValueError(f"coin at site {site} is not unitary (residual {res:.2e})")
    return q


def _cmd_walk(cfg: dict, manifest: RunManifest, out_dir: str, threads: int
              ) -> None:
    coins = _coins_from_config(cfg)
    steps = int(cfg.get("steps", 100))
    if steps < 0:
        raise ValueError(f"config field 'steps' must be >= 0, got {steps}")
    init = cfg.get("initial", {"site": 0, "spin": "+"})
    site = int(init.get("site", 0))
    spin = init.get("spin", "+")
    if spin not in ("+", "-"):
        raise ValueError(f"initial.spin must be '+' or '-', got {spin!r}")
    J = int(cfg.get("survival_J", 5))
    record = cfg.get("record_times")
    if record is None:
        record = sorted({steps // 4, steps // 2, steps}) if steps else [0]
    record = [int(t) for t in record]
    if any(t < 0 for t in record):
        raise ValueError("record_times must be nonnegative")

    state0 = qwalk.WalkState.delta(site, spin)
    walk = qwalk.build_walk(coins, (state0.n_lo, state0.n_hi), policy="absorb")

    dist_rows = []
    surv_rows = []
    for t in sorted(set(record + [steps])):
        st = qwalk.evolve(state0, walk, t)
        for j in range(st.n_lo, st.n_hi + 1):
            p_plus = abs(st.amplitude(j, "+")) ** 2
            p_minus = abs(st.amplitude(j, "-")) ** 2
            if p_plus > 0 or p_minus > 0:
                dist_rows.append((t, j, p_plus, p_minus))
        surv_rows.append((t, qwalk.survival_probability(state0, walk, J, t)))
    _write_csv(manifest, out_dir, "distribution.csv",
               ["t", "n", "p_plus", "p_minus"], dist_rows)
    _write_csv(manifest, out_dir, "survival.csv", ["t", "survival"], surv_rows)


def _cmd_sieve_check(cfg: dict, manifest: RunManifest, out_dir: str, threads: int
                     ) -> None:
    seq = _sequence_from_config(cfg, manifest.seed)
    dim = int(cfg.get("dim", 16))
    if dim % 4 != 0 or dim <= 0:
        raise ValueError(f"config field 'dim' must be a positive multiple of 4, "
                         f"got {dim}")
    res = operator.verify_sieve_square(seq, dim)
    _write_json(manifest, out_dir, "sieve_check.json", {**res, "dim": dim})


def _cmd_weyl_defect(cfg: dict, manifest: RunManifest, out_dir: str, threads: int
                     ) -> None:
    seq = _sequence_from_config(cfg, manifest.seed)
    k = int(cfg.get("k", 0))
    samples = int(cfg.get("samples", 32))
    dim = int(cfg.get("dim", 512))
    r_values = cfg.get("r_values", [0.9, 0.99])
    arcs_cfg = cfg.get("arc_set", "full")
    if arcs_cfg == "full":
        S = CircleArcSet.full_circle()
    else:
        S = CircleArcSet.from_arcs([(lo, hi) for lo, hi in arcs_cfg])

    rows = []
    angles = S.sample(samples)
    for r in r_values:
        r = float(r)
        for th in angles:
            z = r * cmath.exp(1j * th)
            mp, mm = weyl.M_coefficients(seq, k, z, dim)
            rows.append((th, r, abs(mp + mm.conjugate())))
    _write_csv(manifest, out_dir, "weyl_defect.csv",
               ["theta", "r", "defect"], rows)


_COMMANDS = {
    "bands": _cmd_bands,
    "lyapunov": _cmd_lyapunov,
    "approx": _cmd_approx,
    "walk": _cmd_walk,
    "sieve-check": _cmd_sieve_check,
    "weyl-defect": _cmd_weyl_defect,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmvlab",
        description="CMV operator toolkit: bands, Lyapunov sweeps, "
                    "limit-periodic reports, quantum walks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    default_threads = int(os.environ.get("CMVLAB_THREADS", "1"))
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=default_threads)
        p.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                       help="override a config field, e.g. --set q=4")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        for item in args.set:
            if "=" not in item:
                raise ValueError(f"--set expects KEY=JSON, got {item!r}")
            key, raw = item.split("=", 1)
            try:
                cfg[key] = json.loads(raw)
            except json.JSONDecodeError:
                cfg[key] = raw
        os.makedirs(args.out, exist_ok=True)
        manifest = RunManifest(
            command=args.command,
            parameters=cfg,
            seed=args.seed,
        )
        if args.threads < 1:
            raise ValueError(f"--threads must be >= 1, got {args.threads}")
        _COMMANDS[args.command](cfg, manifest, args.out, args.threads)
        manifest.write(args.out)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalInstabilityError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
