"""Command-line front end.

Subcommands:
  gen         write a random (J, K)-regular parity-check matrix as alist
  decode      decode one received word (synthesized or from an instance file)
  experiment  batch runs over error rates and seeds, CSV out
  export-lp   write the exact decoding integer program (or its relaxation)
              in text LP format for external solvers

Per instance the harness draws the original message, then the channel
flips, from one seeded stream; warm-started methods are seeded with the
same instance seed, so their first trial replays the original message.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelInstance, ber
from .codes import (
    GeneratorMatrix,
    ParityCheckMatrix,
    derive_generator,
    generate_regular_code,
    read_alist,
    write_alist,
)
from .heuristics import gallager_a, random_sum
from .solver import METHOD_OPTIONS, decode_with_method

CSV_FIELDS = [
    "method",
    "p",
    "n",
    "seed",
    "z_lower",
    "z_upper",
    "gap_pct",
    "ber",
    "cpu_secs",
    "status",
    "nodes",
    "cuts",
    "columns",
]

HEURISTIC_METHODS = ("rs", "gallager-a")


@dataclass
class ExperimentConfig:
    p_list: list[float]
    seeds: list[int]
    method: str
    n: int | None = None
    s: int | None = None
    j_ones: int = 5
    k_ones: int = 10
    t_max: int = 10000
    time_limit_s: float = 600.0
    code_seed: int = 0
    out: str | None = None
    extra_decode_args: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in set(METHOD_OPTIONS) | set(HEURISTIC_METHODS):
            raise ValueError(f"unknown method {self.method!r}")
        if self.s is None:
            if self.n is None:
                raise ValueError("give either n or s")
            if self.n % self.k_ones:
                raise ValueError(f"n={self.n} is not a multiple of K={self.k_ones}")
            self.s = self.n // self.k_ones
        self.n = self.k_ones * self.s


def _fmt(value, spec="{:.6f}"):
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return spec.format(value)
    return str(value)


def run_experiment(cfg: ExperimentConfig, log=None) -> list[dict]:
    """One row per (p, seed) plus one aggregate row per p; deterministic
    except for the cpu_secs column."""
    h = generate_regular_code(cfg.s, cfg.j_ones, cfg.k_ones, cfg.code_seed)
    g = derive_generator(h)
    rows = []
    for p in cfg.p_list:
        group = []
        for seed in cfg.seeds:
            inst = ChannelInstance.generate(g, p, seed)
            row = _run_single(h, g, inst, cfg)
            rows.append(row)
            group.append(row)
            if log:
                log(
                    f"{cfg.method} p={p} n={cfg.n} seed={seed}: "
                    f"z={row['z_upper']} status={row['status']} "
                    f"({row['cpu_secs']}s)"
                )
        rows.append(_aggregate(group, cfg, p))
    return rows


def _run_single(h, g, inst: ChannelInstance, cfg: ExperimentConfig) -> dict:
    t0 = time.perf_counter()
    if cfg.method == "rs":
        res = random_sum(g, inst.r, cfg.t_max, inst.seed)
        row = {
            "z_lower": "",
            "z_upper": res.z,
            "gap_pct": "",
            "status": "Feasible" if res.feasible else "Infeasible",
            "nodes": 0,
            "cuts": 0,
            "columns": 0,
            "y": res.y,
        }
    elif cfg.method == "gallager-a":
        res = gallager_a(h, inst.r)
        row = {
            "z_lower": "",
            "z_upper": res.z,
            "gap_pct": "",
            "status": "Feasible" if res.feasible else "Infeasible",
            "nodes": 0,
            "cuts": 0,
            "columns": 0,
            "y": res.y,
        }
    else:
        result = decode_with_method(
            h,
            inst.r,
            inst.p,
            cfg.method,
            t_max=cfg.t_max,
            time_limit_s=cfg.time_limit_s,
            seed=inst.seed,
            g=g,
            **cfg.extra_decode_args,
        )
        row = {
            "z_lower": result.z_lower,
            "z_upper": result.z_upper,
            "gap_pct": result.gap_pct,
            "status": result.status,
            "nodes": result.nodes,
            "cuts": result.cuts,
            "columns": result.columns,
            "y": result.y,
        }
    row["cpu_secs"] = time.perf_counter() - t0
    row["ber"] = ber(inst.v, row.pop("y"))
    row["method"] = cfg.method
    row["p"] = inst.p
    row["n"] = inst.n
    row["seed"] = inst.seed
    return row


def _aggregate(group: list[dict], cfg: ExperimentConfig, p: float) -> dict:
    def mean(key):
        vals = [row[key] for row in group if row[key] != ""]
        return sum(vals) / len(vals) if vals else ""

    good = "Optimal" if cfg.method in METHOD_OPTIONS else "Feasible"
    hits = sum(1 for row in group if row["status"] == good)
    return {
        "method": cfg.method,
        "p": p,
        "n": cfg.n,
        "seed": "mean",
        "z_lower": mean("z_lower"),
        "z_upper": mean("z_upper"),
        "gap_pct": mean("gap_pct"),
        "ber": mean("ber"),
        "cpu_secs": mean("cpu_secs"),
        "status": f"{hits}/{len(group)} {good}",
        "nodes": mean("nodes"),
        "cuts": mean("cuts"),
        "columns": mean("columns"),
    }


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow(
            [
                row["method"],
                _fmt(row["p"], "{:g}"),
                row["n"],
                row["seed"],
                _fmt(row["z_lower"]),
                _fmt(row["z_upper"], "{:.4f}") if isinstance(row["z_upper"], float)
                else row["z_upper"],
                _fmt(row["gap_pct"]),
                _fmt(row["ber"], "{:.8f}"),
                _fmt(row["cpu_secs"], "{:.3f}"),
                row["status"],
                _fmt(row["nodes"], "{:.2f}") if isinstance(row["nodes"], float)
                else row["nodes"],
                _fmt(row["cuts"], "{:.2f}") if isinstance(row["cuts"], float)
                else row["cuts"],
                _fmt(row["columns"], "{:.2f}") if isinstance(row["columns"], float)
                else row["columns"],
            ]
        )
    return buf.getvalue()


# --- exact-model export -------------------------------------------------------


def export_em_lp(h: ParityCheckMatrix, r, relax: bool = False) -> str:
    """Text LP form of the exact decoding program: minimize the Hamming
    distance to r subject to every parity sum being even (H f = 2 l with
    integer l); relax=True lifts the integrality restrictions."""
    r = np.asarray(r, dtype=np.uint8)
    terms = []
    constant = 0
    for i in range(h.n):
        if r[i]:
            terms.append(f"- f_{i}")
            constant += 1
        else:
            terms.append(f"+ f_{i}")
    obj = " ".join(terms)
    if constant:
        obj += f" + {constant}"
    lines = ["Minimize", f" obj: {obj}", "Subject To"]
    for j, row in enumerate(h.rows):
        expr = " + ".join(f"f_{i}" for i in row)
        lines.append(f" parity_{j}: {expr} - 2 l_{j} = 0")
    lines.append("Bounds")
    for i in range(h.n):
        lines.append(f" 0 <= f_{i} <= 1")
    for j in range(h.m):
        lines.append(f" l_{j} >= 0")
    if not relax:
        lines.append("Binaries")
        lines.append(" " + " ".join(f"f_{i}" for i in range(h.n)))
        lines.append("Generals")
        lines.append(" " + " ".join(f"l_{j}" for j in range(h.m)))
    lines.append("End")
    return "\n".join(lines) + "\n"


# --- argument plumbing -----------------------------------------------------------


def _add_code_args(sub):
    sub.add_argument("--code", help="alist file with the parity-check matrix")
    sub.add_argument("--s", type=int, help="permutation block size")
    sub.add_argument("--n", type=int, help="code length (= K*s)")
    sub.add_argument("--J", type=int, default=5, dest="j_ones")
    sub.add_argument("--K", type=int, default=10, dest="k_ones")
    sub.add_argument("--code-seed", type=int, default=0)


def _load_code(args) -> ParityCheckMatrix:
    if args.code:
        return read_alist(args.code)
    s = args.s
    if s is None:
        if args.n is None:
            raise SystemExit("give --code, --s or --n")
        if args.n % args.k_ones:
            raise SystemExit(f"--n must be a multiple of K={args.k_ones}")
        s = args.n // args.k_ones
    return generate_regular_code(s, args.j_ones, args.k_ones, args.code_seed)


def _load_instance(args, g: GeneratorMatrix) -> ChannelInstance:
    if args.instance:
        return ChannelInstance.load(args.instance)
    return ChannelInstance.generate(g, args.p, args.seed)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="ldpc-bpc",
        description="Nearest-codeword LDPC decoding by branch-price-and-cut",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a regular code")
    p_gen.add_argument("--s", type=int, required=True)
    p_gen.add_argument("--J", type=int, default=5, dest="j_ones")
    p_gen.add_argument("--K", type=int, default=10, dest="k_ones")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)

    p_dec = sub.add_parser("decode", help="decode one received word")
    _add_code_args(p_dec)
    p_dec.add_argument("--instance", help="instance file (header + v + r)")
    p_dec.add_argument("--p", type=float, default=0.05)
    p_dec.add_argument("--seed", type=int, default=0)
    p_dec.add_argument(
        "--method", default="bpc", choices=sorted(set(METHOD_OPTIONS) | set(HEURISTIC_METHODS))
    )
    p_dec.add_argument("--t-max", type=int, default=10000)
    p_dec.add_argument("--time-limit", type=float, default=600.0)

    p_exp = sub.add_parser("experiment", help="batch decode, CSV output")
    p_exp.add_argument("--s", type=int)
    p_exp.add_argument("--n", type=int)
    p_exp.add_argument("--J", type=int, default=5, dest="j_ones")
    p_exp.add_argument("--K", type=int, default=10, dest="k_ones")
    p_exp.add_argument("--p", type=float, nargs="+", required=True, dest="p_list")
    p_exp.add_argument("--num-seeds", type=int, default=10)
    p_exp.add_argument("--seed", type=int, default=0, help="base seed; instance i uses seed+1+i")
    p_exp.add_argument("--method", required=True,
                       choices=sorted(set(METHOD_OPTIONS) | set(HEURISTIC_METHODS)))
    p_exp.add_argument("--t-max", type=int, default=10000)
    p_exp.add_argument("--time-limit", type=float, default=600.0)
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--quiet", action="store_true")

    p_lp = sub.add_parser("export-lp", help="write the exact model in LP format")
    _add_code_args(p_lp)
    p_lp.add_argument("--instance")
    p_lp.add_argument("--p", type=float, default=0.05)
    p_lp.add_argument("--seed", type=int, default=0)
    p_lp.add_argument("--relax", action="store_true", help="continuous relaxation")
    p_lp.add_argument("--out", help="output path (default stdout)")

    args = ap.parse_args(argv)

    if args.command == "gen":
        h = generate_regular_code(args.s, args.j_ones, args.k_ones, args.seed)
        write_alist(h, args.out)
        g = derive_generator(h)
        print(f"wrote {args.out}: n={h.n} m={h.m} k_eff={g.k_eff}")
        return 0

    if args.command == "decode":
        h = _load_code(args)
        g = derive_generator(h)
        inst = _load_instance(args, g)
        seed = inst.seed if inst.seed is not None else args.seed
        t0 = time.perf_counter()
        if args.method == "rs":
            res = random_sum(g, inst.r, args.t_max, seed)
            print(f"rs: z={res.z} feasible={res.feasible} ber={ber(inst.v, res.y):.6f}")
        elif args.method == "gallager-a":
            res = gallager_a(h, inst.r)
            print(
                f"gallager-a: z={res.z} feasible={res.feasible} "
                f"flips={res.iterations} ber={ber(inst.v, res.y):.6f}"
            )
        else:
            result = decode_with_method(
                h, inst.r, inst.p, args.method,
                t_max=args.t_max, time_limit_s=args.time_limit, seed=seed, g=g,
            )
            print(
                f"{args.method}: status={result.status} z={result.z_upper} "
                f"z_lower={result.z_lower:.4f} gap={result.gap_pct:.4f}% "
                f"ber={ber(inst.v, result.y):.6f} nodes={result.nodes} "
                f"cuts={result.cuts} columns={result.columns}"
            )
        print(f"elapsed {time.perf_counter() - t0:.2f}s")
        return 0

    if args.command == "experiment":
        cfg = ExperimentConfig(
            p_list=list(args.p_list),
            seeds=[args.seed + 1 + t for t in range(args.num_seeds)],
            method=args.method,
            n=args.n,
            s=args.s,
            j_ones=args.j_ones,
            k_ones=args.k_ones,
            t_max=args.t_max,
            time_limit_s=args.time_limit,
            code_seed=args.seed,
            out=args.out,
        )
        log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
        rows = run_experiment(cfg, log=log)
        with open(args.out, "w") as fh:
            fh.write(rows_to_csv(rows))
        print(f"wrote {args.out} ({len(rows)} rows)")
        return 0

    if args.command == "export-lp":
        h = _load_code(args)
        g = derive_generator(h)
        inst = _load_instance(args, g)
        text = export_em_lp(h, inst.r, relax=args.relax)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
            print(f"wrote {args.out}")
        else:
            sys.stdout.write(text)
        return 0

    return 1


if __name__ == "__main__":
    raise SystemExit(main())
