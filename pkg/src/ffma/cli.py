"""Command-line front end: constructions, verification, codecs, sweeps, simulation.

All numerics live in JSON config files so runs are versionable; flags
only carry paths, seeds, parallelism, and tolerances.  Exit codes:
0 success, 2 validation failure, 3 verification failure, 4 numeric
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import crrca, fbl, mcsim, ratecap
from .eacodec import (
    BudgetExceededError,
    UncorrectableBlockError,
    encode_ffsp,
    table_decode,
    verify_uspm_cf,
    verify_uspm_ff,
)
from .eaconstruct import CodeSpecError, ConstructionError, dump_code_spec, load_code_spec

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_VERIFICATION = 3
EXIT_NONCONVERGENCE = 4


def _write_json(path: str | None, doc) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(path: str | None, rows: list[dict]) -> None:
    if not rows:
        raise ValueError("nothing to write")
    cols = list(rows[0].keys())
    out = sys.stdout if not path else open(path, "w", newline="")
    try:
        w = csv.DictWriter(out, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if path:
            out.close()


def _load_json(path: str, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise CodeSpecError("file not found", f"{what}:{path}") from None
    except json.JSONDecodeError as e:
        raise CodeSpecError(f"invalid JSON: {e}", f"{what}:{path}") from None


def _parse_blocks(text: str, p: int) -> list[tuple[int, ...]]:
    blocks = []
    for chunk in text.split():
        chunk = chunk.strip().strip(",")
        if not chunk:
            continue
        if "," in chunk:
            blocks.append(tuple(int(x) for x in chunk.split(",")))
        else:
            blocks.append(tuple(int(c) for c in chunk))
    for b in blocks:
        for d in b:
            if not 0 <= d < p:
                raise ValueError(f"digit {d} outside [0, {p})")
    return blocks


def cmd_construct(args) -> int:
    code = load_code_spec(args.spec)
    _write_json(args.out, dump_code_spec(code))
    return EXIT_OK


def cmd_verify(args) -> int:
    code = load_code_spec(args.spec)
    budget = int(args.tolerance) if args.tolerance else 10**6
    report = verify_uspm_ff(code, budget=budget).to_json()
    out = {"finite": report}
    ok = report["ok"]
    if code.complex_set is not None:
        # overloaded codes decode in the complex field; finite-field
        # collisions are expected there and reported for information
        cf = verify_uspm_cf(code, budget=budget).to_json()
        out["complex"] = cf
        ok = cf["ok"]
    out["ok"] = ok
    _write_json(args.out, out)
    return EXIT_OK if ok else EXIT_VERIFICATION


def cmd_encode(args) -> int:
    code = load_code_spec(args.spec)
    blocks = _parse_blocks(args.blocks, code.p)
    rows = []
    for d in blocks:
        w = encode_ffsp(code, d)
        rows.append({"input": list(d), "encoded": list(w.coords)})
    _write_json(args.out, {"method": "ffsp", "blocks": rows})
    return EXIT_OK


def cmd_decode(args) -> int:
    code = load_code_spec(args.spec)
    blocks = _parse_blocks(args.blocks, code.field.p)
    rows = []
    for w in blocks:
        entry = {"input": list(w), "method": "table", "iterations": 0, "flags": []}
        try:
            entry["decoded"] = list(table_decode(code, w))
        except UncorrectableBlockError:
            entry["decoded"] = None
            entry["flags"] = ["uncorrectable"]
        rows.append(entry)
    _write_json(args.out, {"blocks": rows})
    return EXIT_OK


def _sweep_capacity(grid: dict, threads: int) -> list[dict]:
    fn = {
        "su-tdma": ratecap.capacity_su_tdma,
        "su-ccma": ratecap.capacity_su_ccma,
        "mu-tdma": ratecap.capacity_mu_tdma,
        "mu-ccma": ratecap.capacity_mu_ccma,
    }[grid.get("scenario", "su-tdma")]
    dims = ratecap.SystemDims(**grid["dims"])
    gammas = grid["gamma_grid"]
    if not gammas:
        raise ValueError("empty gamma grid")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        reports = list(pool.map(lambda g: fn(dims, float(g)), gammas))
    return [r.csv_row() for r in reports]


def _sweep_fbl(grid: dict, threads: int, tol: float | None = None) -> list[dict]:
    m, K, eps = int(grid["m"]), int(grid["K"]), float(grid["eps"])
    js = [int(j) for j in grid["J_grid"]]
    scenarios = grid.get("scenarios", list(fbl.SCENARIOS))
    if not js:
        raise ValueError("empty J grid")
    jobs = [(s, j) for j in js for s in scenarios]

    def solve(job):
        s, j = job
        rate = j * K / m
        res = fbl.min_ebn0(rate, m, K, j, eps, s, tol=tol or 1e-9)
        return res.csv_row(m, K, j, eps)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(solve, jobs))


def _sweep_pas(grid: dict, threads: int) -> list[dict]:
    ps = [int(p) for p in grid["p_list"]]
    eta = float(grid["eta"])
    ebn0s = [float(x) for x in grid["ebn0_db_grid"]]
    J = int(grid.get("J", 1))
    factor = float(grid.get("snr_factor", 2.0))
    if not ps or not ebn0s:
        raise ValueError("empty PAS grid")
    rows = []
    for p in ps:
        for db in ebn0s:
            rows.append(crrca.pas_pary_mu(p, eta, db, J=J, snr_factor=factor).csv_row())
    return rows


def _sweep_ca(grid: dict, threads: int) -> list[dict]:
    K, Q, m = int(grid["K"]), int(grid["Q"]), int(grid["m"])
    p = int(grid.get("p", 2))
    J = int(grid.get("J", 1))
    factor = float(grid.get("snr_factor", 2.0))
    rate = (K / m) * math.log2(p)
    rows = []
    for db in grid["ebn0_db_grid"]:
        gamma = crrca.gamma_from_ebn0(float(db), rate, factor=factor)
        res = crrca.ca_allocate_mu(K, Q, m, gamma, p=p, J=J)
        if not res.converged:
            raise ArithmeticError(f"capacity alignment did not converge at {db} dB")
        rows.append(
            {
                "p": p, "K": K, "Q": Q, "m": m, "J": J,
                "ebn0_db": float(db), "gamma_a": gamma,
                "mu1": res.mu1, "mu2": res.mu2, "mu_pas": res.mu_pas,
                "crr_info": res.crr_info, "crr_parity": res.crr_parity,
            }
        )
    if not rows:
        raise ValueError("empty Eb/N0 grid")
    return rows


def cmd_sweep(args) -> int:
    grid = _load_json(args.grid, "grid")
    threads = args.threads or os.cpu_count() or 1
    if args.kind == "fbl":
        rows = _sweep_fbl(grid, threads, tol=args.tolerance)
    elif args.kind == "capacity":
        rows = _sweep_capacity(grid, threads)
    elif args.kind == "pas":
        rows = _sweep_pas(grid, threads)
    elif args.kind == "ca":
        rows = _sweep_ca(grid, threads)
    else:
        raise ValueError(f"unknown sweep kind {args.kind!r}")
    _write_csv(args.out, rows)
    return EXIT_OK


def _pipeline_from_config(doc: dict, seed: int | None):
    p = int(doc.get("p", 2))
    scheme = doc.get("scheme", "uncoded")
    J = int(doc.get("J", 1))
    if scheme == "uncoded":
        k_info = int(doc.get("k_info", doc.get("n", 1000) // J))
        pipe = mcsim.FramePipeline(
            label=doc.get("label", f"uncoded-p{p}"), p_char=p,
            n=J * k_info, k_info=k_info, J=J, decoder="hard",
        )
    elif scheme == "pa-ldpc":
        n, k = int(doc["n"]), int(doc["k"])
        H, G = mcsim.ldpc_ensemble(
            n, k, p, column_weight=int(doc.get("column_weight", 3)),
            seed=int(doc.get("ensemble_seed", 7)),
        )
        k_info = int(doc.get("k_info", k // J))
        mu1, mu2 = _pav_from_config(doc, k_info, n - k, n, J, p)
        gc_kwargs = {}
        if "gc" in doc:
            gc = doc["gc"]
            Hg, Gg = mcsim.ldpc_ensemble(
                int(gc["n"]), int(gc["k"]), p,
                column_weight=int(gc.get("column_weight", 3)),
                seed=int(gc.get("ensemble_seed", 11)),
            )
            gc_kwargs = {"G_gc": Gg, "H_gc": Hg, "muc": float(gc.get("muc", 1.0))}
        pipe = mcsim.FramePipeline(
            label=doc.get("label", f"pa-ldpc-p{p}"), p_char=p, n=n,
            k_info=k_info, J=J, G=G, H=H, mu1=mu1, mu2=mu2,
            decoder="qspa", qspa_iters=int(doc.get("qspa_iters", 50)),
            **gc_kwargs,
        )
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    channel = mcsim.ChannelConfig(
        seed=seed if seed is not None else int(doc.get("seed", 0)),
        max_frames=int(doc.get("max_frames", 10**6)),
        max_frame_errors=int(doc.get("max_frame_errors", 200)),
    )
    return pipe, channel, [float(x) for x in doc["ebn0_grid_db"]]


def _pav_from_config(doc, K, Q, m, J, p):
    pav = doc.get("pav", "epa")
    if isinstance(pav, (list, tuple)):
        return float(pav[0]), float(pav[1])
    if pav == "epa":
        mu = m / (K + Q)
        return mu, mu
    if pav == "mip":
        return float(J), 1.0
    if pav == "ca":
        rate = (K / m) * math.log2(p)
        gamma = crrca.gamma_from_ebn0(float(doc.get("ca_ebn0_db", doc["ebn0_grid_db"][0])), rate)
        res = crrca.ca_allocate_mu(K, Q, m, gamma, p=p, J=J)
        return res.mu1, res.mu2
    raise ValueError(f"unknown PAV form {pav!r}")


def cmd_simulate(args) -> int:
    doc = _load_json(args.spec, "pipeline")
    pipe, channel, grid = _pipeline_from_config(doc, args.seed)
    curve = mcsim.run_pipeline(pipe, grid, channel)
    _write_csv(args.out, curve.csv_rows())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ffma", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--tolerance", type=float, default=None)

    p = sub.add_parser("construct", help="build a code from a code-spec JSON")
    p.add_argument("--spec", required=True)
    common(p)
    p.set_defaults(fn=cmd_construct)

    p = sub.add_parser("verify", help="check unique sum-pattern decodability")
    p.add_argument("--spec", required=True)
    common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("encode", help="encode user blocks to sum patterns")
    p.add_argument("--spec", required=True)
    p.add_argument("--blocks", required=True, help="e.g. '01 12' or '0,1 1,2'")
    common(p)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("decode", help="decode sum patterns back to user blocks")
    p.add_argument("--spec", required=True)
    p.add_argument("--blocks", required=True)
    common(p)
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("sweep", help="capacity / fbl / pas / ca sweeps to CSV")
    p.add_argument("--kind", required=True, choices=["capacity", "fbl", "pas", "ca"])
    p.add_argument("--grid", required=True)
    common(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo BER/SER curves to CSV")
    p.add_argument("--spec", required=True)
    common(p)
    p.set_defaults(fn=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CodeSpecError, ConstructionError, ValueError, KeyError) as e:
        _write_json(None, {"error": str(e), "kind": "validation"})
        return EXIT_VALIDATION
    except BudgetExceededError as e:
        _write_json(None, {"error": str(e), "kind": "budget"})
        return EXIT_VALIDATION
    except (ArithmeticError, fbl.BracketError, RuntimeError) as e:
        _write_json(None, {"error": str(e), "kind": "nonconvergence"})
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    raise SystemExit(main())
