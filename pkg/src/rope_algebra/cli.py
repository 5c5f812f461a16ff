"""Command-line front end: ``gen``, ``verify``, ``bench`` and ``demo``.

Exit codes are shared by every command: 0 when all checks pass, 1 on a
validation or domain failure, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .apply import TokenBatch, attention_scores, recover_displacement, relative_scores_oracle, rotate_batch
from .config import DEFAULT_BASE, DEFAULT_SEED, DEFAULT_TOLERANCES
from .errors import RopeAlgebraError
from .generators import (
    FrequencySchedule,
    GeneratorSet,
    conjugate,
    embed_in_larger,
    mixed_2d,
    rope_matrix_dense,
    rope_matrix_fast,
    toral_basis,
)
from .ortho import KINDS, OrthoParam, build_orthogonal
from .validate import validate_all

SEED_ENV = "ROPE_ALGEBRA_SEED"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _read_json(path: str | None):
    try:
        text = sys.stdin.read() if path in (None, "-") else Path(path).read_text(encoding="utf-8")
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path or 'stdin'}: {exc}") from None


def load_generator(path: str | None) -> GeneratorSet:
    data = _read_json(path)
    try:
        return GeneratorSet.from_dict(data)
    except (KeyError, TypeError, ValueError, RopeAlgebraError) as exc:
        raise UsageError(f"malformed generator set: {exc!r}") from None


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def _dump(payload: dict) -> str:
    return json.dumps(payload, indent=2)


def cmd_gen(args) -> int:
    seed = resolve_seed(args.seed)
    if args.conjugate and args.ortho:
        raise UsageError("--conjugate and --ortho are mutually exclusive")
    if args.mixed is not None:
        if args.axes not in (None, 2) or args.blocks not in (None, 1):
            raise UsageError("--mixed builds a 2-axis, 1-block set; drop --axes/--blocks")
        if args.theta is not None or args.base is not None:
            raise UsageError("--mixed takes its own two frequencies; drop --theta/--base")
        gen = mixed_2d(*args.mixed)
    else:
        axes = 2 if args.axes is None else args.axes
        blocks = 1 if args.blocks is None else args.blocks
        if axes < 1 or blocks < 1:
            print("error: --axes and --blocks must be positive", file=sys.stderr)
            return EXIT_FAIL
        if args.d is not None and args.d // 2 < axes:
            print(
                f"error: so({args.d}) has rank floor(d/2) = {args.d // 2} < N = {axes}; "
                "need floor(d/2) >= N commuting independent generators",
                file=sys.stderr,
            )
            return EXIT_FAIL
        base = DEFAULT_BASE if args.base is None else args.base
        theta = 1.0 if args.theta is None else args.theta
        gen = toral_basis(axes, blocks, FrequencySchedule.from_base(blocks, base, theta))
    if args.d is not None and args.d != gen.d:
        if args.d < gen.d:
            print(f"error: --d {args.d} is smaller than 2*N*K = {gen.d}", file=sys.stderr)
            return EXIT_FAIL
        gen = embed_in_larger(gen, args.d)
    if args.conjugate:
        rng = np.random.default_rng(seed)
        gen = conjugate(gen, build_orthogonal(OrthoParam.random(args.conjugate, gen.d, rng)))
    elif args.ortho:
        try:
            param = OrthoParam.from_dict(_read_json(args.ortho))
        except (KeyError, TypeError) as exc:
            raise UsageError(f"malformed parameter file: {exc!r}") from None
        if param.dim != gen.d:
            print(f"error: parameter dim {param.dim} does not match d = {gen.d}", file=sys.stderr)
            return EXIT_FAIL
        gen = conjugate(gen, build_orthogonal(param))
    _write(gen.to_json(seed=seed), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = resolve_seed(args.seed)
    gen = load_generator(args.input)
    tol = DEFAULT_TOLERANCES
    if args.tol_relativity is not None:
        from dataclasses import replace

        tol = replace(tol, relativity=args.tol_relativity)
    report = validate_all(gen, seed, args.samples, args.range, args.grid, tol)
    _write(report.to_json(), args.output)
    if not report.verdict:
        print(f"failed checks: {', '.join(report.failed)}", file=sys.stderr)
    return EXIT_OK if report.verdict else EXIT_FAIL


def _latency(fn, positions) -> np.ndarray:
    times = np.empty(len(positions))
    for n, x in enumerate(positions):
        t0 = time.perf_counter()
        fn(x)
        times[n] = time.perf_counter() - t0
    return times


def cmd_bench(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    seed = resolve_seed(args.seed)
    gen = load_generator(args.input)
    rng = np.random.default_rng(seed)
    positions = rng.uniform(-args.range, args.range, size=(args.samples, gen.n_axes))
    fast = _latency(lambda x: rope_matrix_fast(gen, x), positions)
    dense = _latency(lambda x: rope_matrix_dense(gen, x), positions)
    disagreement = max(
        float(np.linalg.norm(rope_matrix_fast(gen, x) - rope_matrix_dense(gen, x))) for x in positions
    )
    threshold = DEFAULT_TOLERANCES.fast_dense
    passed = disagreement < threshold
    payload = {
        "seed": seed,
        "d": gen.d,
        "n_axes": gen.n_axes,
        "samples": args.samples,
        "fast": {"median_s": float(np.median(fast)), "p95_s": float(np.percentile(fast, 95))},
        "dense": {"median_s": float(np.median(dense)), "p95_s": float(np.percentile(dense, 95))},
        "speedup": float(np.median(dense) / np.median(fast)),
        "max_disagreement": disagreement,
        "threshold": threshold,
        "passed": passed,
    }
    _write(_dump(payload), args.output)
    return EXIT_OK if passed else EXIT_FAIL


def run_demo(gen: GeneratorSet, seed: int, count: int = 8, range_: float = 50.0) -> dict:
    """Score-level relativity, shift equivariance and displacement round trip on random data."""
    rng = np.random.default_rng(seed)
    q_raw = TokenBatch.random(gen, count, rng, range_)
    k_raw = TokenBatch.random(gen, count, rng, range_)
    scores = attention_scores(rotate_batch(gen, q_raw), rotate_batch(gen, k_raw))
    relativity = float(np.max(np.abs(scores - relative_scores_oracle(gen, q_raw, k_raw))))

    shift = rng.uniform(-range_, range_, size=gen.n_axes)
    q_shift = TokenBatch(q_raw.positions + shift, q_raw.vectors)
    k_shift = TokenBatch(k_raw.positions + shift, k_raw.vectors)
    shifted = attention_scores(rotate_batch(gen, q_shift), rotate_batch(gen, k_shift))
    equivariance = float(np.max(np.abs(shifted - scores)))

    half = 0.45 * gen.schedule.period
    displacements = rng.uniform(-half, half, size=(count, gen.n_axes))
    roundtrip: dict
    try:
        err = max(
            float(np.max(np.abs(recover_displacement(gen, rope_matrix_dense(gen, dx)) - dx)))
            for dx in displacements
        )
        roundtrip = {"name": "roundtrip", "residual": err, "threshold": 1e-8, "passed": err < 1e-8}
    except RopeAlgebraError as exc:
        roundtrip = {"name": "roundtrip", "residual": None, "threshold": 1e-8, "passed": False, "detail": str(exc)}

    tol = DEFAULT_TOLERANCES.relativity
    checks = [
        {"name": "score_relativity", "residual": relativity, "threshold": tol, "passed": relativity < tol},
        {"name": "shift_equivariance", "residual": equivariance, "threshold": tol, "passed": equivariance < tol},
        roundtrip,
    ]
    return {
        "seed": seed,
        "count": count,
        "d": gen.d,
        "n_axes": gen.n_axes,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
    }


def cmd_demo(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    seed = resolve_seed(args.seed)
    gen = load_generator(args.input)
    report = run_demo(gen, seed, args.count, args.range)
    _write(_dump(report), args.output)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rope-algebra", description="Construct and check N-dimensional RoPE generator sets.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a generator set as JSON")
    gen.add_argument("--axes", type=int, help="number of spatial axes N (default 2)")
    gen.add_argument("--blocks", type=int, help="2x2 blocks per axis K (default 1)")
    gen.add_argument("--base", type=float, help=f"frequency base (default {DEFAULT_BASE:g})")
    gen.add_argument("--theta", type=float, help="leading frequency; later blocks follow the base schedule (default 1)")
    gen.add_argument("--d", type=int, help="embed into so(d) when larger than 2*N*K")
    gen.add_argument("--mixed", type=float, nargs=2, metavar=("THETA1", "THETA2"), help="mixed-frequency 2D set")
    gen.add_argument("--conjugate", choices=KINDS, help="conjugate by a random orthogonal matrix of this kind")
    gen.add_argument("--ortho", metavar="FILE", help="conjugate by the orthogonal matrix of a parameter file")
    gen.add_argument("--seed", type=int)
    gen.add_argument("-o", "--output")
    gen.set_defaults(func=cmd_gen)

    ver = sub.add_parser("verify", help="validate a generator set")
    ver.add_argument("-i", "--input", required=True)
    ver.add_argument("-o", "--output")
    ver.add_argument("--samples", type=int, default=200, help="relativity position pairs")
    ver.add_argument("--range", type=float, default=50.0, help="coordinate range for relativity sampling")
    ver.add_argument("--tol-relativity", type=float)
    ver.add_argument("--grid", type=int, default=8, help="reversibility grid points per axis")
    ver.add_argument("--seed", type=int)
    ver.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="time fast vs dense rotation assembly")
    bench.add_argument("-i", "--input", required=True)
    bench.add_argument("-o", "--output")
    bench.add_argument("--samples", type=int, default=10_000, help="number of positions M")
    bench.add_argument("--range", type=float, default=50.0)
    bench.add_argument("--seed", type=int)
    bench.set_defaults(func=cmd_bench)

    demo = sub.add_parser("demo", help="end-to-end attention checks on a random batch")
    demo.add_argument("-i", "--input", required=True)
    demo.add_argument("-o", "--output")
    demo.add_argument("--count", type=int, default=8, help="tokens per batch")
    demo.add_argument("--range", type=float, default=50.0)
    demo.add_argument("--seed", type=int)
    demo.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RopeAlgebraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
