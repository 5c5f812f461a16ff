"""Exit criteria: one test per criterion, each printing a pass/fail summary line."""

import math
import time

import numpy as np
import pytest

from rope_algebra.apply import TokenBatch, attention_scores, recover_displacement, relative_scores_oracle, rotate_batch
from rope_algebra.cli import main
from rope_algebra.generators import (
    FrequencySchedule,
    GeneratorSet,
    conjugate,
    embed_in_larger,
    mixed_2d,
    rope_matrix_dense,
    rope_matrix_fast,
    standard_1d,
    standard_2d,
    toral_basis,
)
from rope_algebra.linalg import skew_unit, structure_residuals
from rope_algebra.ortho import KINDS, OrthoParam, build_orthogonal, directional_derivative, fd_directional_derivative
from rope_algebra.validate import centralizer_dimension, check_relativity, check_reversibility, validate_all

TORAL_SHAPES = [(n, k) for n in (1, 2, 3) for k in (1, 2)]


def toral_sets():
    return [toral_basis(n, k, FrequencySchedule.from_base(k)) for n, k in TORAL_SHAPES]


def conjugated_sets(rng, per_kind, base_sets):
    out = []
    for kind in KINDS:
        for i in range(per_kind):
            g = base_sets[i % len(base_sets)]
            out.append(conjugate(g, build_orthogonal(OrthoParam.random(kind, g.d, rng))))
    return out


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start

    @property
    def ok(self):
        return self.elapsed < self.seconds


def test_criterion_1_relativity(record_criterion):
    rng = np.random.default_rng(101)
    with Budget(60) as budget:
        sets = toral_sets() + [embed_in_larger(standard_2d(FrequencySchedule((1.0,))), 6)]
        sets += conjugated_sets(rng, 50, toral_sets())
        worst = max(check_relativity(g, 200, 50.0, 1e-9, seed=i).residual for i, g in enumerate(sets))
    passed = worst < 1e-9 and budget.ok
    record_criterion(1, "relativity suite", passed, f"{len(sets)} sets, max residual {worst:.2e} < 1e-9, {budget.elapsed:.1f}s < 60s")
    assert worst < 1e-9
    assert budget.ok


def test_criterion_2_reversibility(record_criterion):
    rng = np.random.default_rng(202)
    with Budget(30) as budget:
        sets = toral_sets() + conjugated_sets(rng, 4, toral_sets())
        min_dist = min(-check_reversibility(g, 8, 1e-6).residual for g in sets)
        roundtrip = 0.0
        for g in sets:
            half = g.schedule.period / 2
            for dx in rng.uniform(-0.999 * half, 0.999 * half, size=(20, g.n_axes)):
                err = np.max(np.abs(recover_displacement(g, rope_matrix_dense(g, dx)) - dx))
                roundtrip = max(roundtrip, float(err))
        mixed = mixed_2d(1.0, 2.0)
        mixed_grid = check_reversibility(mixed, 8, 1e-6)
        collision = -check_reversibility(mixed, positions=[[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]]).residual
    passed = min_dist > 1e-6 and roundtrip < 1e-8 and not mixed_grid.passed and collision == 0.0 and budget.ok
    record_criterion(
        2,
        "reversibility suite",
        passed,
        f"min grid distance {min_dist:.3f} > 1e-6, round-trip {roundtrip:.2e} < 1e-8, "
        f"mixed collision distance {collision}, {budget.elapsed:.1f}s < 30s",
    )
    assert min_dist > 1e-6
    assert roundtrip < 1e-8
    assert not mixed_grid.passed and -mixed_grid.residual == 0.0
    assert collision == 0.0
    assert budget.ok


def test_criterion_3_constraint_fidelity(record_criterion):
    rng = np.random.default_rng(303)
    one = FrequencySchedule((1.0,))
    with Budget(10) as budget:
        sound = toral_sets() + [embed_in_larger(standard_2d(one), 6)] + conjugated_sets(rng, 2, toral_sets()[:4])
        sound_ok = all(validate_all(g, n_samples=50).verdict for g in sound)
        b = standard_1d(one).basis[0]
        corrupted = GeneratorSet((np.triu(standard_2d(one).basis[0]), standard_2d(one).basis[1]), one)
        negatives = {
            "non-commuting": (GeneratorSet((skew_unit(4, 0, 1), skew_unit(4, 1, 2)), one), {"commutativity"}),
            "scalar multiple": (GeneratorSet((b, 2 * b), one), {"independence"}),
            "non-skew": (corrupted, {"skew", "relativity"}),
            "mixed": (mixed_2d(1.0, 2.0), {"independence", "reversibility"}),
        }
        named = {}
        for label, (g, expected) in negatives.items():
            report = validate_all(g, n_samples=50)
            named[label] = (not report.verdict) and expected <= set(report.failed)
        exact = set(validate_all(corrupted, n_samples=50).failed) == {"skew", "relativity"}
    passed = sound_ok and all(named.values()) and exact and budget.ok
    record_criterion(3, "constraint-system fidelity", passed, f"{len(sound)} sound sets pass, negatives named {named}, {budget.elapsed:.1f}s < 10s")
    assert sound_ok
    assert all(named.values()), named
    assert exact
    assert budget.ok


def test_criterion_4_masa(record_criterion):
    rng = np.random.default_rng(404)
    with Budget(10) as budget:
        sets = toral_sets() + conjugated_sets(rng, 3, toral_sets())
        mismatches = [(g.d, centralizer_dimension(g)) for g in sets if centralizer_dimension(g) != g.d // 2]
        so6 = embed_in_larger(standard_2d(FrequencySchedule((1.0,))), 6)
        nu6 = centralizer_dimension(so6)
    passed = not mismatches and nu6 == 3 and so6.n_axes < nu6 and budget.ok
    record_criterion(4, "MASA characterization", passed, f"{len(sets)} sets with nu = floor(d/2), so(6) pair nu={nu6} > N=2, {budget.elapsed:.1f}s < 10s")
    assert not mismatches
    assert nu6 == 3 and so6.n_axes < nu6
    assert budget.ok


def test_criterion_5_oracle_equivalence(record_criterion):
    rng = np.random.default_rng(505)
    shapes = [(1, 1), (2, 1), (2, 2), (3, 2), (2, 4), (4, 4), (2, 8), (2, 16), (4, 8), (8, 4), (32, 1)]
    with Budget(60) as budget:
        worst = 0.0
        for trial in range(100):
            n, k = shapes[trial % len(shapes)]
            g = toral_basis(n, k, FrequencySchedule.from_base(k))
            if trial % 4:
                g = conjugate(g, build_orthogonal(OrthoParam.random(KINDS[trial % 3], g.d, rng)))
            x = rng.uniform(-50, 50, size=n)
            worst = max(worst, float(np.linalg.norm(rope_matrix_fast(g, x) - rope_matrix_dense(g, x))))
        score_worst = 0.0
        for _ in range(20):
            g = conjugate(toral_basis(2, 2, FrequencySchedule.from_base(2)), build_orthogonal(OrthoParam.random("givens", 8, rng)))
            q, k = TokenBatch.random(g, 6, rng), TokenBatch.random(g, 6, rng)
            s = attention_scores(rotate_batch(g, q), rotate_batch(g, k))
            score_worst = max(score_worst, float(np.max(np.abs(s - relative_scores_oracle(g, q, k)))))
    passed = worst < 1e-10 and score_worst < 1e-9 and budget.ok
    record_criterion(5, "oracle equivalence", passed, f"fast vs dense {worst:.2e} < 1e-10 (d<=64), scores {score_worst:.2e} < 1e-9, {budget.elapsed:.1f}s < 60s")
    assert worst < 1e-10
    assert score_worst < 1e-9
    assert budget.ok


def test_criterion_6_orthogonal_parameterizations(record_criterion):
    rng = np.random.default_rng(606)
    d = 8
    with Budget(60) as budget:
        orth = det = deriv = tangency = 0.0
        for kind in KINDS:
            for _ in range(100):
                r = structure_residuals(build_orthogonal(OrthoParam.random(kind, d, rng)))
                orth, det = max(orth, r.orth_residual), max(det, r.det_residual)
            p = OrthoParam.random(kind, d, rng)
            q = build_orthogonal(p)
            for idx in rng.choice(len(p), size=10, replace=False):
                dq = directional_derivative(p, idx)
                fd = fd_directional_derivative(p, idx)
                deriv = max(deriv, float(np.linalg.norm(dq - fd) / np.linalg.norm(fd)))
                tangency = max(tangency, float(np.linalg.norm(dq.T @ q + q.T @ dq)))
    passed = orth < 1e-10 and det < 1e-8 and deriv < 1e-5 and tangency < 1e-8 and budget.ok
    record_criterion(
        6,
        "orthogonal parameterizations",
        passed,
        f"orth {orth:.1e}, det {det:.1e}, derivative rel err {deriv:.1e}, tangency {tangency:.1e}, {budget.elapsed:.1f}s < 60s",
    )
    assert orth < 1e-10 and det < 1e-8
    assert deriv < 1e-5
    assert tangency < 1e-8
    assert budget.ok


def test_criterion_7_closed_forms(record_criterion):
    rng = np.random.default_rng(707)
    theta = 1.0
    g1 = standard_1d(FrequencySchedule((theta,)))
    g2 = standard_2d(FrequencySchedule((theta,)))
    with Budget(5) as budget:
        worst = 0.0
        for m, (x1, x2) in zip(rng.uniform(-50, 50, 100), rng.uniform(-50, 50, (100, 2))):
            c, s = math.cos(m * theta), math.sin(m * theta)
            worst = max(worst, float(np.max(np.abs(rope_matrix_dense(g1, [m]) - np.array([[c, -s], [s, c]])))))
            c1, s1 = math.cos(x1 * theta), math.sin(x1 * theta)
            c2, s2 = math.cos(x2 * theta), math.sin(x2 * theta)
            eq3 = np.array([[c1, -s1, 0, 0], [s1, c1, 0, 0], [0, 0, c2, -s2], [0, 0, s2, c2]])
            worst = max(worst, float(np.max(np.abs(rope_matrix_dense(g2, [x1, x2]) - eq3))))
    passed = worst < 1e-12 and budget.ok
    record_criterion(7, "closed-form agreement", passed, f"max entry error {worst:.2e} < 1e-12, {budget.elapsed:.2f}s < 5s")
    assert worst < 1e-12
    assert budget.ok


def test_criterion_8_cli_contract(record_criterion, tmp_path):
    def pipeline(tag, gen_args):
        g = tmp_path / f"{tag}.json"
        codes = (
            main(["gen", *gen_args, "--seed", "9", "-o", str(g)]),
            main(["verify", "-i", str(g), "--seed", "9", "-o", str(tmp_path / f"{tag}.verify.json")]),
            main(["demo", "-i", str(g), "--seed", "9", "-o", str(tmp_path / f"{tag}.demo.json")]),
        )
        blobs = [p.read_bytes() for p in (g, tmp_path / f"{tag}.verify.json", tmp_path / f"{tag}.demo.json")]
        return codes, blobs

    with Budget(30) as budget:
        results = {}
        for tag, args in {"toral": ["--axes", "2", "--blocks", "2", "--conjugate", "givens"], "mixed": ["--mixed", "1", "2"]}.items():
            first = pipeline(tag, args)
            second = pipeline(tag, args)
            results[tag] = (first[0], first[1] == second[1])
    expected = {"toral": (0, 0, 0), "mixed": (0, 1, 1)}
    codes_ok = all(results[t][0] == expected[t] for t in expected)
    bytes_ok = all(results[t][1] for t in expected)
    passed = codes_ok and bytes_ok and budget.ok
    record_criterion(8, "CLI contract", passed, f"exit codes {({t: r[0] for t, r in results.items()})}, deterministic bytes {bytes_ok}, {budget.elapsed:.1f}s < 30s")
    assert codes_ok
    assert bytes_ok
    assert budget.ok
