"""Acceptance gate: the nine release criteria, one test and one line each.

Each test runs a scenario (or a direct oracle check) at its release
configuration under `configs/`, enforces the numeric targets, and checks
the wall-clock budget.  Run with ``pytest -v`` to see one pass/fail line
per criterion; each test also prints an ``ACCEPTANCE n ...`` line.
"""

import pathlib
import time

import numpy as np
import pytest

from visualmetrics.config import load_config
from visualmetrics.evidence import write_csv
from visualmetrics.ball_oracle import BallOracle
from visualmetrics.scenarios import RUNNERS

CONFIG_DIR = pathlib.Path(__file__).resolve().parent.parent / "configs"

_results = {}


def _run(scenario, cfg_name=None):
    cfg = load_config(CONFIG_DIR / f"{cfg_name or scenario}.cfg")
    seed = int(cfg.get("run.seed", 0))
    start = time.perf_counter()
    rows = RUNNERS[scenario](cfg, seed=seed, jobs=1)
    elapsed = time.perf_counter() - start
    return rows, elapsed


def _report(number, label, ok, detail):
    line = f"ACCEPTANCE {number} ({label}): {'PASS' if ok else 'FAIL'} — {detail}"
    print(line)
    assert ok, line


def _all_pass(rows):
    failed = [r for r in rows if not r.passed]
    return not failed, failed


class TestAcceptance:
    def test_criterion_1_conformal_ratio_closed_form(self):
        rows, elapsed = _run("conformal-p1")
        ok, failed = _all_pass(rows)
        _report(
            1, "conformal ratio matches closed form at 20 probes",
            ok and elapsed < 300,
            f"{len(rows)} rows, {len(failed)} failed, {elapsed:.0f}s (< 300s)",
        )

    def test_criterion_2_generic_filling_closed_form(self):
        rows, elapsed = _run("filling-generic")
        closed = [r for r in rows if r.params.get("check") == "closed-form"]
        ok, failed = _all_pass(rows)
        _report(
            2, "generic filling sequence limit matches closed form to 1e-6",
            ok and len(closed) >= 100 and elapsed < 10,
            f"{len(closed)} closed-form rows, {len(failed)} failed, "
            f"{elapsed:.1f}s (< 10s)",
        )

    def test_criterion_3_sandwich_estimate(self):
        rows, elapsed = _run("sandwich")
        ok, failed = _all_pass(rows)
        _report(
            3, "invariant-vs-filling gap shrinks along heights, final <= 0.05",
            ok and elapsed < 600,
            f"{len(rows)} rows, {len(failed)} failed, {elapsed:.0f}s (< 600s)",
        )

    def test_criterion_4_length_lemma_suite(self):
        rows, elapsed = _run("lemma-suite")
        ok, failed = _all_pass(rows)
        _report(
            4, "length-functional bounds on randomized curves",
            ok and elapsed < 300,
            f"{len(rows)} rows, {len(failed)} failed, {elapsed:.0f}s (< 300s)",
        )

    def test_criterion_5_mobius_distortion_brackets(self):
        rows, elapsed = _run("boundary-map")
        ok, failed = _all_pass(rows)
        _report(
            5, "Mobius brackets contain 1 (width <= 0.05); control excludes 1",
            ok and elapsed < 1200,
            f"{len(rows)} rows, {len(failed)} failed, {elapsed:.0f}s (< 1200s)",
        )

    def test_criterion_6_bilipschitz_witness_audit(self):
        rows, elapsed = _run("bilip-p2")
        ok, failed = _all_pass(rows)
        _report(
            6, "boundary witness audit constant <= 1.2",
            ok and elapsed < 600,
            f"{len(rows)} rows, {len(failed)} failed, {elapsed:.0f}s (< 600s)",
        )

    def test_criterion_7_hyperbolicity(self):
        rows, elapsed = _run("hyperbolicity")
        ok, failed = _all_pass(rows)
        _report(
            7, "tree delta = 0 exactly; model delta seed-stable within 10%",
            ok and elapsed < 120,
            f"{len(rows)} rows, {len(failed)} failed, {elapsed:.0f}s (< 120s)",
        )

    def test_criterion_8_oracle_sanity(self):
        oracle = BallOracle(2)
        rng = np.random.default_rng(20260826)
        start = time.perf_counter()
        radii = rng.uniform(0.05, 0.95, (10_000, 3))
        dirs = rng.normal(size=(10_000, 3, 2)) + 1j * rng.normal(
            size=(10_000, 3, 2)
        )
        pts = radii[..., None] * dirs / np.linalg.norm(
            dirs, axis=-1, keepdims=True
        )
        worst_triangle = 0.0
        worst_unitary = 0.0
        theta = rng.uniform(0, 2 * np.pi, 10_000)
        for k in range(10_000):
            x, y, z = pts[k]
            dxy = oracle.distance(x, y)
            dyz = oracle.distance(y, z)
            dxz = oracle.distance(x, z)
            worst_triangle = max(worst_triangle, dxz - dxy - dyz)
            u = np.exp(1j * theta[k])
            worst_unitary = max(
                worst_unitary, abs(oracle.distance(u * x, u * y) - dxy)
            )
        elapsed = time.perf_counter() - start
        _report(
            8, "ball oracle triangle inequality and unitary invariance 1e-12",
            worst_triangle <= 1e-12 and worst_unitary <= 1e-12
            and elapsed < 10,
            f"triangle defect {worst_triangle:.2e}, unitary drift "
            f"{worst_unitary:.2e}, {elapsed:.1f}s (< 10s)",
        )

    def test_criterion_9_determinism(self, tmp_path):
        # bit-identical CSV on rerun, every scenario, reduced sizes
        cfg = load_config(CONFIG_DIR / "smoke.cfg")
        seed = int(cfg.get("run.seed", 0))
        mismatched = []
        for scenario in sorted(RUNNERS):
            blobs = []
            for attempt in range(2):
                rows = RUNNERS[scenario](cfg, seed=seed, jobs=1)
                path = tmp_path / f"{scenario}-{attempt}.csv"
                write_csv(path, rows)
                blobs.append(path.read_bytes())
            if blobs[0] != blobs[1]:
                mismatched.append(scenario)
        _report(
            9, "bit-identical CSV on rerun with the same seed",
            not mismatched,
            "all 7 scenarios identical" if not mismatched
            else f"mismatch in {mismatched}",
        )
