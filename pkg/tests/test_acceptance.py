"""Acceptance suite.

One test per criterion; each prints a single [PASS]/[FAIL] line (visible with
``pytest -s``).  Tolerances and budgets are pinned here, not configurable.
"""

import time

import numpy as np
import pytest

from opcoupling.blockops import Block2x2
from opcoupling.errors import FeasibilityError
from opcoupling.hankel import (
    SymbolFC,
    build_sections,
    invert_symbol,
    mc_residual_hankel,
    shift_comparability,
    singular_values,
)
from opcoupling.instances import InstanceSpec, random_instance, random_sc_witness
from opcoupling.numkernel import rank_of
from opcoupling.reduction import run_pipeline
from opcoupling.relations import (
    SCWitness,
    mc_to_eae_special,
    sc_to_mc,
    verify_eae_special,
    verify_mc,
    verify_sc,
)


def _line(num: int, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")


def _criterion(num: int, detail: str):
    class _Reporter:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            _line(num, exc_type is None, detail)
            return False

    return _Reporter()


# ---------------------------------------------------------------------------
# criterion 1: worked-instance exactness


def test_criterion_1_worked_instance_exactness():
    with _criterion(1, "worked-instance chain exact to 1e-12 in under 1 s"):
        t0 = time.perf_counter()
        m = Block2x2([[2.0]], [[1.0]], [[1.0]], [[1.0]])
        sc = SCWitness(M=m, U=[[1.0]], V=[[0.5]])
        assert verify_sc(sc, 1e-12).passed

        mc = sc_to_mc(sc, 1e-12)
        assert verify_mc(mc, 1e-12).passed

        special = mc_to_eae_special(mc, 1e-12)
        rep = verify_eae_special(special, 1e-12)
        assert rep.passed
        assert all(rep.residuals[f"identity_{r}"] <= 1e-12 for r in
                   ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi"))

        pipeline = run_pipeline([[1.0]], [[0.5]], w=special, tol=1e-12)
        assert pipeline.success
        assert pipeline.max_residual <= 1e-12
        assert verify_sc(pipeline.final_sc, 1e-12).max_residual <= 1e-12

        elapsed = time.perf_counter() - t0
        assert elapsed < 1.0


# ---------------------------------------------------------------------------
# criteria 2 and 4 share the randomized suite


@pytest.fixture(scope="module")
def pipeline_suite():
    results = []
    t0 = time.perf_counter()
    for seed in range(1, 201):
        meta = np.random.default_rng(10_000 + seed)
        n = int(meta.integers(1, 13))
        m = int(meta.integers(1, 13))
        k = int(meta.integers(0, min(n, m, 4) + 1))
        cond = float(np.exp(meta.uniform(0.0, np.log(1e3))))
        u, v = random_instance(InstanceSpec(n, m, k, seed=seed, cond_bound=cond))
        report = run_pipeline(u, v, tol=1e-8)
        results.append((n, m, k, report))
    elapsed = time.perf_counter() - t0
    return results, elapsed


def test_criterion_2_randomized_pipeline_suite(pipeline_suite):
    results, elapsed = pipeline_suite
    with _criterion(2, "200 random pipelines pass at 1e-8 in under 30 s"):
        assert len(results) == 200
        for n, m, k, report in results:
            assert report.success
            assert report.max_residual <= 1e-8
            fred = report.fredholm
            assert report.x0_dim == fred.dim_ker_e11
            assert report.y0_dim == fred.dim_h2
            assert fred.dim_h2 == fred.dim_g1
            assert fred.dim_ker_f22 == fred.dim_ker_e11
        assert elapsed < 30.0


# ---------------------------------------------------------------------------
# criterion 3: feasibility oracle


def test_criterion_3_oracle_equivalence():
    with _criterion(3, "pipeline succeeds iff nullities agree (16/16)"):
        agreements = 0
        for k_u in range(4):
            for k_v in range(4):
                u, _ = random_instance(
                    InstanceSpec(5, 5, k_u, seed=300 + k_u, cond_bound=100))
                _, v = random_instance(
                    InstanceSpec(6, 6, k_v, seed=400 + k_v, cond_bound=100))
                try:
                    report = run_pipeline(u, v, tol=1e-8)
                    succeeded = report.success
                except FeasibilityError:
                    succeeded = False
                assert succeeded == (k_u == k_v)
                agreements += 1
        assert agreements == 16


# ---------------------------------------------------------------------------
# criterion 4: index identities and extension side


def test_criterion_4_index_identities(pipeline_suite):
    results, _ = pipeline_suite
    with _criterion(4, "index identities and extension side on all instances"):
        for n, m, k, report in results:
            fred = report.fredholm
            assert fred.f11.index == -fred.f22.index
            assert fred.e11.index == -fred.ehat11.index
            assert fred.f22.index == m - n
            if fred.f22.index > 0:
                assert report.eaoe.extended_side == "U"
                assert report.eaoe.ext_dim == fred.f22.index
            elif fred.f22.index < 0:
                assert report.eaoe.extended_side == "V"
                assert report.eaoe.ext_dim == -fred.f22.index
            else:
                assert report.eaoe.ext_dim == 0


# ---------------------------------------------------------------------------
# criterion 5: finite sections of an invertible symbol


def test_criterion_5_finite_sections():
    with _criterion(5, "symbol inversion, coupling residual and Hankel ranks"):
        f = SymbolFC(0, [2.0, 1.0])

        inv = invert_symbol(f, 512, 1e-8)
        lo = min(inv.support[0], -10)
        js = np.arange(lo, 50)
        closed = np.where(js >= 0, 0.5 * (-0.5) ** np.maximum(js, 0), 0.0)
        l1_err = float(np.sum(np.abs(inv.coeff(js) - closed)))
        assert l1_err <= 1e-12

        res20 = mc_residual_hankel(f, 20).interior_residual
        res30 = mc_residual_hankel(f, 30).interior_residual
        res40 = mc_residual_hankel(f, 40).interior_residual
        assert res30 <= 1e-6
        assert res40 < res20

        h_f = build_sections(f, 30).H
        h_inv = build_sections(inv, 30).H
        assert rank_of(h_f) == 1
        assert rank_of(h_inv) == 1
        sigma_f = singular_values(h_f)
        sigma_inv = singular_values(h_inv)
        assert abs(sigma_f[0] - 1.0) <= 1e-9
        assert abs(sigma_inv[0] - 1.0 / 3.0) <= 1e-6


# ---------------------------------------------------------------------------
# criterion 6: shift comparability


def test_criterion_6_shift_comparability():
    with _criterion(6, "shift comparability verdicts"):
        f = SymbolFC(0, [2.0, 1.0])
        inv = invert_symbol(f, 512, 1e-8)
        sigma_f = singular_values(build_sections(f, 30).H)
        sigma_inv = singular_values(build_sections(inv, 30).H)
        rep = shift_comparability(sigma_f, sigma_inv, 4)
        assert rep.verdict_k == 0
        assert abs(rep.verdict_c - 1.0 / 3.0) <= 1e-6

        alpha = 2.0 ** -np.arange(12)
        rep_same = shift_comparability(alpha, alpha, 4)
        assert rep_same.verdict_k == 0
        assert abs(rep_same.verdict_c - 1.0) <= 1e-15

        beta = 2.0 ** -np.arange(1, 12)
        rep_shift = shift_comparability(alpha, beta, 4)
        assert rep_shift.verdict_k == 1
        assert abs(rep_shift.verdict_c - 1.0) <= 1e-12


# ---------------------------------------------------------------------------
# criterion 7: converter postconditions at scale


def test_criterion_7_converter_postconditions():
    with _criterion(7, "500 converter round-trips at 1e-10 / 1e-9 in under 30 s"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(2024)
        for trial in range(500):
            n = int(rng.integers(1, 9))
            m = int(rng.integers(1, 9))
            cond = float(np.exp(rng.uniform(0.0, np.log(1e4))))
            sc = random_sc_witness(n, m, cond, rng)
            mc = sc_to_mc(sc, 1e-9)
            assert verify_mc(mc, 1e-10).passed
            special = mc_to_eae_special(mc, 1e-9)
            assert verify_eae_special(special, 1e-9).passed
        elapsed = time.perf_counter() - t0
        assert elapsed < 30.0
