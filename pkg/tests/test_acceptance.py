"""Acceptance checks; each prints one PASS/FAIL line with its measured value."""

import json
import sys
import time
import warnings
from fractions import Fraction
from math import comb
from pathlib import Path

import numpy as np
import pytest

from relinv import cli
from relinv.encode import (ELECTRIC, MAGNETIC, DyonConfiguration, TotalMomentumLabel, build_dyon_cell,
                           default_species, encode_dyon_qubit, encode_dyon_state, encode_massive_equal_momentum,
                           encode_massless_helicity_sum, encode_total_momentum, product_state)
from relinv.errors import InvarianceWarning
from relinv.little_group import (FourMomentum, LorentzTransform, compose_elements, element_distance, pairwise_phase,
                                 rotation_matrix, wigner_phase_massless, wigner_rotation_massive)
from relinv.partial_wave import partial_wave_gram
from relinv.schur import all_pi_operators, build_schur_basis_su2, build_schur_basis_u1, pi_multiplicity
from relinv.slocc import SLOCCMeasure, slocc_proportionality
from relinv.twirl import GroupMeasure, LorentzSampler, invariance_report

from test_schur import brute_multiplicities
from test_twirl import CONTROL_AVERAGE_EXPECTED, CONTROL_MEASURE, CONTROL_WORST_SEEDED

HALF = Fraction(1, 2)
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {title}: {detail}")
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def test_criterion_1_dimension_tables(verdict):
    t0 = time.perf_counter()
    bad = []
    for n in range(1, 13):
        b = build_schur_basis_u1(n)
        for h in range(-n, n + 1, 2):
            if b.irrep(h).multiplicity != comb(n, (n + h) // 2):
                bad.append(("massless", n, h))
    for n in range(1, 7):
        got = {ir.label: ir.multiplicity for ir in build_schur_basis_su2(n).irreps}
        if got != brute_multiplicities(n):
            bad.append(("massive", n))
    elapsed = time.perf_counter() - t0
    ok = not bad and build_schur_basis_u1(4).irrep(0).multiplicity == 6 and elapsed < 10
    verdict(1, "dimension tables", ok, f"mismatches={bad} runtime={elapsed:.2f}s")


def test_criterion_2_pi_algebra(verdict):
    worst_comm, worst_complete = 0.0, 0.0
    for builder in (build_schur_basis_su2, build_schur_basis_u1):
        for n in range(1, 5):
            b = builder(n)
            irr, mult = all_pi_operators(b)
            irr_p = [p.in_product_basis(b) for p in irr]
            for m in mult:
                mp = m.in_product_basis(b)
                for c in irr_p:
                    worst_comm = max(worst_comm, float(np.max(np.abs(mp @ c - c @ mp))))
            total = sum(pi_multiplicity(b, ir.label, mu, mu).in_product_basis(b)
                        for ir in b.irreps for mu in range(ir.multiplicity))
            worst_complete = max(worst_complete, float(np.max(np.abs(total - np.eye(b.dim)))))
    ok = worst_comm <= 1e-12 and worst_complete <= 1e-12
    verdict(2, "Pi commutation and completeness", ok, f"commutator={worst_comm:.1e} completeness={worst_complete:.1e}")


def example_encodings():
    rho_l = np.array([[0.7, 0.1 + 0.2j], [0.1 - 0.2j, 0.3]])
    p = FourMomentum.massive(1.0, [0.3, -0.2, 1.1])
    k = FourMomentum.massless([0.4, 0.1, 2.0])
    dfs = np.zeros((6, 6))
    dfs[0, 0] = dfs[5, 5] = dfs[0, 5] = dfs[5, 0] = 0.5
    label = TotalMomentumLabel.build(4.0, 1, [0.2, 0.5, -0.4], [("1/2", "-1/2"), ("-1/2", "1/2")])
    return [
        ("massive N=3", encode_massive_equal_momentum(build_schur_basis_su2(3), p, {HALF: rho_l}), 1e-9),
        ("massive N=4", encode_massive_equal_momentum(build_schur_basis_su2(4), p,
                                                      {0: 0.5 * rho_l, 1: 0.5 * np.eye(3) / 3}), 1e-9),
        ("massless N=4", encode_massless_helicity_sum(build_schur_basis_u1(4), k, {0: dfs}), 1e-12),
        ("dyon cells", encode_dyon_state(encode_dyon_qubit(build_dyon_cell(1), build_dyon_cell(0), 0.6, 0.8j)), 1e-12),
        ("total momentum J=1", encode_total_momentum(label, rho_l), 1e-9),
    ]


def per_element_check(measure):
    rows = []
    for name, state, tol in example_encodings():
        t0 = time.perf_counter()
        r = invariance_report(state, measure, threshold=tol)
        rows.append((name, r.worst_case, tol, time.perf_counter() - t0))
    return rows


def test_criterion_3_per_element_invariance(verdict):
    rows = per_element_check(GroupMeasure.parametric(LorentzSampler(500, seed=2024)))
    ok = all(w <= tol and t < 60 for _, w, tol, t in rows)
    detail = "; ".join(f"{n}: worst={w:.1e} (tol {tol:.0e}, {t:.2f}s)" for n, w, tol, t in rows)
    verdict(3, "per-element invariance over 500 samples", ok, detail)


def test_criterion_4_measure_independence(verdict):
    rng = np.random.default_rng(77)
    delta = GroupMeasure.delta(LorentzTransform.boost(rng.normal(0, 1.0), rng.normal(size=3))
                               @ LorentzTransform.rotation(rng.normal(size=3), rng.uniform(0, 2 * np.pi)))
    measures = {
        "delta at a random boost": delta,
        "uniform-angle rotations": GroupMeasure.parametric(LorentzSampler(500, seed=2024, rapidity="none")),
        "heavy-tailed rapidity": GroupMeasure.parametric(LorentzSampler(500, seed=2024, rapidity="student-t", df=2)),
    }
    ok, parts = True, []
    for name, m in measures.items():
        rows = per_element_check(m)
        worst_ratio = max(w / tol for _, w, tol, _ in rows)
        ok &= all(w <= tol for _, w, tol, _ in rows)
        parts.append(f"{name}: max worst/tol={worst_ratio:.1e}")
    verdict(4, "invariance under three measures, same thresholds", ok, "; ".join(parts))


def test_criterion_5_negative_controls(verdict):
    b = build_schur_basis_su2(2)
    up = np.zeros((4, 4))
    up[0, 0] = 1.0
    ctrl = product_state("massive", b, up, {"p": FourMomentum.massive(1.0, [0, 0, np.sqrt(3)]), "N": 2})
    r = invariance_report(ctrl, GroupMeasure.parametric(LorentzSampler(500, seed=0, **CONTROL_MEASURE)))
    j1 = next(x for x in r.blocks if x.label == "1")
    sp = default_species()
    a = DyonConfiguration((ELECTRIC, MAGNETIC, ELECTRIC, MAGNETIC), sp)
    c = DyonConfiguration((MAGNETIC, ELECTRIC, MAGNETIC, ELECTRIC), sp)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        q = encode_dyon_qubit(a, c, 2 ** -0.5, 2 ** -0.5)
    flagged = any(issubclass(w.category, InvarianceWarning) for w in caught) and not q.invariant
    state = encode_dyon_state(q)
    flagged &= bool(state.info["flags"])
    ok = (r.worst_case > 1e-3 and flagged and abs(j1.worst_block - CONTROL_WORST_SEEDED) < 1e-9 * CONTROL_WORST_SEEDED
          and abs(j1.average_block - CONTROL_AVERAGE_EXPECTED) < 0.01)
    verdict(5, "negative controls", ok,
            f"|up up> worst={r.worst_case:.4f} avg={j1.average_block:.5f} (oracle {CONTROL_AVERAGE_EXPECTED:.5f}); "
            f"dyon q_sums={q.q_sums} flagged={flagged}")


def test_criterion_6_cocycles(verdict):
    rng = np.random.default_rng(6)
    sampler = lambda s: LorentzSampler(100, seed=s, sigma=1.0).elements()
    l1s, l2s = sampler(61), sampler(62)

    def massive_p():
        return FourMomentum.massive(rng.uniform(0.5, 2), rng.normal(size=3))

    def check(extract, moms):
        worst = 0.0
        for l1, l2, ps in zip(l1s, l2s, moms):
            w = extract(l2 @ l1, *ps)
            w12 = compose_elements(extract(l2, *[l1.apply(p) for p in ps]), extract(l1, *ps))
            worst = max(worst, element_distance(w12, w))
        return worst

    res = {
        "massive": check(wigner_rotation_massive, [(massive_p(),) for _ in range(100)]),
        "massless": check(wigner_phase_massless, [(FourMomentum.massless(rng.normal(size=3)),) for _ in range(100)]),
        "pairwise": check(pairwise_phase, [(massive_p(), massive_p()) for _ in range(100)]),
    }
    rot = 0.0
    for _ in range(100):
        axis, ang = rng.normal(size=3), rng.uniform(0, np.pi)
        w = wigner_rotation_massive(LorentzTransform.rotation(axis, ang), massive_p())
        rot = max(rot, float(np.max(np.abs(w.rotation - rotation_matrix(axis, ang)))))
    ok = all(v <= 1e-8 for v in res.values()) and rot <= 1e-10
    verdict(6, "Wigner cocycles over 100 triples", ok,
            " ".join(f"{k}={v:.1e}" for k, v in res.items()) + f" rotation-identity={rot:.1e}")


def test_criterion_7_partial_wave_orthonormality(verdict):
    worst, cases = 0.0, 0
    for lam1, lam2 in [("1/2", "1/2"), ("1/2", "-1/2"), ("-1/2", "1/2"), (1, -1), (-1, 1), (1, 0), (0, 0),
                       ("1/2", 0), (0, "-1/2"), (1, "-1/2"), ("3/2", "-1/2")]:
        lam = Fraction(lam1) - Fraction(lam2)
        j_max = Fraction(2) if lam.denominator == 1 else Fraction(3, 2)
        if abs(lam) > j_max:
            continue
        labels, gram = partial_wave_gram(j_max, lam1, lam2)
        worst = max(worst, float(np.max(np.abs(gram - np.eye(len(labels))))))
        cases += 1
    verdict(7, "partial-wave Gram matrix", worst <= 1e-8, f"max |G - I|={worst:.1e} over {cases} helicity pairs")


def test_criterion_8_slocc_proportionality(verdict):
    t0 = time.perf_counter()
    p = FourMomentum.massive(1.0, [0, 0, 0])
    inputs = {
        2: (build_schur_basis_su2(2), {0: [[0.35]], 1: [[0.65]]}),
        3: (build_schur_basis_su2(3), {HALF: [[0.42, 0.12j], [-0.12j, 0.18]], Fraction(3, 2): [[0.4]]}),
    }
    ok, parts = True, []
    for n, (basis, blocks) in inputs.items():
        rho = encode_massive_equal_momentum(basis, p, blocks).matrix
        rep = slocc_proportionality(rho, basis, SLOCCMeasure(5000, seed=100 + n), groups=100, z_limit=3.0)
        ok &= rep.passed
        parts.extend(f"N={n} J={b.label}: beta={b.beta:.4f} rms-z={b.z_rms:.2f} max-z={b.z_max:.2f}"
                     for b in rep.blocks if b.beta is not None)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    verdict(8, "SLOCC per-block proportionality", ok, "; ".join(parts) + f"; runtime={elapsed:.1f}s")


def test_criterion_9_determinism(verdict, tmp_path):
    reports = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        code = cli.main(["run", "--config", str(CONFIGS / "massive_n3_qubit.json"), "--out-dir", str(out)])
        rep = json.loads((out / "report.json").read_text())
        rep.pop("timestamp")
        reports.append((code, json.dumps(rep, sort_keys=True).encode(), (out / "summary.csv").read_bytes()))
    ok = reports[0] == reports[1] and reports[0][0] == 0
    verdict(9, "byte-identical reports for the same config and seed", ok,
            f"exit codes={[r[0] for r in reports]} identical={reports[0][1:] == reports[1][1:]}")
