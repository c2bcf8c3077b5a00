"""Acceptance criteria, runnable both from pytest and the selftest command.

Each criterion returns a CriterionResult whose detail string is fully
deterministic (timing lives in the elapsed field only), so selftest reports
are byte-reproducible for a fixed master seed.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cones import (
    AxisCone,
    OrthantCone,
    Region,
    unit_perp,
    boundary_orthogonal_partner,
    duality_witness,
    moreau_decompose,
    sample_outside,
)
from .operators import SymmetricOperator, bottom_eigen, correspondence_check, top_eigen
from .perturbation import (
    FixedPerturbation,
    drifted_axis,
    end_to_end_semigroup_check,
    ergodic_drift_check,
    improving_radius,
    quartic_coefficient,
    quartic_margin,
    radius_from_alpha,
    riesz_projector,
    semigroup_threshold,
)
from .positivity import VerdictStatus, improves_positivity_axis
from .schrodinger import GridSpec, MagneticModel, magnetic_experiment, orthant_failure_demo
from .seeding import derive_seed, rng_for

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float


def _result(number, name, passed, detail, started):
    # report details must stay comma-free: they are embedded in CSV rows
    return CriterionResult(number=number, name=name, passed=bool(passed),
                           detail=detail.replace(",", ";"),
                           elapsed=time.perf_counter() - started)


def criterion_1_radius_formula(seed):
    started = time.perf_counter()
    alpha, r = improving_radius(SymmetricOperator(np.diag([2.0, 1.0])),
                                np.array([1.0, 0.0]))
    closed = (1.0 - 0.25) / (4.0 * SQRT2 * 1.25)
    gap_closed = abs(r - closed)
    worst_consistency = 0.0
    for a in np.arange(0.0, 0.95, 0.1):
        worst_consistency = max(
            worst_consistency,
            abs(radius_from_alpha(a) - 1.0 / (4.0 * quartic_coefficient(a))),
        )
    passed = (abs(alpha - 0.5) <= 1e-12 and gap_closed <= 1e-12
              and worst_consistency <= 1e-12)
    detail = (f"r={r:.17g} |r-closed|={gap_closed:.3g} "
              f"max|r-1/(4c)|={worst_consistency:.3g}")
    return _result(1, "radius_formula", passed, detail, started)


def criterion_2_threshold_reproduction(seed):
    started = time.perf_counter()
    t = SymmetricOperator(np.diag([0.0, 1.0]))
    s_spec = FixedPerturbation(SymmetricOperator([[0.0, 1.0], [1.0, 0.0]]),
                               a=0.0, b=1.0)
    s0 = math.log(2.0)
    budget = semigroup_threshold(t, s_spec, s0=s0, kappa0=0.5,
                                 kappa_grid=np.linspace(-0.45, 0.45, 41))
    # independent hand derivation: gaps are sqrt(1 + 4 k^2) with minimum 1
    delta = 1.0
    epsilon = delta / 2.0
    alpha = 1.0 - math.exp(-s0 * delta)
    r = (1.0 - alpha**2) / (4.0 * SQRT2 * (1.0 + alpha**2))
    x = r * math.sqrt(1.0 - r**2 / 4.0)
    f_r = x / (1.0 + x)
    kappa_adm = f_r / 2.0  # c(kappa) = 2 |kappa|
    errors = [
        abs(budget.epsilon - epsilon),
        abs(budget.alpha - alpha),
        abs(budget.c_threshold - f_r),
        abs(budget.kappa_threshold - kappa_adm),
    ]
    sweep = end_to_end_semigroup_check(
        t, s_spec, budget,
        s_samples=[s0 / 5.0, 2.0 * s0 / 5.0, 3.0 * s0 / 5.0, 4.0 * s0 / 5.0, s0],
        seed=seed, kappas=np.linspace(-0.045, 0.045, 10),
    )
    passed = max(errors) <= 1e-9 and sweep.all_true and len(sweep.rows) == 50
    detail = (f"f(r)={budget.c_threshold:.17g} kappa_adm={budget.kappa_threshold:.17g} "
              f"max_err={max(errors):.3g} rows={len(sweep.rows)} "
              f"failures={len(sweep.failures)}")
    return _result(2, "threshold_reproduction", passed, detail, started)


def criterion_3_cone_suite(seed):
    started = time.perf_counter()
    checked = 0
    violations = 0
    worst_split = 0.0
    worst_witness = -math.inf
    worst_partner = 0.0
    for dim in range(2, 17):
        rng = rng_for(derive_seed(seed, 3, dim), 0)
        axis = rng.standard_normal(dim)
        axis /= np.linalg.norm(axis)
        cones = (AxisCone(axis), OrthantCone(dim))
        for cone in cones:
            for _ in range(250):
                w = rng.standard_normal(dim) * rng.uniform(0.1, 10.0)
                split = moreau_decompose(cone, w)
                checked += 1
                norm_w = float(np.linalg.norm(w))
                scale = max(1.0, float(np.linalg.norm(split.u) * np.linalg.norm(split.v)))
                defect = max(split.residual / norm_w, abs(split.u @ split.v) / scale)
                worst_split = max(worst_split, defect)
                in_cone = (cone.classify(split.u) is not Region.OUTSIDE
                           and cone.classify(split.v) is not Region.OUTSIDE)
                if defect > 1e-9 or not in_cone:
                    violations += 1
        for cone, count in ((cones[0], 150), (cones[1], 50)):
            for _ in range(count):
                u = sample_outside(cone, rng)
                v = duality_witness(cone, u)
                checked += 1
                inner = float(u @ v)
                worst_witness = max(worst_witness, inner)
                if inner >= 0.0 or cone.classify(v) is Region.OUTSIDE:
                    violations += 1
        axis_cone = cones[0]
        for _ in range(100):
            u = (axis_cone.axis + unit_perp(axis_cone.axis, rng)) * rng.uniform(0.1, 5.0)
            partner = boundary_orthogonal_partner(axis_cone, u)
            checked += 1
            defect = abs(partner @ u) / float(u @ u)
            worst_partner = max(worst_partner, defect)
            if defect > 1e-10:
                violations += 1
    passed = violations == 0 and checked >= 10_000
    detail = (f"checked={checked} violations={violations} "
              f"worst_split={worst_split:.3g} worst_witness={worst_witness:.3g} "
              f"worst_partner={worst_partner:.3g}")
    return _result(3, "cone_suite", passed, detail, started)


def criterion_4_improvement_equivalence(seed):
    started = time.perf_counter()
    from .harness import generate_instance

    failures = 0
    for index in range(100):
        dim = 3 + index % 8
        simple = generate_instance("psd-simple", dim, derive_seed(seed, 4, 0, index))
        _, u0, _ = top_eigen(simple)
        if improves_positivity_axis(simple, u0).status is not VerdictStatus.CERTIFIED_TRUE:
            failures += 1
        degenerate = generate_instance("degenerate-top", dim, derive_seed(seed, 4, 1, index))
        _, u0, _ = top_eigen(degenerate)
        verdict = improves_positivity_axis(degenerate, u0)
        cone = AxisCone(u0)
        if (verdict.status is not VerdictStatus.CERTIFIED_FALSE
                or cone.classify(degenerate.apply(verdict.witness)) is Region.INTERIOR):
            failures += 1
    detail = f"instances=200 failures={failures}"
    return _result(4, "improvement_equivalence", failures == 0, detail, started)


def criterion_5_drift_suite(seed):
    started = time.perf_counter()
    a = SymmetricOperator(np.diag([2.0, 1.0]))
    e1 = np.array([1.0, 0.0])
    rng = rng_for(derive_seed(seed, 5), 0)
    failures = 0
    worst_certificate = math.inf
    for index in range(50):
        drift = float(rng.uniform(0.0, 1.0 / SQRT2))
        theta = 2.0 * math.asin(drift / 2.0)
        u1 = np.array([math.cos(theta), math.sin(theta)])
        verdict = ergodic_drift_check(a, e1, u1, sample_pairs=20,
                                      seed=derive_seed(seed, 5, index), n_max=64)
        if verdict.status is not VerdictStatus.SAMPLED_TRUE or verdict.margin < -1e-12:
            failures += 1
        else:
            worst_certificate = min(worst_certificate, verdict.margin)
    detail = f"axes=50 failures={failures} worst_certificate={worst_certificate:.3g}"
    return _result(5, "drift_suite", failures == 0, detail, started)


def criterion_6_quartic_grid(seed):
    started = time.perf_counter()
    violations = 0
    for alpha in np.arange(0.1, 0.95, 0.1):
        c = quartic_coefficient(alpha)
        upper = min(c / 4.0, 1.0 / (4.0 * c))
        xs = np.linspace(0.0, upper, 1000, endpoint=False)
        violations += int(np.sum([quartic_margin(c, x) >= 0 for x in xs]))
    detail = f"grid_points=9000 violations={violations}"
    return _result(6, "quartic_grid", violations == 0, detail, started)


def criterion_7_riesz_suite(seed):
    started = time.perf_counter()
    worst_match = 0.0
    worst_doubling = 0.0
    worst_idem = 0.0
    failures = 0
    for index in range(20):
        rng = rng_for(derive_seed(seed, 7, index), 0)
        dim = 4 + index % 9
        q = np.linalg.qr(rng.standard_normal((dim, dim)))[0]
        eigs = np.concatenate([[0.0], np.sort(rng.uniform(1.0, 3.0, size=dim - 1))])
        t = SymmetricOperator((q * eigs) @ q.T)
        gap = float(eigs[1])
        projector = riesz_projector(t, center=0.0, radius=gap / 2.0, nodes=64)
        bottom = t.decomposition.eigenvectors[:, 0]
        oracle = np.outer(bottom, bottom)
        match = float(np.linalg.norm(projector.matrix - oracle))
        doubled = riesz_projector(t, center=0.0, radius=gap / 2.0, nodes=128)
        doubling = float(np.linalg.norm(projector.matrix - doubled.matrix))
        worst_match = max(worst_match, match)
        worst_doubling = max(worst_doubling, doubling)
        worst_idem = max(worst_idem, projector.idempotency_defect)
        if match > 1e-8 or doubling > 1e-10 or projector.idempotency_defect > 1e-8:
            failures += 1

    chain_checks = 0
    for index in range(5):
        rng = rng_for(derive_seed(seed, 7, 100 + index), 0)
        dim = int(rng.integers(3, 9))
        q = np.linalg.qr(rng.standard_normal((dim, dim)))[0]
        eigs = np.concatenate([[0.0], np.sort(rng.uniform(1.0, 2.0, size=dim - 1))])
        t = SymmetricOperator((q * eigs) @ q.T)
        g = rng.standard_normal((dim, dim))
        s_mat = SymmetricOperator((g + g.T) / 2.0)
        s_spec = FixedPerturbation((0.05 / s_mat.norm) * s_mat)
        budget = semigroup_threshold(t, s_spec, s0=1.0, kappa0=1.0,
                                     kappa_grid=np.linspace(-0.9, 0.9, 13))
        _, u0, _ = bottom_eigen(t, require_simple=True)
        for kappa in budget.kappas[budget.admissible]:
            _, bound, actual = drifted_axis(t + s_spec.operator_at(float(kappa)),
                                            u0, budget, kappa=float(kappa))
            chain_checks += 1
            if actual > bound + 1e-8 or actual >= budget.r:
                failures += 1
    detail = (f"projectors=20 chain_checks={chain_checks} failures={failures} "
              f"worst_match={worst_match:.3g} worst_doubling={worst_doubling:.3g} "
              f"worst_idem={worst_idem:.3g}")
    return _result(7, "riesz_suite", failures == 0, detail, started)


def criterion_8_correspondence(seed):
    started = time.perf_counter()
    failures = 0
    for index in range(100):
        dim = 2 + index % 9
        rng = rng_for(derive_seed(seed, 8, index), 0)
        g = rng.standard_normal((dim, dim))
        t = SymmetricOperator((g + g.T) / 2.0)
        report = correspondence_check(t, seed=derive_seed(seed, 8, index, 1))
        if not report.ok:
            failures += 1
    detail = f"matrices=100 failures={failures}"
    return _result(8, "correspondence", failures == 0, detail, started)


def criterion_9_schrodinger(seed):
    started = time.perf_counter()
    model = MagneticModel.from_functions(
        GridSpec(8, 0.5), lambda x: x * x, lambda x: math.exp(-x * x), 0.0
    )
    report = magnetic_experiment(model, e_grid=np.linspace(-0.008, 0.008, 17),
                                 s0=1.0, seed=seed)
    base_ok = all(
        v.status is VerdictStatus.CERTIFIED_TRUE for v in report.base_verdicts
    )
    demo = orthant_failure_demo(model.with_coupling(0.5), s=0.5)
    passed = (base_ok and report.admissible_coupling > 0.0 and report.all_true
              and demo.max_imag >= 1e-10)
    detail = (f"ground={report.ground_energy:.12g} "
              f"e0={report.admissible_coupling:.12g} "
              f"sweep_rows={len(report.sweep.rows)} "
              f"failures={len(report.sweep.failures)} "
              f"demo_imag={demo.max_imag:.6g}")
    return _result(9, "schrodinger_pipeline", passed, detail, started)


CRITERIA = (
    criterion_1_radius_formula,
    criterion_2_threshold_reproduction,
    criterion_3_cone_suite,
    criterion_4_improvement_equivalence,
    criterion_5_drift_suite,
    criterion_6_quartic_grid,
    criterion_7_riesz_suite,
    criterion_8_correspondence,
    criterion_9_schrodinger,
)

RUNTIME_BUDGETS = {1: 1.0, 2: 5.0, 3: 30.0, 4: 30.0, 5: 10.0, 6: 1.0,
                   7: 30.0, 8: 10.0, 9: 60.0}


def run_criteria(seed, jobs=1):
    """Execute criteria 1-9 for a master seed, in order."""
    if jobs <= 1:
        return [criterion(seed) for criterion in CRITERIA]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda c: c(seed), CRITERIA))
