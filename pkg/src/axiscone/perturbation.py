"""Quantitative stability: drift radii, spectral-gap budgets, contour projectors.

The chain implemented here: a positive operator with a simple extremal
eigenvalue tolerates an axis drift up to r(alpha) = (1 - alpha^2) /
(4 sqrt(2) (1 + alpha^2)) while staying positivity improving, where alpha is
the spectral ratio on the axis complement.  For heat semigroups of a
perturbed generator, a relative-bound budget converts the perturbation size
into an eigenprojection drift via a circle-contour projector, and the
admissible region is where that drift stays below r.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cones import AxisCone, sample_in_cone
from .errors import (
    AxisNotEigenvector,
    BudgetViolated,
    ContourHitsSpectrum,
    ContractViolation,
    DegenerateBottom,
    GapCollapsed,
)
from .operators import (
    SymmetricOperator,
    as_vector,
    bottom_eigen,
    heat_semigroup,
    restricted_top,
    top_eigen,
)
from .positivity import (
    Verdict,
    VerdictStatus,
    ergodic_probe,
    improves_positivity_axis,
    improves_positivity_general,
    require_psd,
)
from .seeding import derive_seed, rng_for

SQRT2 = math.sqrt(2.0)
INV_SQRT2 = 1.0 / SQRT2


def radius_from_alpha(alpha):
    """Admissible axis-drift radius for spectral ratio alpha in [0, 1)."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha={alpha} must lie in [0, 1)")
    return (1.0 - alpha**2) / (4.0 * SQRT2 * (1.0 + alpha**2))


def quartic_coefficient(alpha):
    """Linear coefficient c = sqrt(2)(1+alpha^2)/(1-alpha^2) of the margin quartic."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha={alpha} must lie in [0, 1)")
    return SQRT2 * (1.0 + alpha**2) / (1.0 - alpha**2)


def quartic_margin(c, x):
    """g(x) = x^4 - 2 x^2 + c x - 1/4; negative g certifies the drift bound."""
    if c <= 0:
        raise ValueError("c must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    return x**4 - 2.0 * x**2 + c * x - 0.25


def lemma_region(c, x):
    """Where the quartic is guaranteed negative: x < min(c/4, 1/(4c))."""
    if c <= 0:
        raise ValueError("c must be positive")
    return x < min(c / 4.0, 1.0 / (4.0 * c))


def improvement_threshold(r):
    """c-threshold f(r) = r sqrt(1 - r^2/4) / (1 + r sqrt(1 - r^2/4))."""
    x = r * math.sqrt(1.0 - r**2 / 4.0)
    return x / (1.0 + x)


def drift_certificate_lhs(alpha, d, t=None):
    """Left side of the drift-improvement inequality.

    With t defaulting to (1/sqrt(2) - d)^{-1} (the only instantiation the
    drift argument needs; t >= 1 is exposed for direct use), returns
    1/sqrt(1 + alpha^2 (t^2 - 1)) - d.  Improvement w.r.t. the drifted axis
    is certified when this exceeds 1/sqrt(2).
    """
    if t is None:
        if d >= INV_SQRT2:
            raise ValueError("default t requires drift below 1/sqrt(2)")
        t = 1.0 / (INV_SQRT2 - d)
    if t < 1.0:
        raise ValueError("t must be >= 1")
    return 1.0 / math.sqrt(1.0 + alpha**2 * (t**2 - 1.0)) - d


def improving_radius(A, u0, tau_gap=1e-9):
    """Spectral ratio alpha and drift radius r for a PSD operator.

    u0 must be a unit top eigenvector; any unit axis within r of u0 keeps
    the operator positivity improving for the corresponding cone.
    """
    require_psd(A)
    u0 = as_vector(u0)
    lam, _, _ = top_eigen(A, tau_gap=tau_gap, require_simple=True)
    resid = float(np.linalg.norm(A.apply(u0) - lam * u0))
    if abs(np.linalg.norm(u0) - 1.0) > 1e-9 or resid > 1e-9 * max(1.0, abs(lam)):
        raise AxisNotEigenvector(f"u0 is not a unit top eigenvector (residual {resid:.3e})")
    lam_perp = restricted_top(A, u0)
    alpha = 0.0 if lam_perp is None else max(lam_perp, 0.0) / lam
    return alpha, radius_from_alpha(alpha)


def ergodic_drift_check(A, u0, u1, sample_pairs=50, seed=0, n_max=64):
    """Ergodicity for a drifted axis with the positivity certificate.

    Applicable when ||u1 - u0|| < 1/sqrt(2); then every nonzero element u of
    the drifted cone satisfies <u0, u> >= (1/sqrt(2) - ||u1-u0||) ||u|| > 0,
    which is verified for every sample alongside the power probe.
    """
    require_psd(A)
    u0 = as_vector(u0)
    u1 = as_vector(u1)
    lam = A.decomposition.max_eigenvalue
    resid = float(np.linalg.norm(A.apply(u0) - lam * u0))
    if abs(np.linalg.norm(u0) - 1.0) > 1e-9 or resid > 1e-9 * max(1.0, abs(lam)):
        raise AxisNotEigenvector(f"u0 is not a unit top eigenvector (residual {resid:.3e})")
    if abs(np.linalg.norm(u1) - 1.0) > 1e-9:
        raise ValueError("u1 must be a unit vector")
    drift = float(np.linalg.norm(u1 - u0))
    slack = INV_SQRT2 - drift
    if slack <= 0.0:
        return Verdict("ergodic_drift_check", VerdictStatus.INAPPLICABLE,
                       margin=slack, seed=seed,
                       detail=f"drift {drift:.6g} >= 1/sqrt(2); theorem silent here")
    cone = AxisCone(u1)
    rng = rng_for(seed, 0)
    worst_certificate = math.inf
    for _ in range(sample_pairs):
        u = sample_in_cone(cone, rng)
        v = sample_in_cone(cone, rng)
        for w in (u, v):
            certificate = float(u0 @ w) / float(np.linalg.norm(w)) - slack
            worst_certificate = min(worst_certificate, certificate)
            if certificate < -1e-12:
                return Verdict("ergodic_drift_check", VerdictStatus.CERTIFIED_FALSE,
                               margin=certificate, witness=w, seed=seed,
                               detail="positivity certificate violated (toolkit bug)")
        probe = ergodic_probe(A, cone, u, v, n_max=n_max)
        if not probe.found:
            return Verdict("ergodic_drift_check", VerdictStatus.CERTIFIED_FALSE,
                           margin=probe.value, witness=u, seed=seed,
                           detail=f"no positive pairing within {n_max} powers")
    return Verdict("ergodic_drift_check", VerdictStatus.SAMPLED_TRUE,
                   margin=worst_certificate, seed=seed,
                   detail=f"{sample_pairs} pairs ergodic; certificate slack "
                          f"{worst_certificate:.3e}")


def certified_improving_under_drift(A, u0, u1, tau_gap=1e-9, n_restarts=8, seed=0):
    """Improvement w.r.t. a drifted axis: closed-form certificate, then search.

    Evaluates the drift inequality at d = ||u1 - u0||; when its left side
    exceeds 1/sqrt(2) the verdict is certified with no search.  Otherwise
    (including the gapless limit alpha -> 1) the multistart verifier takes
    over, which in dimension 2 is still an exhaustive sweep.
    """
    alpha, r = improving_radius(A, u0, tau_gap=tau_gap)
    u1 = as_vector(u1)
    d = float(np.linalg.norm(u1 - u0))
    if d < INV_SQRT2:
        lhs = drift_certificate_lhs(alpha, d)
        margin = lhs - INV_SQRT2
        if margin > 1e-12:
            return Verdict("certified_improving_under_drift",
                           VerdictStatus.CERTIFIED_TRUE, margin=margin, seed=seed,
                           detail=f"drift certificate: alpha={alpha:.6g} d={d:.6g}")
    fallback = improves_positivity_general(A, AxisCone(u1), n_restarts=n_restarts,
                                           seed=seed)
    return Verdict("certified_improving_under_drift", fallback.status,
                   margin=fallback.margin, witness=fallback.witness, seed=seed,
                   detail=f"fallback search: {fallback.detail}")


@dataclass(frozen=True)
class RieszProjector:
    """Spectral projector obtained by circle-contour quadrature."""

    matrix: np.ndarray
    center: float
    radius: float
    nodes: int
    imag_residual: float
    idempotency_defect: float


def riesz_projector(T, center, radius, nodes=64):
    """Trapezoidal contour quadrature of the resolvent around a circle.

    The result must be real and idempotent to 1e-8; the quadrature converges
    exponentially in the node count because the integrand is analytic in an
    annulus around the contour.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if nodes < 8:
        raise ValueError("need at least 8 quadrature nodes")
    eigs = T.decomposition.eigenvalues
    dist = np.abs(eigs - center)
    if np.any((dist >= radius * (1 - 1e-6)) & (dist <= radius * (1 + 1e-6))):
        raise ContourHitsSpectrum(
            f"eigenvalue within 1e-6 of the circle |z - {center}| = {radius}"
        )
    n = T.dim
    eye = np.eye(n)
    acc = np.zeros((n, n), dtype=complex)
    for k in range(nodes):
        theta = 2.0 * math.pi * k / nodes
        z = center + radius * complex(math.cos(theta), math.sin(theta))
        acc += complex(math.cos(theta), math.sin(theta)) * np.linalg.solve(
            z * eye - T.matrix, eye
        )
    proj = (radius / nodes) * acc
    imag_residual = float(np.max(np.abs(proj.imag)))
    if imag_residual > 1e-8:
        raise ContractViolation(
            f"contour projector has imaginary residual {imag_residual:.3e}"
        )
    real = proj.real.copy()
    defect = float(np.linalg.norm(real @ real - real))
    if defect > 1e-8:
        raise ContractViolation(f"contour projector idempotency defect {defect:.3e}")
    real.setflags(write=False)
    return RieszProjector(matrix=real, center=center, radius=radius, nodes=nodes,
                          imag_residual=imag_residual, idempotency_defect=defect)


class FixedPerturbation:
    """Linear family kappa -> kappa * S with relative bounds a|kappa|, b|kappa|.

    At finite dimension the tightest defaults are a = 0 and b = ||S||; the
    unbounded-operator analysis these constants usually come from trivializes
    here.
    """

    def __init__(self, S, a=0.0, b=None):
        if not isinstance(S, SymmetricOperator):
            S = SymmetricOperator(S)
        self.S = S
        self.a = float(a)
        self.b = S.norm if b is None else float(b)

    def operator_at(self, kappa):
        return float(kappa) * self.S

    def a_at(self, kappa):
        return self.a * abs(kappa)

    def b_at(self, kappa):
        return self.b * abs(kappa)

    def c_slope(self, mu, epsilon):
        return self.a + ((abs(mu) + epsilon) * self.a + self.b) / epsilon


class PerturbationFamily:
    """Callback family kappa -> S(kappa) with tabulated relative bounds."""

    def __init__(self, build, a_fn=None, b_fn=None):
        self.build = build
        self.a_fn = a_fn if a_fn is not None else lambda kappa: 0.0
        self.b_fn = b_fn

    def operator_at(self, kappa):
        return self.build(kappa)

    def a_at(self, kappa):
        return float(self.a_fn(kappa))

    def b_at(self, kappa):
        if self.b_fn is not None:
            return float(self.b_fn(kappa))
        return self.operator_at(kappa).norm

    def c_slope(self, mu, epsilon):
        return None


@dataclass(frozen=True)
class PerturbationBudget:
    """All scalars of the semigroup stability argument over a kappa grid."""

    regime: str
    mu: float
    delta: float
    epsilon: float
    s0: float
    alpha: float
    r: float
    c_threshold: float
    kappa0: float
    kappas: np.ndarray
    gaps: np.ndarray
    a_values: np.ndarray
    b_values: np.ndarray
    c_values: np.ndarray
    admissible: np.ndarray
    kappa_threshold: float
    c_slope: float | None = None

    def __post_init__(self):
        recomputed = radius_from_alpha(self.alpha)
        if abs(recomputed - self.r) > 1e-14:
            raise ContractViolation("budget radius is not recomputable from alpha")
        if self.regime == "semigroup" and not 0.0 < self.alpha < 1.0:
            raise ContractViolation("semigroup-regime alpha must lie in (0, 1)")

    def c_at(self, kappa):
        if self.c_slope is not None:
            return self.c_slope * abs(kappa)
        exact = np.nonzero(np.abs(self.kappas - kappa) <= 1e-12)[0]
        if exact.size:
            return float(self.c_values[exact[0]])
        order = np.argsort(self.kappas)
        return float(np.interp(kappa, self.kappas[order], self.c_values[order]))

    def is_admissible(self, kappa):
        return abs(kappa) < self.kappa0 and self.c_at(kappa) < self.c_threshold

    def header_items(self):
        return [
            ("regime", self.regime),
            ("mu", format(self.mu, ".17g")),
            ("delta", format(self.delta, ".17g")),
            ("epsilon", format(self.epsilon, ".17g")),
            ("s0", format(self.s0, ".17g")),
            ("alpha", format(self.alpha, ".17g")),
            ("r", format(self.r, ".17g")),
            ("c_threshold", format(self.c_threshold, ".17g")),
            ("kappa0", format(self.kappa0, ".17g")),
            ("kappa_threshold", format(self.kappa_threshold, ".17g")),
        ]


def semigroup_threshold(T, S_spec, s0, kappa0, kappa_grid, tau_gap=1e-9):
    """Budget for the perturbed heat semigroup over a kappa grid.

    delta is the smallest gap between the bottom eigenvalue of T + S(kappa)
    and the rest of its spectrum over the grid (grid density is the caller's
    responsibility); epsilon = delta/2 is the contour radius; alpha =
    1 - exp(-s0 delta) feeds the drift radius r; admissible kappas satisfy
    c(kappa) < f(r).
    """
    if s0 <= 0:
        raise ValueError("s0 must be positive")
    if kappa0 <= 0:
        raise ValueError("kappa0 must be positive")
    kappas = np.atleast_1d(np.asarray(kappa_grid, dtype=float))
    if kappas.size == 0:
        raise ValueError("kappa grid must be nonempty")
    mu, _, _ = bottom_eigen(T, tau_gap=tau_gap, require_simple=True)

    gaps = np.empty(kappas.size)
    a_values = np.empty(kappas.size)
    b_values = np.empty(kappas.size)
    for i, kappa in enumerate(kappas):
        perturbed = T + S_spec.operator_at(kappa)
        eigs = perturbed.decomposition.eigenvalues
        if eigs.size < 2:
            raise DegenerateBottom("need dimension >= 2 for a spectral gap")
        gaps[i] = float(eigs[1] - eigs[0])
        a_values[i] = S_spec.a_at(kappa)
        b_values[i] = S_spec.b_at(kappa)

    delta = float(np.min(gaps))
    if delta <= 1e-12 * max(1.0, T.norm):
        raise GapCollapsed(f"uniform gap {delta:.3e} collapsed on the grid")
    epsilon = delta / 2.0
    alpha = 1.0 - math.exp(-s0 * delta)
    r = radius_from_alpha(alpha)
    c_threshold = improvement_threshold(r)
    c_values = a_values + ((abs(mu) + epsilon) * a_values + b_values) / epsilon
    admissible = (np.abs(kappas) < kappa0) & (c_values < c_threshold)

    slope = S_spec.c_slope(mu, epsilon)
    if slope is not None:
        kappa_threshold = min(kappa0, math.inf if slope == 0 else c_threshold / slope)
    else:
        # largest grid |kappa| whose whole symmetric interval stays admissible
        magnitudes = np.unique(np.abs(kappas))
        kappa_threshold = 0.0
        for mag in magnitudes:
            covered = np.abs(kappas) <= mag
            if np.all(admissible[covered]):
                kappa_threshold = float(mag)
            else:
                break
    return PerturbationBudget(
        regime="semigroup", mu=mu, delta=delta, epsilon=epsilon, s0=float(s0),
        alpha=alpha, r=r, c_threshold=c_threshold, kappa0=float(kappa0),
        kappas=kappas, gaps=gaps, a_values=a_values, b_values=b_values,
        c_values=c_values, admissible=admissible, kappa_threshold=kappa_threshold,
        c_slope=slope,
    )


def drifted_axis(T_kappa, u0, budget, kappa, nodes=64):
    """Perturbed ground axis via the contour projector, with its drift bounds.

    Requires c(kappa) < 1/2; then the projector difference is bounded by
    c/(1-c) and the normalized drift by sqrt(2(1 - sqrt(1 - (c/(1-c))^2))).
    Violation of the chain raises: it restates proven inequalities, so a
    failure is a toolkit bug, not a property of the instance.
    """
    u0 = as_vector(u0)
    c = budget.c_at(kappa)
    if c >= 0.5:
        raise BudgetViolated(f"c(kappa)={c:.6g} >= 1/2: eigenvector argument fails")
    projector = riesz_projector(T_kappa, budget.mu, budget.epsilon, nodes=nodes)
    image = projector.matrix @ u0
    norm = float(np.linalg.norm(image))
    if norm < 1e-12:
        raise BudgetViolated("projector annihilated the unperturbed axis")
    v_kappa = image / norm
    if float(v_kappa @ u0) < 0:
        v_kappa = -v_kappa
    drift_actual = float(np.linalg.norm(v_kappa - u0))
    ratio = c / (1.0 - c)
    drift_bound = math.sqrt(2.0 * (1.0 - math.sqrt(max(0.0, 1.0 - ratio**2))))
    if drift_actual > drift_bound + 1e-8:
        raise ContractViolation(
            f"axis drift {drift_actual:.6g} exceeds bound {drift_bound:.6g}"
        )
    if c < budget.c_threshold and drift_actual >= budget.r:
        raise ContractViolation(
            f"admissible kappa produced drift {drift_actual:.6g} >= r {budget.r:.6g}"
        )
    return v_kappa, drift_bound, drift_actual


@dataclass(frozen=True)
class SweepRow:
    kappa: float
    s: float
    c_kappa: float
    threshold: float
    drift_bound: float
    drift_actual: float
    verdict: Verdict
    alpha_op: float
    alpha_uniform: float

    def csv_row(self):
        return [
            format(self.kappa, ".17g"),
            format(self.s, ".17g"),
            format(self.c_kappa, ".17g"),
            format(self.threshold, ".17g"),
            format(self.drift_bound, ".17g"),
            format(self.drift_actual, ".17g"),
            self.verdict.status.value,
            format(self.alpha_op, ".17g"),
            format(self.alpha_uniform, ".17g"),
        ]


SWEEP_CSV_COLUMNS = [
    "kappa", "s", "c_kappa", "threshold", "drift_bound", "drift_actual",
    "verdict", "alpha_op", "alpha_uniform",
]


@dataclass(frozen=True)
class SweepReport:
    budget: PerturbationBudget
    rows: tuple

    @property
    def failures(self):
        return [row for row in self.rows if not row.verdict.is_true]

    @property
    def all_true(self):
        return not self.failures


def end_to_end_semigroup_check(T, S_spec, budget, s_samples, seed=0, kappas=None):
    """Drive the full pipeline over admissible (kappa, s) pairs.

    Each pair exponentiates T + S(kappa), recomputes the spectral ratio of
    the exponential (the uniform alpha of the budget is the worst case; both
    are reported), and asks for improvement w.r.t. the unperturbed axis.
    The base case kappa = 0 is verified directly through the certified
    axis criterion for every s.
    """
    s_samples = [float(s) for s in s_samples]
    for s in s_samples:
        if s <= 0:
            raise ValueError("s = 0 is excluded: the identity is not improving")
        if s > budget.s0:
            raise ValueError(f"s={s} > s0={budget.s0}: outside theorem scope")
    if kappas is None:
        kappas = [float(k) for k in budget.kappas[budget.admissible]]
    else:
        kappas = [float(k) for k in kappas]
        for kappa in kappas:
            if not budget.is_admissible(kappa):
                raise ValueError(f"kappa={kappa} is not admissible for this budget")
    mu0, u0, _ = bottom_eigen(T, require_simple=True)

    rows = []
    for i, kappa in enumerate(sorted(kappas)):
        t_kappa = T + S_spec.operator_at(kappa)
        c_kappa = budget.c_at(kappa)
        _, drift_bound, drift_actual = drifted_axis(t_kappa, u0, budget, kappa)
        _, axis_kappa, _ = bottom_eigen(t_kappa, require_simple=True)
        if float(axis_kappa @ u0) < 0:
            axis_kappa = -axis_kappa
        for j, s in enumerate(s_samples):
            semigroup = heat_semigroup(t_kappa, s)
            if kappa == 0.0:
                verdict = improves_positivity_axis(semigroup, axis_kappa)
            else:
                verdict = certified_improving_under_drift(
                    semigroup, axis_kappa, u0,
                    seed=derive_seed(seed, i, j),
                )
            alpha_op, _ = improving_radius(semigroup, axis_kappa)
            rows.append(SweepRow(
                kappa=kappa, s=s, c_kappa=c_kappa, threshold=budget.c_threshold,
                drift_bound=drift_bound, drift_actual=drift_actual,
                verdict=verdict, alpha_op=alpha_op, alpha_uniform=budget.alpha,
            ))
    return SweepReport(budget=budget, rows=tuple(rows))
