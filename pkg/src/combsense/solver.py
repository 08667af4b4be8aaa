"""l1-regularized spectrum reconstruction.

Solves  min ||x||_1  subject to  ||A x - y||_2 <= epsilon  by Newton root
finding on the Pareto curve phi(tau) = min {||A x - y||_2 : ||x||_1 <= tau},
where each LASSO subproblem is solved by a spectral (Barzilai-Borwein)
projected-gradient method with a nonmonotone line search.  The unknown is the
one-sided complex spectrum; gradients treat real and imaginary parts as
independent real coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .sensing import SensingOperator

_LINESEARCH_GAMMA = 1e-4
_MAX_BACKTRACKS = 24


class SolverStatus(Enum):
    CONVERGED = "converged"
    ITERATION_LIMIT = "iteration_limit"
    INFEASIBLE_EPSILON = "infeasible_epsilon"


class EpsilonPolicy(Enum):
    """How the residual bound is derived from the injected noise level.

    TIGHT: a tenth of the expected l2 norm of the sampled noise.
    RELAXED: the full expected l2 norm (lets weak lines survive shrinkage).
    MANUAL: caller supplies the value.
    """

    TIGHT = "tight"
    RELAXED = "relaxed"
    MANUAL = "manual"


def epsilon_from_noise(
    sigma_t: float,
    m: int,
    policy: EpsilonPolicy,
    manual_value: float | None = None,
) -> float:
    """Residual bound for m retained samples of i.i.d. sigma_t noise."""
    if policy is EpsilonPolicy.MANUAL:
        if manual_value is None or manual_value < 0:
            raise ValueError("manual epsilon policy requires a value >= 0")
        return float(manual_value)
    expected_norm = sigma_t * np.sqrt(m)
    if policy is EpsilonPolicy.TIGHT:
        return expected_norm / 10.0
    return expected_norm


@dataclass
class SolverConfig:
    epsilon: float
    max_outer_iters: int = 40
    max_inner_iters: int = 400
    optimality_tol: float = 1e-4
    step_min: float = 1e-16
    step_max: float = 1e16
    nonmonotone_memory: int = 10

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.optimality_tol <= 0:
            raise ValueError("optimality_tol must be positive")
        if not self.step_min < self.step_max:
            raise ValueError("require step_min < step_max")
        if self.nonmonotone_memory < 1:
            raise ValueError("nonmonotone_memory must be >= 1")


@dataclass
class SolverReport:
    final_residual_norm: float
    final_l1_norm: float
    outer_iterations: int
    inner_iterations_total: int
    dual_certificate: float
    status: SolverStatus
    pareto_tau: list[float] = field(default_factory=list)
    pareto_phi: list[float] = field(default_factory=list)

    def to_key_value_lines(self, prefix: str = "solver") -> list[str]:
        return [
            f"{prefix}.status = {self.status.value}",
            f"{prefix}.final_residual_norm = {self.final_residual_norm!r}",
            f"{prefix}.final_l1_norm = {self.final_l1_norm!r}",
            f"{prefix}.outer_iterations = {self.outer_iterations}",
            f"{prefix}.inner_iterations_total = {self.inner_iterations_total}",
            f"{prefix}.dual_certificate = {self.dual_certificate!r}",
        ]


def project_l1_ball(z: np.ndarray, tau: float) -> np.ndarray:
    """Euclidean projection onto {x : sum |x_i| <= tau} for complex x.

    Magnitudes are projected onto the simplex of radius tau (soft threshold at
    the water-filling level), phases are preserved.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    z = np.asarray(z)
    mags = np.abs(z)
    total = mags.sum()
    if total <= tau:
        return z.copy()
    if tau == 0.0:
        return np.zeros_like(z)
    ordered = np.sort(mags)[::-1]
    excess = np.cumsum(ordered) - tau
    counts = np.arange(1, ordered.size + 1)
    active = np.nonzero(ordered - excess / counts > 0)[0]
    k = active[-1]
    theta = excess[k] / (k + 1)
    shrunk = np.maximum(mags - theta, 0.0)
    safe = np.where(mags > 0, mags, 1.0)
    return z * (shrunk / safe)


def _real_dot(a: np.ndarray, b: np.ndarray) -> float:
    """Inner product treating real and imaginary parts as independent."""
    return float(np.real(np.vdot(a, b)))


@dataclass
class LassoResult:
    x: np.ndarray
    residual: np.ndarray
    dual: np.ndarray  # A* residual at the solution
    objective: float  # 0.5 ||A x - y||^2
    pg_norm: float
    iterations: int
    objective_history: list[float]
    converged: bool


def lasso_spg(
    A: SensingOperator,
    y: np.ndarray,
    tau: float,
    x0: np.ndarray,
    cfg: SolverConfig,
) -> LassoResult:
    """min ||A x - y||_2 subject to ||x||_1 <= tau, from a warm start x0.

    Projected gradient with Barzilai-Borwein step lengths clipped to
    [step_min, step_max]; a nonmonotone Armijo search compares against the
    largest of the last ``nonmonotone_memory`` objective values.  Exits when
    the projected-gradient norm drops below
    optimality_tol * max(1, ||y||_2) or at the iteration cap.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    y = np.asarray(y, dtype=np.float64)
    ynorm = np.linalg.norm(y)
    tol = cfg.optimality_tol * max(1.0, ynorm)

    x = project_l1_ball(np.asarray(x0, dtype=np.complex128), tau)
    residual = y - A.forward(x)
    dual = A.adjoint(residual)
    grad = -dual
    f = 0.5 * float(residual @ residual)
    history = [f]
    memory = [f]

    if tau == 0.0:
        return LassoResult(x, residual, dual, f, 0.0, 0, history, True)

    direction = project_l1_ball(x - grad, tau) - x
    dnorm = np.max(np.abs(direction)) if direction.size else 0.0
    if dnorm < 1.0 / cfg.step_max:
        step = cfg.step_max
    else:
        step = min(cfg.step_max, max(cfg.step_min, 1.0 / dnorm))

    iterations = 0
    converged = False
    pg_norm = np.linalg.norm(direction)
    for iterations in range(1, cfg.max_inner_iters + 1):
        pg = project_l1_ball(x - grad, tau) - x
        pg_norm = float(np.linalg.norm(pg))
        if pg_norm <= tol:
            converged = True
            iterations -= 1
            break

        f_ref = max(memory)
        trial_step = step
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            x_new = project_l1_ball(x - trial_step * grad, tau)
            r_new = y - A.forward(x_new)
            f_new = 0.5 * float(r_new @ r_new)
            d = x_new - x
            gtd = _real_dot(grad, d)
            if gtd >= 0.0:
                # no descent left along the projected arc
                break
            if f_new <= f_ref + _LINESEARCH_GAMMA * gtd:
                accepted = True
                break
            trial_step /= 2.0
        if not accepted:
            converged = pg_norm <= 10.0 * tol
            break

        g_new = -A.adjoint(r_new)
        s = x_new - x
        dg = g_new - grad
        sts = _real_dot(s, s)
        sty = _real_dot(s, dg)
        if sty <= 0.0:
            step = cfg.step_max
        else:
            step = min(cfg.step_max, max(cfg.step_min, sts / sty))

        x, residual, grad, f = x_new, r_new, g_new, f_new
        history.append(f)
        memory.append(f)
        if len(memory) > cfg.nonmonotone_memory:
            memory.pop(0)

    return LassoResult(x, residual, -grad, f, pg_norm, iterations, history, converged)


def bpdn_solve(
    A: SensingOperator,
    y: np.ndarray,
    cfg: SolverConfig,
) -> tuple[np.ndarray, SolverReport]:
    """Solve min ||x||_1 s.t. ||A x - y||_2 <= epsilon.

    Newton iteration on the Pareto curve: with phi(tau) the LASSO residual
    norm and lambda = ||A* r||_inf its slope magnitude times phi,
    tau <- tau + (phi - epsilon) * phi / lambda, warm-starting each LASSO
    solve from the previous solution.  Converged means the residual is within
    epsilon * (1 + optimality_tol) and not more than
    optimality_tol * max(1, ||y||) below epsilon.
    """
    y = np.asarray(y, dtype=np.float64)
    ynorm = float(np.linalg.norm(y))
    n = A.n_spectral

    if ynorm <= cfg.epsilon:
        x = np.zeros(n, dtype=np.complex128)
        dual = A.adjoint(y)
        report = SolverReport(
            final_residual_norm=ynorm,
            final_l1_norm=0.0,
            outer_iterations=0,
            inner_iterations_total=0,
            dual_certificate=float(np.max(np.abs(dual))) if n else 0.0,
            status=SolverStatus.CONVERGED,
            pareto_tau=[0.0],
            pareto_phi=[ynorm],
        )
        return x, report

    scale_tol = cfg.optimality_tol * max(1.0, ynorm)
    tau = 0.0
    x = np.zeros(n, dtype=np.complex128)
    residual = y.copy()
    phi = ynorm
    lam = float(np.max(np.abs(A.adjoint(residual))))

    taus = [tau]
    phis = [phi]
    inner_total = 0
    outer = 0
    while True:
        feasible = phi <= cfg.epsilon * (1.0 + cfg.optimality_tol)
        near_root = abs(phi - cfg.epsilon) <= scale_tol
        if feasible and near_root:
            status = SolverStatus.CONVERGED
            break
        if outer >= cfg.max_outer_iters or lam <= 1e-300:
            # lam ~ 0 means the residual is orthogonal to the range of A and
            # no tau can reduce it further
            status = SolverStatus.ITERATION_LIMIT
            break
        tau_new = max(0.0, tau + (phi - cfg.epsilon) * phi / lam)
        if abs(tau_new - tau) <= 1e-12 * max(1.0, tau):
            # Newton step below resolvable precision: the subproblem
            # tolerance bounds how closely the root can be approached
            status = SolverStatus.ITERATION_LIMIT
            break
        tau = tau_new
        result = lasso_spg(A, y, tau, x, cfg)
        outer += 1
        x = result.x
        residual = result.residual
        phi_new = float(np.linalg.norm(residual))
        lam = float(np.max(np.abs(result.dual)))
        inner_total += result.iterations
        taus.append(tau)
        phis.append(phi_new)
        if result.iterations == 0 and abs(phi_new - phi) <= 1e-14 * max(1.0, phi):
            phi = phi_new
            status = SolverStatus.ITERATION_LIMIT
            break
        phi = phi_new

    report = SolverReport(
        final_residual_norm=phi,
        final_l1_norm=float(np.sum(np.abs(x))),
        outer_iterations=outer,
        inner_iterations_total=inner_total,
        dual_certificate=lam,
        status=status,
        pareto_tau=taus,
        pareto_phi=phis,
    )
    return x, report
