"""Derivative-free COBYLA optimizer and an Adam update rule.

The COBYLA implementation follows Powell's scheme: the objective is
modeled by linear interpolation over a simplex of n+1 points, a trust
region bounds each descent step, simplex geometry is repaired when the
interpolation degenerates, and the resolution radius rho shrinks
monotonically from rho_begin to rho_end. Constraints are not exposed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# trust-region control constants (ratio thresholds and radius multipliers)
_ETA1, _ETA2 = 0.1, 0.7
_GAMMA1, _GAMMA2, _GAMMA3 = 0.5, 2.0, 1.5
# simplex acceptability: vertex distances within _BETA*rho, face
# distances at least _ALPHA*rho
_ALPHA, _BETA = 0.25, 2.1


class OptimizerError(RuntimeError):
    pass


class NonFiniteObjectiveError(OptimizerError):
    """Objective returned NaN/inf; carries the best point found so far."""

    def __init__(self, x, x_best, f_best, trace):
        super().__init__(f"objective returned a non-finite value at x={x}")
        self.x = x
        self.x_best = x_best
        self.f_best = f_best
        self.trace = trace


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "COBYLA"
    max_evals: int = 60
    rho_begin: float = 0.5
    rho_end: float = 1e-4
    adam_step_size: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("COBYLA", "Adam"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if not self.rho_begin > self.rho_end > 0:
            raise ValueError("need rho_begin > rho_end > 0")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")


@dataclass
class CobylaResult:
    x_best: np.ndarray
    f_best: float
    trace: list[float]
    n_evals: int
    status: str  # "rho_end" or "max_evals"
    message: str = ""


class _BudgetExhausted(Exception):
    pass


def _reduced_rho(rho: float, rho_end: float) -> float:
    ratio = rho / rho_end
    if ratio > 250.0:
        return 0.1 * rho
    if ratio <= 16.0:
        return rho_end
    return float(np.sqrt(rho * rho_end))


def cobyla_minimize(objective, x0, config: OptimizerConfig | None = None) -> CobylaResult:
    """Minimize ``objective`` from ``x0`` without derivatives.

    Every objective evaluation is recorded in the returned trace, and the
    run stops at ``config.max_evals`` evaluations or once the trust
    radius reaches ``config.rho_end``. Always returns the best point
    evaluated. A non-finite objective value raises
    :class:`NonFiniteObjectiveError` carrying the best-so-far state.
    """
    config = config or OptimizerConfig()
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size == 0 or not np.all(np.isfinite(x0)):
        raise OptimizerError("x0 must be a non-empty finite vector")
    n = x0.size
    rho_begin, rho_end, max_evals = config.rho_begin, config.rho_end, config.max_evals

    trace: list[float] = []
    best = {"x": x0.copy(), "f": np.inf}

    def ev(x: np.ndarray) -> float:
        if len(trace) >= max_evals:
            raise _BudgetExhausted
        v = float(objective(x))
        trace.append(v)
        if not np.isfinite(v):
            raise NonFiniteObjectiveError(x, best["x"], best["f"], trace)
        if v < best["f"]:
            best["f"] = v
            best["x"] = x.copy()
        return v

    status = "max_evals"
    try:
        status = _cobyla_loop(ev, x0, n, rho_begin, rho_end)
    except _BudgetExhausted:
        status = "max_evals"

    return CobylaResult(
        x_best=best["x"],
        f_best=float(best["f"]),
        trace=trace,
        n_evals=len(trace),
        status=status,
        message=f"terminated by {status} after {len(trace)} evaluations",
    )


def _cobyla_loop(ev, x0, n, rho_begin, rho_end) -> str:
    # simplex storage: pole is the best vertex; sim rows hold the offsets
    # of the other n vertices from the pole; simi is the inverse of sim.
    pole = x0.copy()
    fpole = ev(pole)
    sim = rho_begin * np.eye(n)
    fsim = np.empty(n)
    for i in range(n):
        fsim[i] = ev(pole + sim[i])
    simi = np.linalg.inv(sim)

    rho = delta = rho_begin

    def updatepole():
        nonlocal pole, fpole, sim, fsim, simi
        j = int(np.argmin(fsim))
        if fsim[j] < fpole:
            pole = pole + sim[j]
            fpole, fsim[j] = fsim[j], fpole
            dropped = sim[j].copy()
            sim -= dropped
            sim[j] = -dropped
            simi = np.linalg.inv(sim)

    def replace(j, d, fnew):
        nonlocal sim, fsim, simi
        sim[j] = d
        fsim[j] = fnew
        simi = np.linalg.inv(sim)

    while True:
        updatepole()
        vert_dist = np.linalg.norm(sim, axis=1)
        # distance from vertex j to its opposite face is 1/|simi column j|
        face_dist = 1.0 / np.maximum(np.linalg.norm(simi, axis=0), 1e-300)
        adequate_geo = bool(
            np.all(vert_dist <= _BETA * rho) and np.all(face_dist >= _ALPHA * rho)
        )

        g = simi @ (fsim - fpole)
        gnorm = float(np.linalg.norm(g))

        # trust-region step: steepest descent on the linear model
        if gnorm > 0 and np.isfinite(gnorm):
            d = -(delta / gnorm) * g
        else:
            d = np.zeros(n)
        dnorm = min(delta, float(np.linalg.norm(d)))

        shortd = dnorm <= 0.1 * rho
        prered = float(-d @ g)
        trfail = not (prered > 1e-6 * rho)
        ratio = -1.0
        jdrop = None

        if shortd or trfail:
            delta *= 0.1
            if delta <= _GAMMA3 * rho:
                delta = rho
        else:
            fnew = ev(pole + d)
            actred = fpole - fnew
            ratio = actred / prered
            if ratio <= _ETA1:
                delta = _GAMMA1 * dnorm
            elif ratio <= _ETA2:
                delta = max(_GAMMA1 * delta, dnorm)
            else:
                delta = max(_GAMMA1 * delta, _GAMMA2 * dnorm)
            if delta <= _GAMMA3 * rho:
                delta = rho

            improved = actred > 0
            dist_ref = (
                np.linalg.norm(sim - d, axis=1) if improved else vert_dist
            )
            weight = np.maximum(1.0, (dist_ref / max(0.1 * delta, rho)) ** 2)
            score = weight * np.abs(simi.T @ d)
            if improved:
                jdrop = int(np.argmax(score)) if score.max() > 0 else int(np.argmax(dist_ref))
            else:
                jdrop = int(np.argmax(score)) if score.max() > 1.0 else None
            if jdrop is not None:
                replace(jdrop, d, fnew)
                updatepole()

        bad_step = shortd or trfail or ratio <= 0.0 or jdrop is None
        if bad_step and not adequate_geo:
            # geometry repair: move the worst-placed vertex to a point
            # half a radius from the pole, orthogonal to its face
            vert_dist = np.linalg.norm(sim, axis=1)
            far = vert_dist > _BETA * rho
            if far.any():
                jgeo = int(np.argmax(vert_dist))
            else:
                face_dist = 1.0 / np.maximum(np.linalg.norm(simi, axis=0), 1e-300)
                jgeo = int(np.argmin(face_dist))
            v = simi[:, jgeo]
            vn = float(np.linalg.norm(v))
            if vn > 0:
                dgeo = (0.5 * rho / vn) * v
            else:
                dgeo = np.zeros(n)
                dgeo[jgeo % n] = 0.5 * rho
            if float(dgeo @ g) > 0:
                dgeo = -dgeo
            fnew = ev(pole + dgeo)
            replace(jgeo, dgeo, fnew)
        elif bad_step and adequate_geo and max(delta, dnorm) <= rho:
            if rho <= rho_end:
                return "rho_end"
            delta = max(0.5 * rho, _reduced_rho(rho, rho_end))
            rho = _reduced_rho(rho, rho_end)


@dataclass
class AdamState:
    """First/second moment accumulators for one parameter tensor."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros_like(cls, params: np.ndarray) -> "AdamState":
        return cls(m=np.zeros_like(params, dtype=float),
                   v=np.zeros_like(params, dtype=float))


def adam_step(params, grads, state: AdamState,
              config: OptimizerConfig | None = None):
    """One bias-corrected Adam update; returns ``(new_params, new_state)``."""
    config = config or OptimizerConfig(kind="Adam")
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise OptimizerError("params, grads, and moment state shapes must match")
    b1, b2 = config.adam_beta1, config.adam_beta2
    t = state.t + 1
    m = b1 * state.m + (1.0 - b1) * grads
    v = b2 * state.v + (1.0 - b2) * grads ** 2
    m_hat = m / (1.0 - b1 ** t)
    v_hat = v / (1.0 - b2 ** t)
    update = config.adam_step_size * m_hat / (np.sqrt(v_hat) + config.adam_epsilon)
    return params - update, AdamState(m=m, v=v, t=t)
