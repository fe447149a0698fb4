"""Exact simulation of the price/trend process and of threshold selling rules.

Between trend switches the price moves deterministically,
``Y_{t+h} = Y_t exp((mu + s sigma) h)``, and the holding times are
exponential with rate ``lam``. Everything below is closed form: holding
times, growth factors and boundary hit times. No time stepping.

Random streams
--------------
Paths are grouped in blocks of ``BLOCK_SIZE``. Block ``k`` owns the
generator ``Philox`` seeded from ``SeedSequence(seed, spawn_key=(k,))``.
Jump index ``j`` of every path in the block uses the ``j``-th batch of
``BLOCK_SIZE`` standard exponentials drawn from that generator, whether
or not the path is still running. Consequently

* the result is a deterministic function of ``(seed, n)`` regardless of
  how blocks are distributed over workers, and
* runs that differ only in ``y0`` or in the selling rule see the same
  holding times path by path (common random numbers).

Truncation
----------
A path that has not stopped is censored and contributes 0 (the reward of
never selling). Its omitted future reward is bounded in absolute value
by ``max(a exp(-rho t), K_s exp(-rho t) Y_t)`` where ``K_s`` bounds
``E[sup_{u >= t} M_u] / M_t`` for the discounted price ``M``: ``K_s = 1``
when ``rho >= mu + sigma`` (``M`` is nonincreasing) and otherwise follows
from Doob's inequality applied to the positive martingale
``v(xi) M^Omega_tilde``. With ``horizon=None`` each path is censored as
soon as this bound drops below ``tail_tol``; with a numeric horizon all
paths are censored at that time. The average bound over paths is
reported as ``bias_bound``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import sup_exponent
from .dynamics import checked_sup_exponent, sup_weights
from .model import ModelParams, check_state

BLOCK_SIZE = 1 << 15
MAX_JUMPS = 200_000


@dataclass(frozen=True)
class StoppingRule:
    """Sell at the first time ``Y_t >= u_minus`` (trend down) or ``Y_t >= u_plus`` (trend up)."""

    u_minus: float
    u_plus: float

    def __post_init__(self):
        if not (self.u_minus > 0 and self.u_plus > 0):
            raise ValueError(f"thresholds must be > 0, got {self.u_minus!r}, {self.u_plus!r}")

    @classmethod
    def from_solution(cls, sol) -> StoppingRule:
        return cls(sol.u_minus, sol.u_plus)

    @classmethod
    def never(cls) -> StoppingRule:
        return cls(math.inf, math.inf)

    @classmethod
    def immediate(cls, y0: float) -> StoppingRule:
        return cls(y0, y0)

    def scaled(self, factor: float) -> StoppingRule:
        return StoppingRule(self.u_minus * factor, self.u_plus * factor)

    def threshold(self, s: int) -> float:
        return self.u_minus if s < 0 else self.u_plus


@dataclass(frozen=True)
class PathOutcome:
    """One simulated path.

    ``tau`` is ``math.inf`` for a censored path; ``y_tau`` is then the
    price at censoring and ``reward`` is 0.
    """

    tau: float
    y_tau: float
    reward: float
    n_jumps: int
    censored: bool
    t_end: float
    xi_integral: float
    jump_times: tuple[float, ...] = field(default=(), repr=False)
    bias_bound: float = 0.0


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_err: float
    n: int
    seed: int
    bias_bound: float
    n_censored: int

    def within(self, target: float, k: float = 3.0) -> bool:
        """``|mean - target| <= k * std_err + bias_bound``."""
        return abs(self.mean - target) <= k * self.std_err + self.bias_bound


@dataclass
class PathBatch:
    """Per-path arrays of a block or of a whole run."""

    tau: np.ndarray
    y_tau: np.ndarray
    reward: np.ndarray
    n_jumps: np.ndarray
    censored: np.ndarray
    t_end: np.ndarray
    xi_integral: np.ndarray
    bound: np.ndarray

    @classmethod
    def concat(cls, parts) -> PathBatch:
        return cls(*(np.concatenate([getattr(p, name) for p in parts]) for name in cls.__dataclass_fields__))

    def estimate(self, seed: int) -> McEstimate:
        n = self.reward.size
        # centring on the first sample keeps constant samples exact (zero spread)
        shifted = self.reward - self.reward[0]
        mean = float(self.reward[0] + np.mean(shifted))
        std_err = float(np.std(shifted, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return McEstimate(mean, std_err, n, seed, float(np.mean(self.bound)), int(np.count_nonzero(self.censored)))


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def tail_factors(params: ModelParams) -> tuple[float, float]:
    """``(K_down, K_up)`` with ``E[sup_{u>=t} M_u | M_t = m, xi_t = s] <= K_s m``."""
    om = sup_exponent(params)
    if om is None:
        return 1.0, 1.0
    v_down, v_up = sup_weights(params)
    scale = om / (om - 1.0)
    return scale, (v_up / v_down) ** (1.0 / om) * scale


def default_tail_tol(params: ModelParams, y0: float, n: int) -> float:
    return 1e-3 * max(y0, params.a) / math.sqrt(n)


def _simulate_block(params: ModelParams, y0: float, s0: int, rule: StoppingRule, seed: int, block: int,
                    size: int, horizon: Optional[float], tail_tol: float) -> PathBatch:
    rho, mu, sigma, lam, a = params.rho, params.mu, params.sigma, params.lam, params.a
    k_down, k_up = tail_factors(params)
    gen = block_generator(seed, block)

    t = np.zeros(size)
    y = np.full(size, float(y0))
    s = np.full(size, s0, dtype=np.int8)
    n_jumps = np.zeros(size, dtype=np.int64)
    xi_int = np.zeros(size)
    tau = np.full(size, math.inf)
    y_tau = np.full(size, math.nan)
    censored = np.zeros(size, dtype=bool)
    bound = np.zeros(size)
    active = np.ones(size, dtype=bool)

    if y0 >= rule.threshold(s0):
        tau[:] = 0.0
        y_tau[:] = y0
        active[:] = False

    def censor(idx):
        disc = np.exp(-rho * t[idx])
        k = np.where(s[idx] > 0, k_up, k_down)
        bound[idx] = np.maximum(a * disc, k * disc * y[idx])
        censored[idx] = True
        active[idx] = False

    if horizon is not None and horizon <= 0.0:
        censor(np.flatnonzero(active))

    for _ in range(MAX_JUMPS):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        hold = gen.standard_exponential(size)[idx] / lam
        si = s[idx]
        yi = y[idx]
        rate = np.where(si > 0, mu + sigma, mu - sigma)
        u = np.where(si > 0, rule.u_plus, rule.u_minus)
        can_hit = (rate > 0.0) & np.isfinite(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_hit = np.where(can_hit, np.log(u / yi) / rate, math.inf)
        remaining = (horizon - t[idx]) if horizon is not None else np.full(idx.size, math.inf)

        hit = (t_hit <= hold) & (t_hit <= remaining)
        cut = ~hit & (remaining < hold)
        jump = ~hit & ~cut

        h = idx[hit]
        dt = t_hit[hit]
        t[h] += dt
        xi_int[h] += si[hit] * dt
        y[h] = u[hit]
        tau[h] = t[h]
        y_tau[h] = u[hit]
        active[h] = False

        c = idx[cut]
        dt = remaining[cut]
        t[c] += dt
        xi_int[c] += si[cut] * dt
        y[c] = yi[cut] * np.exp(rate[cut] * dt)
        if c.size:
            censor(c)

        j = idx[jump]
        dt = hold[jump]
        t[j] += dt
        xi_int[j] += si[jump] * dt
        y[j] = yi[jump] * np.exp(rate[jump] * dt)
        s[j] = -si[jump]
        n_jumps[j] += 1
        u_new = np.where(s[j] > 0, rule.u_plus, rule.u_minus)
        entered = y[j] >= u_new
        e = j[entered]
        tau[e] = t[e]
        y_tau[e] = y[e]
        active[e] = False
        if horizon is None:
            rest = j[~entered]
            disc = np.exp(-rho * t[rest])
            k = np.where(s[rest] > 0, k_up, k_down)
            small = np.maximum(a * disc, k * disc * y[rest]) < tail_tol
            if np.any(small):
                censor(rest[small])
    else:
        censor(np.flatnonzero(active))

    reward = np.zeros(size)
    stopped = ~censored
    reward[stopped] = np.exp(-rho * tau[stopped]) * (y_tau[stopped] - a)
    y_tau[censored] = y[censored]
    return PathBatch(tau, y_tau, reward, n_jumps, censored, t, xi_int, bound)


def _block_sizes(n: int):
    full, rest = divmod(n, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _run_block(args):
    params, y0, s0, rule, seed, block, horizon, tail_tol = args
    return _simulate_block(params, y0, s0, rule, seed, block, BLOCK_SIZE, horizon, tail_tol)


def simulate_paths(params: ModelParams, y0: float, s0: int, rule: StoppingRule, n: int, seed: int,
                   horizon: Optional[float] = None, tail_tol: Optional[float] = None,
                   workers: int = 1) -> PathBatch:
    """Simulate ``n`` independent paths under ``rule``; see the module docstring for streams and truncation."""
    s0 = check_state(s0)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not y0 > 0:
        raise ValueError("y0 must be > 0")
    if tail_tol is None:
        tail_tol = default_tail_tol(params, y0, n)
    sizes = _block_sizes(n)
    # every block is simulated at full width so path k of block b is the same
    # regardless of n; the last block is then trimmed
    jobs = [(params, y0, s0, rule, seed, b, horizon, tail_tol) for b in range(len(sizes))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, jobs))
    else:
        parts = [_run_block(job) for job in jobs]
    trimmed = []
    for part, size in zip(parts, sizes):
        trimmed.append(PathBatch(*(getattr(part, name)[:size] for name in PathBatch.__dataclass_fields__)))
    return PathBatch.concat(trimmed)


def mc_reward(params: ModelParams, y0: float, s0: int, rule: StoppingRule, n: int, seed: int,
              horizon: Optional[float] = None, tail_tol: Optional[float] = None,
              workers: int = 1) -> McEstimate:
    """Monte Carlo estimate of ``E[exp(-rho tau) (Y_tau - a)]`` for the threshold rule."""
    return simulate_paths(params, y0, s0, rule, n, seed, horizon, tail_tol, workers).estimate(seed)


def simulate_path(params: ModelParams, y0: float, s0: int, rule: StoppingRule, seed: int,
                  path_index: int = 0, horizon: Optional[float] = None,
                  tail_tol: Optional[float] = None) -> PathOutcome:
    """Scalar simulation of path ``path_index`` of the stream used by :func:`mc_reward`.

    Uses numpy's ``exp``/``log`` (not :mod:`math`) so that it rounds like the
    vectorized loop. Reproduces the corresponding entry of :func:`simulate_paths` exactly
    (given the same ``tail_tol``; the default here is the single-path one)
    and additionally records the switching times.
    """
    s = check_state(s0)
    rho, mu, sigma, lam, a = params.rho, params.mu, params.sigma, params.lam, params.a
    if tail_tol is None:
        tail_tol = default_tail_tol(params, y0, 1)
    k_down, k_up = tail_factors(params)
    block, col = divmod(path_index, BLOCK_SIZE)
    gen = block_generator(seed, block)

    t, y, xi_int = 0.0, float(y0), 0.0
    jumps: list[float] = []

    def tail_bound():
        disc = float(np.exp(-rho * t))
        return max(a * disc, (k_up if s > 0 else k_down) * disc * y)

    def done(tau, y_tau, cens=False, bnd=0.0):
        reward = 0.0 if cens else float(np.exp(-rho * tau)) * (y_tau - a)
        return PathOutcome(math.inf if cens else tau, y_tau, reward, len(jumps), cens, t, xi_int,
                           tuple(jumps), bnd)

    if y >= rule.threshold(s):
        return done(0.0, y)
    if horizon is not None and horizon <= 0.0:
        return done(0.0, y, True, tail_bound())
    for _ in range(MAX_JUMPS):
        hold = float(gen.standard_exponential(BLOCK_SIZE)[col]) / lam
        rate = mu + s * sigma
        u = rule.threshold(s)
        t_hit = float(np.log(u / y)) / rate if (rate > 0.0 and math.isfinite(u)) else math.inf
        remaining = horizon - t if horizon is not None else math.inf
        if t_hit <= hold and t_hit <= remaining:
            t += t_hit
            xi_int += s * t_hit
            return done(t, u)
        if remaining < hold:
            t += remaining
            xi_int += s * remaining
            y = y * float(np.exp(rate * remaining))
            return done(t, y, True, tail_bound())
        t += hold
        xi_int += s * hold
        y = y * float(np.exp(rate * hold))
        s = -s
        jumps.append(t)
        if y >= rule.threshold(s):
            return done(t, y)
        if horizon is None and tail_bound() < tail_tol:
            return done(t, y, True, tail_bound())
    return done(t, y, True, tail_bound())


def simulate_terminal(params: ModelParams, y0: float, s0: int, t_end: float, n: int, seed: int):
    """Sample ``(Y_t, xi(t), n_jumps)`` at the fixed time ``t_end`` for ``n`` paths."""
    s0 = check_state(s0)
    mu, sigma, lam = params.mu, params.sigma, params.lam
    ys, ss, js = [], [], []
    for block, size in enumerate(_block_sizes(n)):
        gen = block_generator(seed, block)
        t = np.zeros(BLOCK_SIZE)
        log_y = np.full(BLOCK_SIZE, math.log(y0))
        s = np.full(BLOCK_SIZE, s0, dtype=np.int8)
        nj = np.zeros(BLOCK_SIZE, dtype=np.int64)
        active = np.ones(BLOCK_SIZE, dtype=bool)
        while active.any():
            hold = gen.standard_exponential(BLOCK_SIZE) / lam
            idx = np.flatnonzero(active)
            remaining = t_end - t[idx]
            switched = hold[idx] < remaining
            dt = np.where(switched, hold[idx], remaining)
            log_y[idx] += (mu + s[idx] * sigma) * dt
            t[idx] += dt
            sw = idx[switched]
            s[sw] = -s[sw]
            nj[sw] += 1
            active[idx[~switched]] = False
        ys.append(np.exp(log_y[:size]))
        ss.append(s[:size].copy())
        js.append(nj[:size])
    return np.concatenate(ys), np.concatenate(ss), np.concatenate(js)


@dataclass(frozen=True)
class ExceedanceEstimate:
    frequency: float
    std_err: float
    n: int
    bias_bound: float


def sup_exceedance(params: ModelParams, y0: float, s0: int, level: float, n: int, seed: int,
                   tail_tol: Optional[float] = None) -> ExceedanceEstimate:
    """Frequency of ``sup_t exp(-rho t) Y_t >= level`` by exact simulation.

    The discounted price ``M`` peaks only at the end of an up segment, so
    each up segment is checked for a closed-form crossing. Paths still below
    the level are censored once the remaining crossing probability
    ``v(s) / v(+1) * (M / level)^Omega_tilde`` (optional stopping of the
    martingale ``v(xi) M^Omega_tilde``, crossings happen in the up state)
    drops below ``tail_tol``; the mean of these probabilities is
    ``bias_bound``. Requires ``rho < mu + sigma``.
    """
    s0 = check_state(s0)
    om = checked_sup_exponent(params)
    if tail_tol is None:
        tail_tol = 1e-3 / math.sqrt(n)
    rho, mu, sigma, lam = params.rho, params.mu, params.sigma, params.lam
    v_down, v_up = sup_weights(params)
    log_level = math.log(level)
    hits, bounds = [], []
    for block, size in enumerate(_block_sizes(n)):
        gen = block_generator(seed, block)
        log_m = np.full(BLOCK_SIZE, math.log(y0))
        s = np.full(BLOCK_SIZE, s0, dtype=np.int8)
        hit = np.full(BLOCK_SIZE, log_m[0] >= log_level)
        bound = np.zeros(BLOCK_SIZE)
        active = ~hit
        for _ in range(MAX_JUMPS):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            hold = gen.standard_exponential(BLOCK_SIZE)[idx] / lam
            rate = np.where(s[idx] > 0, mu + sigma - rho, mu - sigma - rho)
            log_m[idx] += rate * hold
            crossed = log_m[idx] >= log_level
            hit[idx[crossed]] = True
            active[idx[crossed]] = False
            rest = idx[~crossed]
            s[rest] = -s[rest]
            weight = np.where(s[rest] > 0, v_up, v_down) / v_up
            tail = np.minimum(1.0, weight * np.exp(om * (log_m[rest] - log_level)))
            small = tail < tail_tol
            bound[rest[small]] = tail[small]
            active[rest[small]] = False
        else:
            idx = np.flatnonzero(active)
            bound[idx] = 1.0
        hits.append(hit[:size])
        bounds.append(bound[:size])
    hit = np.concatenate(hits).astype(float)
    freq = float(hit.mean())
    se = float(hit.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return ExceedanceEstimate(freq, se, n, float(np.concatenate(bounds).mean()))
