"""Convergence and fit diagnostics: split R-hat, ESS, MCSE, predictive checks.

Plain (non rank-normalized) split diagnostics: each chain is halved, the
between/within variance ratio gives R-hat, and ESS comes from the
initial-positive-sequence sum of multi-chain autocorrelations.  Results can
therefore differ slightly from rank-normalizing toolchains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .errors import DegenerateChains

RHAT_GATE = 1.01
ESS_GATE = 400.0
ESS_RATIO_GATE = 1e-4

# ESS above the raw draw count signals antithetic chains; cap the estimate.
ESS_CAP_FACTOR = 1.5


def _split(chains: np.ndarray) -> np.ndarray:
    """Halve each chain: (m, n) -> (2m, n//2)."""
    chains = np.asarray(chains, dtype=float)
    if chains.ndim != 2 or chains.shape[0] < 2 or chains.shape[1] < 4:
        raise ValueError("need >= 2 chains with >= 4 draws each")
    half = chains.shape[1] // 2
    return np.concatenate([chains[:, :half], chains[:, half:2 * half]], axis=0)


def split_rhat(chains) -> float:
    """Split-chain potential scale reduction factor."""
    halves = _split(chains)
    m, n = halves.shape
    if np.ptp(halves) == 0.0:
        raise DegenerateChains("all draws identical; R-hat undefined")
    chain_means = halves.mean(axis=1)
    w = halves.var(axis=1, ddof=1).mean()
    b = n * chain_means.var(ddof=1)
    if w == 0.0:
        raise DegenerateChains("zero within-chain variance; R-hat undefined")
    var_hat = (n - 1) / n * w + b / n
    return float(np.sqrt(var_hat / w))


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Sample autocovariance of one chain at all lags (biased, 1/n)."""
    n = len(x)
    centered = x - x.mean()
    acov = np.correlate(centered, centered, mode="full")[n - 1:]
    return acov / n


def ess(chains) -> float:
    """Multi-chain effective sample size (initial positive sequence)."""
    halves = _split(chains)
    m, n = halves.shape
    if np.ptp(halves) == 0.0:
        raise DegenerateChains("all draws identical; ESS undefined")

    chain_means = halves.mean(axis=1)
    w = halves.var(axis=1, ddof=1).mean()
    if w == 0.0:
        raise DegenerateChains("zero within-chain variance; ESS undefined")
    var_hat = (n - 1) / n * w + chain_means.var(ddof=1)

    acov = np.mean([_autocovariance(halves[i]) for i in range(m)], axis=0)
    rho = 1.0 - (w - acov) / var_hat  # rho[0] is ~1 by construction

    # Sum consecutive-lag pairs while they stay positive (Geyer).
    tau = 0.0
    t = 1
    while t + 1 < n:
        pair = rho[t] + rho[t + 1]
        if pair <= 0.0:
            break
        tau += pair
        t += 2
    total = m * n
    estimate = total / (1.0 + 2.0 * tau)
    return float(min(estimate, ESS_CAP_FACTOR * total))


def mcse(chains) -> float:
    """Monte Carlo standard error of the posterior mean: sd / sqrt(ESS)."""
    flat = np.asarray(chains, dtype=float).reshape(-1)
    return float(flat.std(ddof=1) / np.sqrt(ess(chains)))


@dataclass
class ParameterDiagnostics:
    name: str
    mean: float
    sd: float
    mcse: float | None
    ess: float | None
    ess_ratio: float | None
    rhat: float | None
    passed: bool


@dataclass
class DiagnosticsReport:
    parameters: list[ParameterDiagnostics]
    misfits: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.parameters)

    def rows(self) -> list[dict]:
        return [
            {
                "parameter": p.name,
                "mean": p.mean,
                "mcse": p.mcse,
                "sd": p.sd,
                "ess": p.ess,
                "rhat": p.rhat,
                "ess_ratio": p.ess_ratio,
                "pass": p.passed,
            }
            for p in self.parameters
        ]


def _gate(rhat, ess_value, ess_ratio) -> bool:
    if rhat is None or ess_value is None:
        return True  # fixed parameters carry no sampling error
    if not (rhat < RHAT_GATE and ess_value > ESS_GATE):
        return False
    if ess_ratio is not None and not (ess_ratio > ESS_RATIO_GATE):
        return False
    return True


def report(model) -> DiagnosticsReport:
    """Build the per-parameter convergence report for a posterior model.

    Uses the stored summaries verbatim; models without draws (summary-only
    bundles) are reported exactly as shipped.
    """
    n_total = None
    chains = model.meta.get("chains")
    draws = model.meta.get("draws_per_chain")
    if chains and draws:
        n_total = chains * draws

    params = []
    for name, s in model.summaries.items():
        ess_value = s.get("ess")
        rhat = s.get("rhat")
        ratio = (ess_value / n_total) if (ess_value and n_total) else None
        params.append(
            ParameterDiagnostics(
                name=name,
                mean=s["mean"],
                sd=s["sd"],
                mcse=s.get("mcse"),
                ess=ess_value,
                ess_ratio=ratio,
                rhat=rhat,
                passed=_gate(rhat, ess_value, ratio),
            )
        )
    return DiagnosticsReport(parameters=params)


def posterior_predictive_check(model, data: dict, level: float = 0.99) -> list:
    """Flag keys whose observed mean energy leaves the predictive interval.

    For each key the reference distribution is the sampling distribution of
    the per-key mean under the fitted model: Normal(mu_k, sqrt(var(mu_k) +
    sigma^2 / n_k)).  With stored draws, mu_k's posterior mean and variance
    are empirical; otherwise the summary sds are combined assuming
    independence.
    """
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level}")
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    sigma = model.sigma_mean()

    misfits = []
    for key, values in data.items():
        values = np.asarray(values, dtype=float)
        n = len(values)
        if n == 0:
            continue
        mu_draws = model.mu_draws(key)
        if mu_draws is not None:
            mu = float(mu_draws.mean())
            mu_var = float(mu_draws.var(ddof=1))
        else:
            names = model._effect_names(key)
            mu = model.mean_mu(key)
            mu_var = sum(model.summaries[nm]["sd"] ** 2 for nm in names)
        spread = np.sqrt(mu_var + sigma * sigma / n)
        if abs(values.mean() - mu) > z * spread:
            misfits.append(key)
    return misfits
