"""Hierarchical four-factor Gaussian model and its MCMC sampler.

The model: each observed energy J is Normal(mu, sigma) with
mu = alpha[size] + beta[operation] + gamma[type] + delta[device].
Level effects get Normal(hyper_mean, category_sd) priors, hyper-means get
Normal(0.006 J, 0.001 J) priors, and all scales get Exponential(1e3) priors.
Sampling works on the non-centered parameterization (effect =
hyper_mean + category_sd * z, z standard normal) with positive scales on
the log axis.

The kernel is a collapsed Metropolis-within-Gibbs sweep.  Conditional on
the scale parameters the model is linear-Gaussian, so the location block
(every z vector plus all hyper-means, jointly) has a multivariate-normal
full conditional and a closed-form marginal likelihood.  Each iteration
first updates every log scale by adaptive scalar random-walk Metropolis
against the collapsed target p(scales | data) -- locations integrated
out -- and then redraws the whole location block exactly from its
Gaussian full conditional.  Collapsing is what makes the sampler robust:
the additive structure creates near-flat ridges (a constant can move
between categories, or between a hyper-mean and its z vector) and a
multimodal funnel in (category sd, z) space, and both disappear once the
locations are marginalized.  Step sizes adapt toward a 20-40% acceptance
rate during warmup and are frozen afterwards.  Chains are independent and
each owns a private RNG seeded from seed + chain index.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import catalog as _catalog
from . import diagnostics
from .catalog import PatternKey
from .errors import DataError, UnknownLevel

LOG_2PI = math.log(2.0 * math.pi)

CATEGORY_NAMES = ("alpha", "beta", "gamma", "delta")

# Convergence gates applied to every sampled parameter.
RHAT_GATE = 1.01
ESS_GATE = 400.0
ESS_RATIO_GATE = 1e-4


class NonConvergenceWarning(UserWarning):
    """Fit finished but at least one parameter failed a convergence gate."""


@dataclass(frozen=True)
class ModelSpec:
    """Level sets of the four categories plus prior hyperparameters."""

    sizes: tuple[str, ...]
    operations: tuple[str, ...]
    dtypes: tuple[str, ...]
    devices: tuple[str, ...]
    hyper_mean_loc: float = 0.006
    hyper_mean_scale: float = 0.001
    rate_sigma: float = 1e3
    rate_category_sd: float = 1e3

    def __post_init__(self):
        if not (self.rate_sigma > 0 and self.rate_category_sd > 0):
            raise DataError("prior rates must be positive")
        for levels in (self.sizes, self.operations, self.dtypes, self.devices):
            if not levels:
                raise DataError("every category needs at least one level")

    @property
    def level_sets(self) -> dict[str, tuple[str, ...]]:
        return {
            "alpha": self.sizes,
            "beta": self.operations,
            "gamma": self.dtypes,
            "delta": self.devices,
        }

    @property
    def device_effect_sampled(self) -> bool:
        # A single-device study carries no between-device information;
        # delta is then fixed at zero and excluded from sampling.
        return len(self.devices) > 1

    @classmethod
    def from_keys(cls, keys, **prior_kwargs) -> "ModelSpec":
        keys = [_as_levels(k) for k in keys]
        return cls(
            sizes=tuple(sorted({k[0] for k in keys})),
            operations=tuple(sorted({k[1] for k in keys})),
            dtypes=tuple(sorted({k[2] for k in keys})),
            devices=tuple(sorted({k[3] for k in keys})),
            **prior_kwargs,
        )

    @classmethod
    def from_catalog(cls, devices, **prior_kwargs) -> "ModelSpec":
        triples = _catalog.list_catalog()
        return cls(
            sizes=tuple(sorted({t.dsize for t in triples})),
            operations=tuple(sorted({t.operation for t in triples})),
            dtypes=tuple(sorted({t.dtype for t in triples})),
            devices=tuple(sorted(devices)),
            **prior_kwargs,
        )


def _as_levels(key) -> tuple[str, str, str, str]:
    """Accept a PatternKey or a raw (size, operation, dtype, device) tuple."""
    if isinstance(key, PatternKey):
        return key.levels()
    if len(key) != 4:
        raise DataError(f"key {key!r} is not a 4-level pattern key")
    return tuple(key)


class _SuffStats:
    """Per-key sufficient statistics for the Gaussian likelihood."""

    def __init__(self, data: dict, spec: ModelSpec):
        items = sorted((_as_levels(k), np.asarray(v, dtype=float))
                       for k, v in data.items())
        index = {name: {lv: i for i, lv in enumerate(levels)}
                 for name, levels in spec.level_sets.items()}
        ia, ib, ic, idx_d, n, s1, s2 = [], [], [], [], [], [], []
        for (size, op, dtype, device), values in items:
            try:
                ia.append(index["alpha"][size])
                ib.append(index["beta"][op])
                ic.append(index["gamma"][dtype])
                idx_d.append(index["delta"][device])
            except KeyError as exc:
                raise DataError(
                    f"level {exc.args[0]!r} of key {(size, op, dtype, device)} "
                    "is not in the model spec"
                ) from None
            n.append(len(values))
            s1.append(values.sum())
            s2.append(np.square(values).sum())
        self.ia = np.array(ia, dtype=int)
        self.ib = np.array(ib, dtype=int)
        self.ic = np.array(ic, dtype=int)
        self.id = np.array(idx_d, dtype=int)
        self.n = np.array(n, dtype=float)
        self.s1 = np.array(s1, dtype=float)
        self.s2 = np.array(s2, dtype=float)
        self.n_obs = float(self.n.sum())
        self.digest = _digest(items)


def _digest(items) -> str:
    h = hashlib.sha256()
    for levels, values in items:
        h.update(repr(levels).encode())
        h.update(np.ascontiguousarray(values).tobytes())
    return h.hexdigest()


@dataclass
class _State:
    """Non-centered sampler state for one chain."""

    z: list[np.ndarray]        # one z-vector per sampled category
    mu: np.ndarray             # hyper-means of sampled categories
    log_sd: np.ndarray         # log category sds of sampled categories
    log_sigma: float

    def copy(self) -> "_State":
        return _State([z.copy() for z in self.z], self.mu.copy(),
                      self.log_sd.copy(), self.log_sigma)


class _Model:
    """Bound model: spec + data, evaluating the joint log density."""

    def __init__(self, spec: ModelSpec, stats: _SuffStats):
        self.spec = spec
        self.stats = stats
        self.cats = list(CATEGORY_NAMES) if spec.device_effect_sampled else [
            "alpha", "beta", "gamma"]
        self.sizes = [len(spec.level_sets[c]) for c in self.cats]
        self.n_devices = len(spec.devices)

        # Indicator design for the joint Gaussian conditional of the
        # location block (all z coordinates, then all hyper-means).  The
        # key mean is mu_key = A @ (sd_c * z || mu), so the Gram matrix
        # A' diag(n) A and moment vector A' s1 are fixed by the data.
        self.nz = sum(self.sizes)
        ncat = len(self.cats)
        dim = self.nz + ncat
        level_idx = [stats.ia, stats.ib, stats.ic, stats.id][:ncat]
        a = np.zeros((len(stats.n), dim))
        offset = 0
        rows = np.arange(len(stats.n))
        for ci in range(ncat):
            a[rows, offset + level_idx[ci]] = 1.0
            a[rows, self.nz + ci] = 1.0
            offset += self.sizes[ci]
        self._gram = a.T @ (stats.n[:, None] * a)
        self._moment = a.T @ stats.s1
        # Extended-precision copies: the location system mixes likelihood
        # terms (huge precision) with prior terms (tiny), so the collapsed
        # marginal needs iterative refinement in longdouble to stay exact.
        self._gram_ld = self._gram.astype(np.longdouble)
        self._moment_ld = self._moment.astype(np.longdouble)

    def effects(self, state: _State) -> list[np.ndarray]:
        effs = [state.mu[i] + math.exp(state.log_sd[i]) * state.z[i]
                for i in range(len(self.cats))]
        if not self.spec.device_effect_sampled:
            effs.append(np.zeros(self.n_devices))
        return effs

    def key_means(self, state: _State) -> np.ndarray:
        a, b, c, d = self.effects(state)
        st = self.stats
        return a[st.ia] + b[st.ib] + c[st.ic] + d[st.id]

    def log_posterior(self, state: _State) -> float:
        spec, st = self.spec, self.stats

        sigma = math.exp(state.log_sigma)
        mu_keys = self.key_means(state)
        quad = float(np.sum(st.s2 - 2.0 * mu_keys * st.s1
                            + st.n * mu_keys * mu_keys))
        loglik = (-0.5 * st.n_obs * LOG_2PI - st.n_obs * state.log_sigma
                  - 0.5 * quad / (sigma * sigma))

        lp = loglik
        # z ~ Normal(0, 1)
        for z in state.z:
            lp += -0.5 * len(z) * LOG_2PI - 0.5 * float(z @ z)
        # hyper-means ~ Normal(loc, scale)
        resid = (state.mu - spec.hyper_mean_loc) / spec.hyper_mean_scale
        lp += (-0.5 * len(state.mu) * LOG_2PI
               - len(state.mu) * math.log(spec.hyper_mean_scale)
               - 0.5 * float(resid @ resid))
        # category sds ~ Exponential(rate), sampled as log sd (Jacobian +u)
        rate = spec.rate_category_sd
        for u in state.log_sd:
            lp += math.log(rate) - rate * math.exp(u) + u
        # likelihood sd ~ Exponential(rate), log scale
        lp += (math.log(spec.rate_sigma)
               - spec.rate_sigma * sigma + state.log_sigma)
        return lp

    def location_system(self, log_sd: np.ndarray, log_sigma: float):
        """Gaussian full conditional of (z, hyper-means) given the scales.

        Conditional on the scales the posterior over the location block is
        Gaussian with precision P = D G D / sigma^2 + P0 (G the weighted
        Gram matrix, D the per-column scale map z -> sd*z, P0 the prior
        precision).  Returns a _LocationSystem carrying the preconditioned
        Cholesky factor, the conditional mean, and the collapsed log
        density log p(data | scales) + log p(scales): the location block
        integrates out in closed form, which is what the scale updates
        sample against.  Raises DataError when the (preconditioned)
        precision cannot be factorized.
        """
        spec = self.spec
        st = self.stats
        ncat = len(self.cats)
        sigma = math.exp(log_sigma)
        sigma2 = np.longdouble(sigma) * np.longdouble(sigma)
        d = np.concatenate(
            [np.full(self.sizes[ci], math.exp(log_sd[ci]))
             for ci in range(ncat)] + [np.ones(ncat)]).astype(np.longdouble)
        prec_ld = self._gram_ld * np.outer(d, d) / sigma2
        b_ld = d * self._moment_ld / sigma2
        diag = np.arange(len(d))
        prec_ld[diag[:self.nz], diag[:self.nz]] += 1.0
        prec_ld[diag[self.nz:], diag[self.nz:]] += (
            np.longdouble(1.0) / np.longdouble(spec.hyper_mean_scale) ** 2)
        b_ld[self.nz:] += (np.longdouble(spec.hyper_mean_loc)
                           / np.longdouble(spec.hyper_mean_scale) ** 2)
        prec = prec_ld.astype(float)

        # Diagonal preconditioning: likelihood and prior terms live on very
        # different scales, so factorize the correlation-like matrix.
        scale = 1.0 / np.sqrt(np.diag(prec))
        ps = prec * np.outer(scale, scale)
        chol = None
        jitter = 0.0
        for _ in range(8):
            try:
                chol = np.linalg.cholesky(
                    ps if jitter == 0.0 else ps + jitter * np.eye(len(d)))
                break
            except np.linalg.LinAlgError:
                jitter = 1e-12 if jitter == 0.0 else jitter * 100.0
        if chol is None:
            raise DataError("location conditional is numerically singular")

        def solve(rhs64):
            return scale * np.linalg.solve(
                chol.T, np.linalg.solve(chol, scale * rhs64))

        # Iteratively refined conditional mean: residuals accumulated in
        # longdouble claw back the digits the ill-conditioned solve loses.
        mean_ld = solve(b_ld.astype(float)).astype(np.longdouble)
        for _ in range(3):
            resid = b_ld - prec_ld @ mean_ld
            mean_ld = mean_ld + solve(resid.astype(float))
        mean = mean_ld.astype(float)

        # log|P| through the preconditioned factor.
        logdet = 2.0 * (float(np.log(np.diag(chol)).sum())
                        - float(np.log(scale).sum()))
        # Gaussian integral over the location block; its (2*pi)^(dim/2)
        # cancels against the z and hyper-mean prior normalizations.
        collapsed = (
            -0.5 * st.n_obs * LOG_2PI - st.n_obs * log_sigma
            - 0.5 * np.longdouble(st.s2.sum()) / sigma2
            - ncat * math.log(spec.hyper_mean_scale)
            - 0.5 * ncat * (spec.hyper_mean_loc / spec.hyper_mean_scale) ** 2
            - 0.5 * logdet + 0.5 * float(b_ld @ mean_ld)
        )
        # Scale priors: Exponential(rate) with the log-parameterization
        # Jacobian (+u per log scale).
        rate = spec.rate_category_sd
        for u in log_sd:
            collapsed += math.log(rate) - rate * math.exp(u) + u
        collapsed += (math.log(spec.rate_sigma)
                      - spec.rate_sigma * sigma + log_sigma)
        return _LocationSystem(scale, chol, mean, float(collapsed))

    def draw_locations(self, state: _State, system: "_LocationSystem",
                       rng: np.random.Generator) -> None:
        """Exact Gibbs draw of the location block from its full conditional."""
        noise = rng.standard_normal(len(system.mean))
        x = system.mean + system.scale * np.linalg.solve(system.chol.T, noise)
        offset = 0
        for ci in range(len(self.cats)):
            state.z[ci] = x[offset:offset + self.sizes[ci]].copy()
            offset += self.sizes[ci]
        state.mu = x[self.nz:].copy()


@dataclass
class _LocationSystem:
    """Factorized Gaussian conditional of the location block."""

    scale: np.ndarray    # diagonal preconditioner
    chol: np.ndarray     # Cholesky factor of the preconditioned precision
    mean: np.ndarray     # conditional mean
    collapsed: float     # log p(data | scales) + log p(scales)


def log_posterior(theta: _State | dict, data: dict, spec: ModelSpec) -> float:
    """Joint log density (likelihood + priors) on the non-centered scale.

    ``theta`` may be a sampler state or a plain dict with keys ``z``
    (list of per-category arrays), ``mu``, ``log_sd``, ``log_sigma``.
    """
    if isinstance(theta, dict):
        theta = _State(
            z=[np.asarray(v, dtype=float) for v in theta["z"]],
            mu=np.asarray(theta["mu"], dtype=float),
            log_sd=np.asarray(theta["log_sd"], dtype=float),
            log_sigma=float(theta["log_sigma"]),
        )
    model = _Model(spec, _SuffStats(data, spec))
    return model.log_posterior(theta)


# ---------------------------------------------------------------------------
# Sampler
# ---------------------------------------------------------------------------

ACCEPT_TARGET = 0.3  # middle of the 20-40% adaptation band


class _StepSize:
    """Robbins-Monro step-size adaptation on the log scale."""

    def __init__(self, value: float):
        self.log_value = math.log(value)
        self.t = 0
        self.accepted = 0
        self.proposed = 0

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    def update(self, accept_prob: float, adapting: bool):
        self.proposed += 1
        if adapting:
            self.t += 1
            gain = min(1.0, 3.0 * self.t ** -0.6)
            self.log_value += gain * (accept_prob - ACCEPT_TARGET)
            self.log_value = min(max(self.log_value, -60.0), 10.0)

    def rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else 0.0


SCALE_SWEEPS = 2  # scale-update sweeps per iteration


def _run_chain(model: _Model, warmup: int, draws: int, rng: np.random.Generator):
    spec = model.spec
    ncat = len(model.cats)
    state = _State(
        z=[0.1 * rng.standard_normal(n) for n in model.sizes],
        mu=np.full(ncat, spec.hyper_mean_loc),
        log_sd=np.full(ncat, math.log(1.0 / spec.rate_category_sd)),
        log_sigma=math.log(1.0 / spec.rate_sigma),
    )
    system = model.location_system(state.log_sd, state.log_sigma)

    steps = {
        "log_sd": [_StepSize(0.5) for _ in range(ncat)],
        "log_sigma": _StepSize(0.1),
    }

    samples = np.empty((draws, _n_sampled_params(model)))
    rejected_nonfinite = 0
    swap_pairs = [(i, j) for i in range(ncat) for j in range(i + 1, ncat)]
    swap_proposed = swap_accepted = 0

    def metropolis(step: _StepSize | None, log_sd, log_sigma):
        """Collapsed scale update: accept against p(scales | data)."""
        nonlocal system, rejected_nonfinite
        try:
            proposed = model.location_system(log_sd, log_sigma)
            new_lp = proposed.collapsed
        except DataError:
            proposed, new_lp = None, -math.inf
        if not math.isfinite(new_lp):
            rejected_nonfinite += 1
            a = 0.0
        else:
            log_a = new_lp - system.collapsed
            a = 1.0 if log_a >= 0 else math.exp(log_a)
        accepted = a > 0 and rng.random() < a
        if accepted:
            system = proposed
            if step is not None:
                step.accepted += 1
        if step is not None:
            step.update(a, adapting)
        return accepted

    for it in range(warmup + draws):
        adapting = it < warmup

        for _ in range(SCALE_SWEEPS):
            for ci in range(ncat):
                step = steps["log_sd"][ci]
                proposal = state.log_sd.copy()
                proposal[ci] += step.value * rng.standard_normal()
                if metropolis(step, proposal, state.log_sigma):
                    state.log_sd = proposal

            step = steps["log_sigma"]
            proposal = state.log_sigma + step.value * rng.standard_normal()
            if metropolis(step, state.log_sd, proposal):
                state.log_sigma = proposal

        # Mode-swap move: the collapsed target can be multimodal in which
        # category carries a large sd (categories with similar level counts
        # can absorb the same hyper-mean offset).  Exchanging two log sds
        # is a symmetric proposal that jumps between those modes directly.
        if ncat >= 2:
            pair = swap_pairs[rng.integers(len(swap_pairs))]
            proposal = state.log_sd.copy()
            proposal[list(pair)] = proposal[list(pair[::-1])]
            swap_proposed += 1
            if metropolis(None, proposal, state.log_sigma):
                state.log_sd = proposal
                swap_accepted += 1

        # Location block: exact multivariate-normal Gibbs draw.
        model.draw_locations(state, system, rng)

        if it >= warmup:
            samples[it - warmup] = _flatten(model, state)

    acc = {
        "log_sd": float(np.mean([s.rate() for s in steps["log_sd"]])),
        "log_sigma": steps["log_sigma"].rate(),
        "swap": swap_accepted / swap_proposed if swap_proposed else 1.0,
    }
    return samples, acc, rejected_nonfinite


def _n_sampled_params(model: _Model) -> int:
    return sum(model.sizes) + 2 * len(model.cats) + 1


def param_names(spec: ModelSpec) -> list[str]:
    """Sampled parameter names, matching the stored draw column order."""
    sampled = ["alpha", "beta", "gamma"] + (
        ["delta"] if spec.device_effect_sampled else [])
    names = ["sigma"]
    for cat in sampled:
        names.extend(f"{cat}[{lv}]" for lv in spec.level_sets[cat])
    for cat in sampled:
        names.append(f"mu[{cat}]")
        names.append(f"sd[{cat}]")
    return names


def _flatten(model: _Model, state: _State) -> np.ndarray:
    """Centered-scale parameter vector matching sampled param_names order."""
    out = [math.exp(state.log_sigma)]
    for ci in range(len(model.cats)):
        eff = state.mu[ci] + math.exp(state.log_sd[ci]) * state.z[ci]
        out.extend(eff.tolist())
    for ci in range(len(model.cats)):
        out.append(state.mu[ci])
        out.append(math.exp(state.log_sd[ci]))
    return np.array(out)


# ---------------------------------------------------------------------------
# Posterior model container
# ---------------------------------------------------------------------------

@dataclass
class PosteriorModel:
    levels: dict[str, list[str]]
    summaries: dict[str, dict]
    meta: dict = field(default_factory=dict)
    draw_names: list[str] | None = None
    draws: np.ndarray | None = None  # (chains, iterations, params)

    def has_draws(self) -> bool:
        return self.draws is not None

    def _effect_names(self, key) -> list[str]:
        size, op, dtype, device = _as_levels(key)
        names = [f"alpha[{size}]", f"beta[{op}]", f"gamma[{dtype}]",
                 f"delta[{device}]"]
        for name in names:
            if name not in self.summaries:
                raise UnknownLevel(f"{name} is not a model parameter")
        return names

    def mean_mu(self, key) -> float:
        """Posterior mean of alpha+beta+gamma+delta for one pattern key."""
        return sum(self.summaries[n]["mean"] for n in self._effect_names(key))

    def sigma_mean(self) -> float:
        return self.summaries["sigma"]["mean"]

    def mu_draws(self, key) -> np.ndarray | None:
        """Flattened posterior draws of the key's mean, if draws are stored."""
        if not self.has_draws():
            return None
        names = self._effect_names(key)
        idx = [self.draw_names.index(n) for n in names if n in self.draw_names]
        total = np.zeros(self.draws.shape[0] * self.draws.shape[1])
        for i in idx:
            total += self.draws[:, :, i].reshape(-1)
        return total

    def convergence_failures(self) -> list[str]:
        failures = []
        n_total = self.meta.get("chains", 0) * self.meta.get("draws_per_chain", 0)
        for name, s in self.summaries.items():
            rhat, ess = s.get("rhat"), s.get("ess")
            if rhat is None or ess is None:
                continue  # fixed or externally supplied parameter
            if rhat > RHAT_GATE or ess <= ESS_GATE:
                failures.append(name)
            elif n_total and ess / n_total <= ESS_RATIO_GATE:
                failures.append(name)
        return failures

    def to_json_dict(self, include_draws: bool = True) -> dict:
        obj = {
            "levels": {k: list(v) for k, v in self.levels.items()},
            "summaries": self.summaries,
            "meta": self.meta,
        }
        if include_draws and self.has_draws():
            obj["draws"] = {
                "names": self.draw_names,
                "values": self.draws.tolist(),
            }
        return obj

    def save(self, path, include_draws: bool = True) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(include_draws), fh, indent=1)
            fh.write("\n")

    @classmethod
    def from_json_dict(cls, obj: dict) -> "PosteriorModel":
        draws = draw_names = None
        if obj.get("draws"):
            draw_names = list(obj["draws"]["names"])
            draws = np.asarray(obj["draws"]["values"], dtype=float)
        model = cls(
            levels={k: list(v) for k, v in obj["levels"].items()},
            summaries={k: dict(v) for k, v in obj["summaries"].items()},
            meta=dict(obj.get("meta", {})),
            draw_names=draw_names,
            draws=draws,
        )
        if model.has_draws():
            recomputed = summarize_draws(model.draws, model.draw_names)
            for name, s in recomputed.items():
                stored = model.summaries.get(name)
                if stored is None or not _close(stored, s):
                    raise DataError(
                        f"stored summary for {name} does not match its draws"
                    )
        return model

    @classmethod
    def load(cls, path) -> "PosteriorModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def _close(a: dict, b: dict, rtol: float = 1e-6) -> bool:
    for field_name in ("mean", "sd", "mcse", "ess", "rhat"):
        x, y = a.get(field_name), b.get(field_name)
        if x is None or y is None:
            continue
        scale = max(abs(x), abs(y), 1e-300)
        if abs(x - y) > rtol * scale:
            return False
    return True


def summarize_draws(draws: np.ndarray, names: list[str]) -> dict[str, dict]:
    """Per-parameter mean/sd/MCSE/ESS/R-hat from (chains, n, params) draws."""
    out = {}
    for j, name in enumerate(names):
        chains = draws[:, :, j]
        flat = chains.reshape(-1)
        out[name] = {
            "mean": float(flat.mean()),
            "sd": float(flat.std(ddof=1)),
            "mcse": float(diagnostics.mcse(chains)),
            "ess": float(diagnostics.ess(chains)),
            "rhat": float(diagnostics.split_rhat(chains)),
        }
    return out


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def fit(
    data: dict,
    spec: ModelSpec | None = None,
    chains: int = 4,
    warmup: int = 1000,
    draws: int = 1000,
    seed: int = 0,
) -> PosteriorModel:
    """Fit the model by multi-chain MCMC; deterministic given the seed.

    ``data`` maps pattern keys (PatternKey or 4-tuples) to observation
    arrays.  Attaches a NonConvergenceWarning (without failing) when any
    parameter misses the R-hat/ESS gates.
    """
    if chains < 2:
        raise DataError("at least 2 chains are required for split diagnostics")
    if spec is None:
        spec = ModelSpec.from_keys(data.keys())
    stats = _SuffStats(data, spec)
    model = _Model(spec, stats)

    all_samples = []
    acc_stats = []
    nonfinite = 0
    for c in range(chains):
        rng = np.random.default_rng(seed + c)
        samples, acc, bad = _run_chain(model, warmup, draws, rng)
        all_samples.append(samples)
        acc_stats.append(acc)
        nonfinite += bad
    draw_array = np.stack(all_samples)  # (chains, draws, P)

    names = param_names(spec)
    summaries = summarize_draws(draw_array, names)
    if not spec.device_effect_sampled:
        for device in spec.devices:
            summaries[f"delta[{device}]"] = {
                "mean": 0.0, "sd": 0.0, "mcse": 0.0, "ess": None, "rhat": None,
            }

    meta = {
        "seed": seed,
        "chains": chains,
        "warmup": warmup,
        "draws_per_chain": draws,
        "dataset_digest": stats.digest,
        "acceptance": acc_stats,
        "nonfinite_states": nonfinite,
        "device_effect_sampled": spec.device_effect_sampled,
    }
    posterior = PosteriorModel(
        levels={k: list(v) for k, v in spec.level_sets.items()},
        summaries=summaries,
        meta=meta,
        draw_names=names,
        draws=draw_array,
    )
    failures = posterior.convergence_failures()
    meta["converged"] = not failures
    meta["gate_failures"] = failures
    if failures:
        warnings.warn(
            f"convergence gates failed for: {', '.join(failures)}",
            NonConvergenceWarning,
            stacklevel=2,
        )
    return posterior


def prior_predictive(spec: ModelSpec, n: int, seed: int = 0) -> np.ndarray:
    """Draw n energies from the prior predictive distribution.

    Each draw samples the hyperpriors, then one level effect per category
    (a uniformly random legal pattern, by prior exchangeability of levels),
    then an observation from the likelihood.
    """
    if n == 0:
        return np.empty(0)
    rng = np.random.default_rng(seed)
    ncat = 4 if spec.device_effect_sampled else 3
    hyper = rng.normal(spec.hyper_mean_loc, spec.hyper_mean_scale, size=(n, ncat))
    cat_sd = rng.exponential(1.0 / spec.rate_category_sd, size=(n, ncat))
    effects = rng.normal(hyper, cat_sd)
    sigma = rng.exponential(1.0 / spec.rate_sigma, size=n)
    return rng.normal(effects.sum(axis=1), sigma)


def posterior_mean_mu(model: PosteriorModel, key) -> float:
    """Posterior mean of the linear predictor for one pattern key."""
    return model.mean_mu(key)
