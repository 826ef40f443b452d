"""Seeded Monte Carlo sweeps over disorder realizations.

Trial i draws its realization from a seed derived statelessly from
(master_seed, i), so serial and parallel execution and any worker count
produce bitwise-identical tables; per-trial results land in preallocated
arrays indexed by trial and are reduced afterwards in fixed order.  All
axis values of a sweep reuse the same per-trial seeds (common random
numbers), which makes monotone comparisons along the axis deterministic.

The ensemble Fano factor is a ratio of means - mean variance over mean
photon number - matching the averaged SNR definition
R-bar = n-bar / F-bar; the mean of per-trial Fano factors is kept as a
diagnostic field.  The reported ``stderr_snr`` combines the standard errors
of the numerator and denominator means in quadrature; the two means are
positively correlated, so this combined error is conservative and also
absorbs the O(1/M) finite-size offset between the sampled ensemble and the
asymptotic large-M formulas.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .prolate import ProlateBasis, build_basis, superres_factor
from .quantum_stats import (
    LossChannel,
    PhotonMoments,
    SqueezedInput,
    apply_loss,
    fano,
    mean_photon,
    mean_photon_partial,
    variance_photon,
    variance_photon_partial,
)
from .random_media import DisorderParams, coupling_sums, derive_trial_seed, sample_realization

SWEEP_AXES = (
    "squeeze_g",
    "disorder_s",
    "mode_fill_ratio",
    "loss_rate",
    "coherent_fraction",
    "photon_budget",
)

NO_LOSS = LossChannel(0.0)


@dataclass(frozen=True)
class SweepSpec:
    """One parameter axis swept over a fixed disorder/input/loss baseline."""

    axis: str
    axis_values: tuple
    disorder: DisorderParams
    base_input: SqueezedInput
    loss: LossChannel = NO_LOSS
    trials: int = 1000
    master_seed: int = 1

    def __post_init__(self) -> None:
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        values = tuple(float(v) for v in self.axis_values)
        if len(values) == 0 or not all(math.isfinite(v) for v in values):
            raise ValueError("axis_values must be a nonempty sequence of finite reals")
        object.__setattr__(self, "axis_values", values)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class EnsembleSummary:
    """Columnar per-axis-value aggregates of a Monte Carlo sweep."""

    axis: str
    axis_values: np.ndarray
    mean_n: np.ndarray
    mean_variance: np.ndarray
    fano_ratio: np.ndarray
    snr_ratio: np.ndarray
    stderr_mean_n: np.ndarray
    stderr_snr: np.ndarray
    fano_trial_mean: np.ndarray
    trials: int


def expected_shaped_intensity(disorder: DisorderParams) -> float:
    """Ensemble mean of (sum |t|)^2 for the raw Rayleigh draws.

    M E|t|^2 + M (M - 1) (E|t|)^2 = [2 + (M - 1) pi / 2] / (2 s); used to
    translate a photon budget into a coherent intensity.
    """
    m = disorder.channel_count
    return (2.0 + (m - 1) * math.pi / 2.0) / (2.0 * disorder.disorder_strength)


def _alpha2_for_budget(budget: float, disorder: DisorderParams, squeeze_strength: float) -> float:
    if budget < 0.0:
        raise ValueError("photon budget must be nonnegative")
    squeezed_part = math.sinh(squeeze_strength) ** 2 / disorder.disorder_strength
    return max(budget - squeezed_part, 0.0) / expected_shaped_intensity(disorder)


def _effective_point(spec: SweepSpec, value: float):
    """Disorder, input and loss parameters at one axis value."""
    disorder, inp, loss = spec.disorder, spec.base_input, spec.loss
    if spec.axis == "squeeze_g":
        inp = replace(inp, squeeze_strength=value)
    elif spec.axis == "disorder_s":
        disorder = replace(disorder, disorder_strength=value)
    elif spec.axis == "mode_fill_ratio":
        if not 0.0 < value <= 1.0:
            raise ValueError(f"mode_fill_ratio must lie in (0, 1], got {value}")
        fed = min(max(int(round(value * disorder.channel_count)), 1), disorder.channel_count)
        inp = replace(inp, fed_modes=fed)
    elif spec.axis == "loss_rate":
        loss = LossChannel(value)
    elif spec.axis == "coherent_fraction":
        if not 0.0 <= value < 1.0:
            raise ValueError(f"coherent_fraction must lie in [0, 1), got {value}")
        alpha2 = value * math.sinh(inp.squeeze_strength) ** 2 / (1.0 - value)
        inp = replace(inp, alpha_mag=math.sqrt(alpha2))
    elif spec.axis == "photon_budget":
        alpha2 = _alpha2_for_budget(value, disorder, inp.squeeze_strength)
        inp = replace(inp, alpha_mag=math.sqrt(alpha2))
    return disorder, inp, loss


def _trial_moments(
    disorder: DisorderParams, inp: SqueezedInput, loss: LossChannel, master_seed: int, trial: int
) -> PhotonMoments:
    real = sample_realization(disorder, derive_trial_seed(master_seed, trial))
    if inp.fed_modes == disorder.channel_count:
        sums = coupling_sums(real)
        moments = PhotonMoments(mean_photon(sums, inp), variance_photon(sums, inp))
    else:
        moments = PhotonMoments(mean_photon_partial(real, inp), variance_photon_partial(real, inp))
    return apply_loss(moments, loss)


def _run_trials(
    disorder: DisorderParams,
    inp: SqueezedInput,
    loss: LossChannel,
    master_seed: int,
    trials: int,
    workers: int,
):
    means = np.empty(trials)
    variances = np.empty(trials)

    def fill(index: int) -> None:
        moments = _trial_moments(disorder, inp, loss, master_seed, index)
        means[index] = moments.mean
        variances[index] = moments.variance

    if workers <= 1:
        for i in range(trials):
            fill(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(trials)))
    return means, variances


def _combined_snr_stderr(means: np.ndarray, variances: np.ndarray) -> float:
    """Quadrature-combined standard error of snr_ratio = mean(n) / mean(var)."""
    trials = means.shape[0]
    if trials < 2:
        return 0.0
    mean_n = float(np.mean(means))
    mean_v = float(np.mean(variances))
    se_n = float(np.std(means, ddof=1)) / math.sqrt(trials)
    se_v = float(np.std(variances, ddof=1)) / math.sqrt(trials)
    ratio = mean_n / mean_v
    return ratio * math.sqrt((se_n / mean_n) ** 2 + (se_v / mean_v) ** 2)


def run_sweep(spec: SweepSpec, *, workers: int = 1) -> EnsembleSummary:
    """Monte Carlo sweep along one axis; deterministic for a fixed spec."""
    n_axis = len(spec.axis_values)
    out = {
        name: np.empty(n_axis)
        for name in (
            "mean_n",
            "mean_variance",
            "fano_ratio",
            "snr_ratio",
            "stderr_mean_n",
            "stderr_snr",
            "fano_trial_mean",
        )
    }
    for j, value in enumerate(spec.axis_values):
        disorder, inp, loss = _effective_point(spec, value)
        means, variances = _run_trials(disorder, inp, loss, spec.master_seed, spec.trials, workers)
        mean_n = float(np.mean(means))
        mean_v = float(np.mean(variances))
        out["mean_n"][j] = mean_n
        out["mean_variance"][j] = mean_v
        if mean_n == 0.0:
            # complete loss or dark input: the output is vacuum, which is
            # Poissonian-limited (the q^2 -> 1 limit of the affine Fano law)
            out["fano_ratio"][j] = 1.0
            out["snr_ratio"][j] = 1.0
            out["stderr_mean_n"][j] = 0.0
            out["stderr_snr"][j] = 0.0
            out["fano_trial_mean"][j] = 1.0
            continue
        out["fano_ratio"][j] = mean_v / mean_n
        out["snr_ratio"][j] = mean_n / mean_v
        out["stderr_mean_n"][j] = (
            float(np.std(means, ddof=1)) / math.sqrt(spec.trials) if spec.trials > 1 else 0.0
        )
        out["stderr_snr"][j] = _combined_snr_stderr(means, variances)
        out["fano_trial_mean"][j] = float(np.mean(variances / means))
    return EnsembleSummary(
        axis=spec.axis, axis_values=np.array(spec.axis_values), trials=spec.trials, **out
    )


def run_fano_scatter(
    channel_count: int,
    disorder_strength: float,
    squeeze_strength: float,
    alpha2: float,
    trials: int,
    master_seed: int,
    *,
    workers: int = 1,
) -> np.ndarray:
    """Per-trial Fano factors of fully filled shaped foci (one value per realization)."""
    disorder = DisorderParams(channel_count, disorder_strength)
    inp = SqueezedInput.from_intensity(alpha2, squeeze_strength, fed_modes=channel_count)
    means, variances = _run_trials(disorder, inp, NO_LOSS, master_seed, trials, workers)
    return np.array([fano(PhotonMoments(m, v)) for m, v in zip(means, variances)])


@dataclass(frozen=True)
class SuperresTable:
    """J(budget) curves per disorder strength; s = 0 marks the coherent baseline."""

    disorder_strength: np.ndarray
    mean_n: np.ndarray
    modes_kept: np.ndarray
    classical_width: np.ndarray
    recon_width: np.ndarray
    resolution_gain: np.ndarray
    fano_by_curve: dict


def run_superres_sweep(
    squeeze_strength: float,
    disorder_strengths,
    budgets,
    bandwidth: float,
    epsilon: float,
    trials: int,
    master_seed: int,
    *,
    channel_count: int = 50,
    alpha2: float = 1e4,
    num_modes: int = 7,
    quad_order: int = 256,
    workers: int = 1,
    basis: ProlateBasis | None = None,
) -> SuperresTable:
    """Super-resolution factor vs focus photon number, per disorder strength.

    The prolate budget is the illumination SNR: for the coherent baseline it
    equals the mean photon number itself, while squeezed light with disorder
    s boosts it to budget / F-bar(s), with F-bar estimated from the seeded
    disorder ensemble at the reference intensity (the bright-regime Fano
    ratio is insensitive to the exact intensity).
    """
    if basis is None:
        basis = build_basis(bandwidth, num_modes, quad_order)
    budgets = [float(b) for b in budgets]
    curves = [(0.0, 1.0)]  # coherent baseline: F = 1 exactly
    for s in disorder_strengths:
        disorder = DisorderParams(channel_count, float(s))
        inp = SqueezedInput.from_intensity(alpha2, squeeze_strength, fed_modes=channel_count)
        means, variances = _run_trials(disorder, inp, NO_LOSS, master_seed, trials, workers)
        curves.append((float(s), float(np.mean(variances)) / float(np.mean(means))))

    rows_s, rows_n, rows_q, rows_w, rows_wq, rows_j = [], [], [], [], [], []
    for s, fano_bar in curves:
        for budget in budgets:
            report = superres_factor(basis, budget / fano_bar, epsilon)
            rows_s.append(s)
            rows_n.append(budget)
            rows_q.append(report.modes_kept)
            rows_w.append(report.classical_width)
            rows_wq.append(report.recon_width)
            rows_j.append(report.resolution_gain)
    return SuperresTable(
        disorder_strength=np.array(rows_s),
        mean_n=np.array(rows_n),
        modes_kept=np.array(rows_q, dtype=int),
        classical_width=np.array(rows_w),
        recon_width=np.array(rows_wq),
        resolution_gain=np.array(rows_j),
        fano_by_curve=dict(curves),
    )


@dataclass(frozen=True)
class LossSweepTable:
    """Average SNR over mean photons vs loss rate, one block per squeeze strength."""

    squeeze_strength: np.ndarray
    loss_rate: np.ndarray
    mean_n: np.ndarray
    fano_ratio: np.ndarray
    snr_ratio: np.ndarray
    stderr_snr: np.ndarray
    trials: int


def run_loss_sweep(
    squeeze_strengths,
    disorder_strength: float,
    alpha2: float,
    loss_grid,
    trials: int,
    master_seed: int,
    *,
    channel_count: int = 50,
    workers: int = 1,
) -> LossSweepTable:
    """Lossy-focus table: the ratio 1 / F-bar_L against the loss rate |q|^2."""
    blocks = []
    for g in squeeze_strengths:
        spec = SweepSpec(
            axis="loss_rate",
            axis_values=tuple(float(q) for q in loss_grid),
            disorder=DisorderParams(channel_count, disorder_strength),
            base_input=SqueezedInput.from_intensity(alpha2, float(g), fed_modes=channel_count),
            trials=trials,
            master_seed=master_seed,
        )
        blocks.append((float(g), run_sweep(spec, workers=workers)))
    n_axis = len(blocks[0][1].axis_values)
    g_col = np.concatenate([np.full(n_axis, g) for g, _ in blocks])
    return LossSweepTable(
        squeeze_strength=g_col,
        loss_rate=np.concatenate([b.axis_values for _, b in blocks]),
        mean_n=np.concatenate([b.mean_n for _, b in blocks]),
        fano_ratio=np.concatenate([b.fano_ratio for _, b in blocks]),
        snr_ratio=np.concatenate([b.snr_ratio for _, b in blocks]),
        stderr_snr=np.concatenate([b.stderr_snr for _, b in blocks]),
        trials=trials,
    )
