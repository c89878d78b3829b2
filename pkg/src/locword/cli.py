"""Command line front end.

Every run writes delimited tables (CSV), a canonical JSON summary, SVG
figures for report commands, and a manifest.json into the output
directory.  With a fixed configuration all outputs except manifest.json
(which carries wall-clock timestamps) are byte-reproducible.

Configuration precedence, lowest to highest: built-in defaults, values
from a JSON --config file, command line flags, and finally the
LOCWORD_SEED environment variable for the base seed.

Exit codes:
    0  success
    1  failed invariant check or unexpected internal error
    2  invalid configuration or parameters
    3  site outside a sampled realization window
    4  energy too close to the finite-box spectrum
    5  zero-hit Monte Carlo cell, fit impossible
    6  no eigenvalues inside the requested energy window
    7  averaging horizon too long for the box (boundary reflection)
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .dynamics import growth_exponent_fit
from .errors import (
    CoverageError,
    EmptyBandError,
    InsufficientTrialsError,
    LocwordError,
    NearSingularError,
    ParameterError,
    ReflectionError,
)
from .experiments import (
    EnsembleSpec,
    correlator_profile,
    edl_kernel_decay,
    eigen_decay_vs_lyapunov,
    gamma_reference,
    ldp_rate_fit,
    regularity_probability,
    transport_ensemble,
)
from .fitting import fit_log_linear
from .operators import (
    chebyshev_bound_check,
    eigensystem,
    green,
    green_log_magnitude,
    localization_centers,
    restrict,
)
from .reporting import (
    LIBRARY_VERSION,
    RunManifest,
    config_hash,
    save_line_plot,
    write_csv,
    write_json,
)
from .transfer import detect_critical_energies, lyapunov_curve, lyapunov_estimate
from .verify import run_all
from .words import preset, sample_potential

_DEFAULT_SEED = 104729
_ENV_SEED = "LOCWORD_SEED"

_EXIT_FOR = (
    (ParameterError, 2),
    (CoverageError, 3),
    (NearSingularError, 4),
    (InsufficientTrialsError, 5),
    (EmptyBandError, 6),
    (ReflectionError, 7),
)


def _exit_code_for(exc: LocwordError) -> int:
    for cls, code in _EXIT_FOR:
        if isinstance(exc, cls):
            return code
    return 1


# ---------------------------------------------------------------- parsing


def _loose_int(raw) -> int:
    """Integer flag values, accepting scientific shorthand like 1e6."""
    value = float(raw)
    if value != int(value):
        raise argparse.ArgumentTypeError("%r is not an integer" % raw)
    return int(value)


def _float_list(raw: str) -> list[float]:
    return [float(tok) for tok in str(raw).split(",") if tok.strip()]


def _int_list(raw) -> list[int]:
    if isinstance(raw, (list, tuple)):
        return [int(v) for v in raw]
    return [int(tok) for tok in str(raw).split(",") if tok.strip()]


def _interval(raw) -> tuple[float, float]:
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return float(raw[0]), float(raw[1])
    parts = str(raw).split(":")
    if len(parts) != 2:
        raise ParameterError("interval must be given as lo:hi")
    return float(parts[0]), float(parts[1])


def _distribution(cfg: dict):
    spec = cfg.get("preset")
    if spec is None:
        raise ParameterError("a word distribution is required (--preset)")
    if spec == "custom" or (isinstance(spec, str) and spec.startswith("custom")):
        words = cfg.get("words")
        weights = cfg.get("weights")
        if words is None or weights is None:
            raise ParameterError(
                "preset 'custom' needs 'words' and 'weights' in the config file"
            )
        return preset(
            "custom",
            words=[tuple(float(x) for x in w) for w in words],
            weights=[float(w) for w in weights],
        )
    name, *params = str(spec).split(":")
    try:
        return preset(name, *[float(p) for p in params])
    except (TypeError, ValueError) as exc:
        raise ParameterError("bad preset %r: %s" % (spec, exc)) from None


def _half_width(cfg: dict, default_box: int) -> int:
    box = int(cfg.get("box", default_box))
    if box < 3:
        raise ParameterError("box size must be at least 3 sites")
    return box // 2


def _resolved_seed(cfg: dict) -> int:
    env = os.environ.get(_ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ParameterError(
                "%s must be an integer, got %r" % (_ENV_SEED, env)
            ) from None
    return int(cfg.get("seed", _DEFAULT_SEED))


def _workers(cfg: dict) -> int:
    w = cfg.get("workers")
    w = (os.cpu_count() or 1) if w is None else int(w)
    if w < 1:
        raise ParameterError("worker count must be at least 1")
    return w


def _energy_grid(cfg: dict, default_n: int) -> np.ndarray:
    emin = float(cfg.get("emin", -3.0))
    emax = float(cfg.get("emax", 3.0))
    if not emin < emax:
        raise ParameterError("need emin < emax")
    step = cfg.get("step")
    if step is not None:
        step = float(step)
        if step <= 0:
            raise ParameterError("grid step must be positive")
        return np.arange(emin, emax + 0.5 * step, step)
    return np.linspace(emin, emax, int(cfg.get("n_energies", default_n)))


# ---------------------------------------------------------------- emission


def _emit_csv(out: Path, manifest: RunManifest, name: str, header, rows) -> Path:
    path = write_csv(out / name, header, rows)
    manifest.record_output(path)
    return path


def _emit_plot(out: Path, manifest: RunManifest, name: str, x, series, **kw) -> Path:
    path = save_line_plot(out / name, x, series, **kw)
    manifest.record_output(path)
    return path


# ---------------------------------------------------------------- commands


def _run_lyapunov(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    dist = _distribution(cfg)
    sites = int(cfg.get("sites", 100_000))
    realizations = int(cfg.get("realizations", 8))
    threshold = float(cfg.get("threshold", 0.02))
    seed = _resolved_seed(cfg)
    grid = _energy_grid(cfg, 61)
    curve = lyapunov_curve(
        dist,
        grid,
        sites=sites,
        seed=seed,
        realizations=realizations,
        critical_threshold=threshold,
    )
    criticals = detect_critical_energies(curve, threshold)
    _emit_csv(
        out,
        manifest,
        "lyapunov.csv",
        ["energy", "gamma", "std_error", "flagged"],
        [
            [e.energy, e.gamma, e.std_error, bool(f)]
            for e, f in zip(curve.estimates, curve.flagged)
        ],
    )
    _emit_plot(
        out,
        manifest,
        "lyapunov.svg",
        curve.grid,
        {"gamma": curve.gammas},
        xlabel="energy",
        ylabel="Lyapunov exponent (per site)",
        title="Lyapunov exponent over the energy grid",
        vlines=criticals,
    )
    return {
        "sites": sites,
        "realizations": realizations,
        "threshold": threshold,
        "v_floor": curve.v_floor,
        "critical_energies": criticals,
        "gamma_min": float(np.min(curve.gammas)),
        "gamma_max": float(np.max(curve.gammas)),
    }


def _run_critical(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    dist = _distribution(cfg)
    sites = int(cfg.get("sites", 100_000))
    realizations = int(cfg.get("realizations", 8))
    threshold = float(cfg.get("threshold", 0.02))
    seed = _resolved_seed(cfg)
    grid = _energy_grid(cfg, 121)
    curve = lyapunov_curve(
        dist,
        grid,
        sites=sites,
        seed=seed,
        realizations=realizations,
        critical_threshold=threshold,
    )
    criticals = detect_critical_energies(curve, threshold)
    rows = []
    for e in criticals:
        est = lyapunov_estimate(dist, e, sites=sites, seed=seed, realizations=realizations)
        rows.append([est.energy, est.gamma, est.std_error])
    _emit_csv(out, manifest, "critical.csv", ["energy", "gamma", "std_error"], rows)
    _emit_plot(
        out,
        manifest,
        "critical.svg",
        curve.grid,
        {"gamma": curve.gammas},
        xlabel="energy",
        ylabel="Lyapunov exponent (per site)",
        title="Vanishing points of the Lyapunov exponent",
        vlines=criticals,
    )
    return {
        "threshold": threshold,
        "critical_energies": criticals,
        "gamma_at_critical": [r[1] for r in rows],
        "v_floor": curve.v_floor,
        "count": len(criticals),
    }


def _run_spectrum(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    dist = _distribution(cfg)
    hw = _half_width(cfg, 401)
    seed = _resolved_seed(cfg)
    r = sample_potential(dist, seed=seed, window=(-hw, hw))
    eig = eigensystem(restrict(r, -hw, hw))
    centers = localization_centers(eig)
    _emit_csv(
        out,
        manifest,
        "spectrum.csv",
        ["index", "energy", "center"],
        [[k, eig.eigenvalues[k], int(centers[k])] for k in range(eig.size)],
    )
    _emit_plot(
        out,
        manifest,
        "spectrum.svg",
        np.arange(eig.size),
        {"energy": eig.eigenvalues},
        xlabel="eigenvalue index",
        ylabel="energy",
        title="Finite-box spectrum (one realization)",
    )
    return {
        "box_size": eig.size,
        "energy_min": float(eig.eigenvalues[0]),
        "energy_max": float(eig.eigenvalues[-1]),
        "center_min": int(centers.min()),
        "center_max": int(centers.max()),
    }


def _run_green_check(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    dist = _distribution(cfg)
    if cfg.get("energy") is None:
        raise ParameterError("an energy is required (--energy)")
    E = float(cfg["energy"])
    hw = _half_width(cfg, 401)
    seed = _resolved_seed(cfg)
    gamma_sites = int(cfg.get("gamma_sites", 1_000_000))
    r = sample_potential(dist, seed=seed, window=(-hw, hw))
    op = restrict(r, -hw, hw)
    green(op, E, 0, 0)  # near-singular guard once, then log-domain row
    sites = np.arange(-hw, hw + 1)
    logg = np.array([green_log_magnitude(op, E, 0, int(y)) for y in sites])
    dist_axis = np.abs(sites)
    mask = sites != 0
    fit = fit_log_linear(
        dist_axis[mask], np.exp(logg[mask]), window=(hw / 10.0, hw / 2.0)
    )
    ref = gamma_reference(dist, E, sites=gamma_sites)
    rate = -fit.rate
    _emit_csv(
        out,
        manifest,
        "green.csv",
        ["site", "distance", "log_green"],
        [[int(s), int(d), g] for s, d, g in zip(sites, dist_axis, logg)],
    )
    _emit_plot(
        out,
        manifest,
        "green.svg",
        sites,
        {"log |G(0, y)|": logg},
        xlabel="site y",
        ylabel="log |G(0, y)|",
        title="Green function decay from the box center",
    )
    return {
        "energy": E,
        "box_size": 2 * hw + 1,
        "decay_rate": rate,
        "r2": fit.r2,
        "gamma_ref": ref.gamma,
        "gamma_ref_sites": gamma_sites,
        "rate_over_gamma": rate / ref.gamma if ref.gamma > 0 else math.inf,
    }


def _run_regularity(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    dist = _distribution(cfg)
    if cfg.get("energy") is None:
        raise ParameterError("an energy is required (--energy)")
    E = float(cfg["energy"])
    hw = _half_width(cfg, 201)
    count = int(cfg.get("N", 25))
    probes = int(cfg.get("probes", 8))
    scales = _int_list(cfg.get("scales", "40"))
    seed = _resolved_seed(cfg)
    gamma_sites = int(cfg.get("gamma_sites", 1_000_000))
    ref = gamma_reference(dist, E, sites=gamma_sites)
    rate = cfg.get("rate")
    rate = 0.5 * ref.gamma if rate is None else float(rate)
    if rate <= 0:
        raise ParameterError("regularity rate must be positive")
    ens = EnsembleSpec(
        distribution=dist,
        half_width=hw,
        count=count,
        base_seed=seed,
        interval=(E, E),
    )
    workers = _workers(cfg)
    if workers == 1 or len(scales) == 1:
        results = [
            regularity_probability(ens, rate, n, E, probes=probes) for n in scales
        ]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(scales))) as pool:
            results = list(
                pool.map(
                    lambda n: regularity_probability(ens, rate, n, E, probes=probes),
                    scales,
                )
            )
    rows = [
        [n, res.probability, res.stderr, res.hits, res.trials,
         res.near_singular_resamples]
        for n, res in zip(scales, results)
    ]
    _emit_csv(
        out,
        manifest,
        "regularity.csv",
        ["scale", "probability", "stderr", "hits", "trials", "near_singular_resamples"],
        rows,
    )
    _emit_plot(
        out,
        manifest,
        "regularity.svg",
        [r[0] for r in rows],
        {"P(regular)": [r[1] for r in rows]},
        xlabel="scale n",
        ylabel="probability",
        title="Two-sided Green decay regularity probability",
    )
    return {
        "energy": E,
        "rate_used": rate,
        "gamma_ref": ref.gamma,
        "gamma_ref_sites": gamma_sites,
        "scales": [int(n) for n in scales],
        "probabilities": [r.probability for r in results],
        "box_size": ens.box_size,
        "realizations": count,
    }


def _run_ldp(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    dist = _distribution(cfg)
    if cfg.get("energy") is None:
        raise ParameterError("an energy is required (--energy)")
    E = float(cfg["energy"])
    epsilon = float(cfg.get("epsilon", 0.15))
    lengths = _int_list(cfg.get("lengths", "40,60,80,100,120"))
    trials = int(cfg.get("trials", 2000))
    side = str(cfg.get("side", "plus"))
    seed = _resolved_seed(cfg)
    result = ldp_rate_fit(dist, E, epsilon, lengths, trials, seed, side=side)
    _emit_csv(
        out,
        manifest,
        "ldp.csv",
        ["n", "hits", "trials", "probability", "stderr"],
        [
            [r.spec.n, r.hits, r.trials, r.probability, r.stderr]
            for r in result.results
        ],
    )
    _emit_plot(
        out,
        manifest,
        "ldp.svg",
        list(result.n_grid),
        {"P(deviation)": result.probabilities},
        xlabel="interval length n",
        ylabel="probability",
        title="Deviation probability of the window determinant",
        logy=True,
    )
    return {
        "energy": E,
        "epsilon": epsilon,
        "side": side,
        "trials": trials,
        "lengths": [int(n) for n in lengths],
        "eta_hat": result.eta_hat,
        "r2": result.fit.r2,
        "gamma_ref": result.gamma_ref,
    }


def _profile_summary(profile, extra: dict) -> dict:
    base = {
        "anchor": profile.anchor,
        "interval": list(profile.interval),
        "realizations": profile.realization_count,
        "decay_rate": profile.decay_rate,
        "r2": None if profile.fit is None else profile.fit.r2,
        "fit_window": None if profile.fit is None else list(profile.fit.window),
    }
    base.update(extra)
    return base


def _emit_profile(out, manifest, name, profile, ylabel, title) -> None:
    _emit_csv(
        out,
        manifest,
        name + ".csv",
        ["distance", "mean_value"],
        [[int(d), v] for d, v in zip(profile.distances, profile.values)],
    )
    mask = profile.values > 0
    _emit_plot(
        out,
        manifest,
        name + ".svg",
        profile.distances[mask],
        {ylabel: profile.values[mask]},
        xlabel="distance",
        ylabel=ylabel,
        title=title,
        logy=True,
    )


def _run_correlator(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    dist = _distribution(cfg)
    if cfg.get("interval") is None:
        raise ParameterError("an energy window is required (--I lo:hi)")
    interval = _interval(cfg["interval"])
    hw = _half_width(cfg, 201)
    count = int(cfg.get("N", 40))
    center = int(cfg.get("center", 0))
    seed = _resolved_seed(cfg)
    ens = EnsembleSpec(
        distribution=dist,
        half_width=hw,
        count=count,
        base_seed=seed,
        interval=interval,
    )
    profile = correlator_profile(ens, center)
    _emit_profile(
        out,
        manifest,
        "correlator",
        profile,
        "mean correlator",
        "Center-resolved eigenfunction correlator",
    )
    return _profile_summary(
        profile, {"box_size": ens.box_size, "center": center}
    )


def _run_edl(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    dist = _distribution(cfg)
    if cfg.get("interval") is None:
        raise ParameterError("an energy window is required (--I lo:hi)")
    interval = _interval(cfg["interval"])
    hw = _half_width(cfg, 201)
    count = int(cfg.get("N", 40))
    anchor = int(cfg.get("anchor", 0))
    seed = _resolved_seed(cfg)
    ens = EnsembleSpec(
        distribution=dist,
        half_width=hw,
        count=count,
        base_seed=seed,
        interval=interval,
    )
    profile = edl_kernel_decay(ens, anchor)
    _emit_profile(
        out,
        manifest,
        "edl",
        profile,
        "mean kernel bound",
        "Time-uniform dominating kernel of the projected evolution",
    )
    return _profile_summary(
        profile, {"box_size": ens.box_size, "anchor": anchor}
    )


def _run_eigendecay(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    dist = _distribution(cfg)
    if cfg.get("interval") is None:
        raise ParameterError("an energy window is required (--I lo:hi)")
    interval = _interval(cfg["interval"])
    hw = _half_width(cfg, 501)
    count = int(cfg.get("N", 5))
    seed = _resolved_seed(cfg)
    ens = EnsembleSpec(
        distribution=dist,
        half_width=hw,
        count=count,
        base_seed=seed,
        interval=interval,
    )
    summary = eigen_decay_vs_lyapunov(ens)
    order = np.sort(summary.rates)
    _emit_csv(
        out,
        manifest,
        "eigendecay.csv",
        ["rank", "rate"],
        [[k, order[k]] for k in range(len(order))],
    )
    _emit_plot(
        out,
        manifest,
        "eigendecay.svg",
        np.arange(len(order)),
        {
            "fitted decay rate": order,
            "Lyapunov reference": np.full(len(order), summary.gamma_ref),
        },
        xlabel="vector rank",
        ylabel="decay rate",
        title="Eigenvector decay rates against the Lyapunov exponent",
    )
    return {
        "band": list(summary.band),
        "median_rate": summary.median_rate,
        "gamma_ref": summary.gamma_ref,
        "ratio": summary.ratio,
        "localized": summary.localized,
        "vector_count": summary.vector_count,
        "realizations": summary.realization_count,
        "box_size": ens.box_size,
    }


def _run_transport(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    dist = _distribution(cfg)
    hw = _half_width(cfg, 401)
    q_exp = float(cfg.get("q", 2.0))
    count = int(cfg.get("N", 10))
    samples = int(cfg.get("samples", 256))
    seed = _resolved_seed(cfg)
    if cfg.get("times") is not None:
        times = np.array(_float_list(cfg["times"]))
    else:
        tmin = float(cfg.get("tmin", 20.0))
        tmax = float(cfg.get("tmax", 300.0))
        n_times = int(cfg.get("n_times", 8))
        if not 0 < tmin < tmax:
            raise ParameterError("need 0 < tmin < tmax")
        times = np.geomspace(tmin, tmax, n_times)
    result = transport_ensemble(
        dist, hw, q_exp, times, count, seed, samples=samples,
        workers=_workers(cfg),
    )
    _emit_csv(
        out,
        manifest,
        "transport.csv",
        ["T", "mean_moment"],
        [[t, v] for t, v in zip(result.series.times, result.series.values)],
    )
    _emit_csv(
        out,
        manifest,
        "transport_realizations.csv",
        ["realization", "T", "moment"],
        [
            [i, float(times[j]), float(result.per_realization[i, j])]
            for i in range(count)
            for j in range(len(times))
        ],
    )
    _emit_plot(
        out,
        manifest,
        "transport.svg",
        result.series.times,
        {"mean |X|^q moment": result.series.values},
        xlabel="averaging time T",
        ylabel="time-averaged moment",
        title="Disorder-averaged transport moment",
        logx=True,
        logy=True,
    )
    summary = {
        "box_size": 2 * hw + 1,
        "q": q_exp,
        "realizations": count,
        "samples": samples,
        "times": [float(t) for t in times],
        "mean_moments": [float(v) for v in result.series.values],
        "growth_exponent": None,
        "growth_r2": None,
    }
    if len(times) >= 5:
        exponent, _, r2 = growth_exponent_fit(result.series)
        summary["growth_exponent"] = exponent
        summary["growth_r2"] = r2
    return summary


def _run_cheb_check(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    if cfg.get("coeffs") is None:
        raise ParameterError("polynomial coefficients are required (--coeffs)")
    coeffs = _float_list(cfg["coeffs"]) if not isinstance(cfg["coeffs"], list) else [
        float(c) for c in cfg["coeffs"]
    ]
    theta = float(cfg.get("theta", 0.25))
    base = cfg.get("base")
    base = None if base is None else float(base)
    check = chebyshev_bound_check(coeffs, theta, a=base)
    n = check.n
    nodes = np.cos(2.0 * np.pi * (np.arange(1, n + 1) + theta) / n)
    poly = np.polynomial.polynomial.Polynomial(coeffs)
    node_values = np.abs(poly(nodes))
    _emit_csv(
        out,
        manifest,
        "cheb.csv",
        ["node_index", "node", "abs_value"],
        [[i + 1, nodes[i], node_values[i]] for i in range(n)],
    )
    grid = np.linspace(-1.0, 1.0, 1001)
    _emit_plot(
        out,
        manifest,
        "cheb.svg",
        grid,
        {"|Q(x)|": np.abs(poly(grid))},
        xlabel="x",
        ylabel="|Q(x)|",
        title="Polynomial magnitude against shifted node samples",
        vlines=nodes,
    )
    summary = {
        "n": check.n,
        "theta": check.theta,
        "node_max": check.node_max,
        "global_max": check.global_max,
        "base": check.base,
        "implied_c": check.implied_c,
        "bound_holds": check.bound_holds,
    }
    if not check.bound_holds:
        summary["_exit_code"] = 1
    return summary


def _run_verify(cfg: dict, out: Path, manifest: RunManifest) -> dict:
    results = run_all()
    _emit_csv(
        out,
        manifest,
        "verify.csv",
        ["suite", "cases", "violations", "worst", "detail"],
        [[r.name, r.cases, r.violations, r.worst, r.detail] for r in results],
    )
    total = sum(r.violations for r in results)
    summary = {
        "suites": [
            {
                "name": r.name,
                "cases": r.cases,
                "violations": r.violations,
                "worst": r.worst,
            }
            for r in results
        ],
        "total_violations": total,
        "all_passed": total == 0,
    }
    if total > 0:
        summary["_exit_code"] = 1
    return summary


_HANDLERS = {
    "lyapunov": _run_lyapunov,
    "critical": _run_critical,
    "spectrum": _run_spectrum,
    "green-check": _run_green_check,
    "regularity": _run_regularity,
    "ldp": _run_ldp,
    "correlator": _run_correlator,
    "edl": _run_edl,
    "eigendecay": _run_eigendecay,
    "transport": _run_transport,
    "cheb-check": _run_cheb_check,
    "verify": _run_verify,
}

# Keys that do not change the computed results (output location, config
# file path, execution parallelism) stay out of the run hash.
_NON_CONFIG_KEYS = {"out", "config", "command", "workers"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="locword",
        description="Random word potentials: Lyapunov exponents, finite-box "
        "spectra, Green function decay, and disorder-averaged dynamics.",
    )
    parser.add_argument("--version", action="version", version=LIBRARY_VERSION)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with option defaults")
        p.add_argument("--out", help="output directory (default: locword-<command>)")
        p.add_argument("--seed", type=int, help="base seed (env %s wins)" % _ENV_SEED)
        p.add_argument(
            "--workers",
            type=int,
            help="thread pool size for commands whose work fans out over "
            "independent calls (default: available parallelism)",
        )
        return p

    def add_preset(p):
        p.add_argument(
            "--preset",
            help="word distribution, e.g. dimer:1, bernoulli_anderson:0:4:0.5, free",
        )

    p = add("lyapunov", "Lyapunov exponent over an energy grid")
    add_preset(p)
    p.add_argument("--emin", type=float, help="grid start (default -3)")
    p.add_argument("--emax", type=float, help="grid end (default 3)")
    p.add_argument("--step", type=float, help="grid spacing (overrides --n-energies)")
    p.add_argument("--n-energies", type=_loose_int, dest="n_energies",
                   help="grid points")
    p.add_argument("--sites", type=_loose_int, help="sites per realization, e.g. 1e6")
    p.add_argument("--realizations", type=int, help="ensemble size per energy")
    p.add_argument("--threshold", type=float, help="near-critical flag level")

    p = add("critical", "locate energies where the Lyapunov exponent vanishes")
    add_preset(p)
    p.add_argument("--emin", type=float)
    p.add_argument("--emax", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--n-energies", type=_loose_int, dest="n_energies")
    p.add_argument("--sites", type=_loose_int)
    p.add_argument("--realizations", type=int)
    p.add_argument("--threshold", type=float)

    p = add("spectrum", "finite-box eigenvalues and localization centers")
    add_preset(p)
    p.add_argument("--box", type=int, help="box size in sites (default 401)")

    p = add("green-check", "Green function decay from the box center")
    add_preset(p)
    p.add_argument("--energy", type=float, help="spectral parameter E")
    p.add_argument("--box", type=int)
    p.add_argument("--gamma-sites", type=_loose_int, dest="gamma_sites",
                   help="sites for the Lyapunov reference")

    p = add("regularity", "probability of two-sided Green decay at scale n")
    add_preset(p)
    p.add_argument("--energy", type=float)
    p.add_argument("--box", type=int)
    p.add_argument("--N", type=int, dest="N", help="realization count")
    p.add_argument("--scales", help="comma list of scales n, e.g. 20,40,80")
    p.add_argument("--rate", type=float, help="decay rate c (default gamma/2)")
    p.add_argument("--probes", type=int, help="probe sites per realization")
    p.add_argument("--gamma-sites", type=_loose_int, dest="gamma_sites")

    p = add("ldp", "deviation probabilities of the window determinant")
    add_preset(p)
    p.add_argument("--energy", type=float)
    p.add_argument("--epsilon", type=float, help="deviation margin (default 0.15)")
    p.add_argument("--lengths", help="comma list of interval lengths")
    p.add_argument("--trials", type=_loose_int, help="Monte Carlo trials per length, e.g. 1e4")
    p.add_argument("--side", choices=["plus", "minus"], help="deviation side")

    p = add("correlator", "ensemble eigenfunction correlator profile")
    add_preset(p)
    p.add_argument("--I", "--interval", dest="interval", help="energy window lo:hi")
    p.add_argument("--box", type=int)
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--center", type=int, help="localization center (default 0)")

    p = add("edl", "time-uniform dominating kernel decay profile")
    add_preset(p)
    p.add_argument("--I", "--interval", dest="interval", help="energy window lo:hi")
    p.add_argument("--box", type=int)
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--anchor", type=int, help="anchor site (default 0)")

    p = add("eigendecay", "eigenvector decay rates against the Lyapunov exponent")
    add_preset(p)
    p.add_argument("--I", "--interval", dest="interval", help="energy band lo:hi")
    p.add_argument("--box", type=int, help="box size, at least 500 sites")
    p.add_argument("--N", type=int, dest="N")

    p = add("transport", "disorder-averaged time-averaged |X|^q moments")
    add_preset(p)
    p.add_argument("--box", type=int)
    p.add_argument("--q", type=float, dest="q", help="moment exponent (default 2)")
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--n-times", type=int, dest="n_times")
    p.add_argument("--times", help="explicit comma list of averaging times")
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--samples", type=int, help="time samples per average")

    p = add("cheb-check", "node-vs-global polynomial magnitude bound")
    p.add_argument("--coeffs", help="monomial coefficients, increasing degree")
    p.add_argument("--theta", type=float, help="node shift in (0, 1/2)")
    p.add_argument("--base", type=float, help="explicit growth base")

    add("verify", "run every internal invariant suite")

    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        path = Path(args.config)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ParameterError("cannot read config file: %s" % exc) from None
        except json.JSONDecodeError as exc:
            raise ParameterError("config file is not valid JSON: %s" % exc) from None
        if not isinstance(data, dict):
            raise ParameterError("config file must hold a JSON object")
        cfg.update(data)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        cfg[key] = value
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2

    try:
        cfg = _merge_config(args)
    except ParameterError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2

    out = Path(cfg.get("out") or ("locword-" + args.command))
    out.mkdir(parents=True, exist_ok=True)

    hashed = {k: v for k, v in cfg.items() if k not in _NON_CONFIG_KEYS}
    hashed["command"] = args.command
    hashed["version"] = LIBRARY_VERSION
    if os.environ.get(_ENV_SEED) is not None:
        hashed["seed"] = os.environ[_ENV_SEED]

    manifest = RunManifest(
        config_hash=config_hash(hashed),
        base_seed=_try_seed(cfg),
    )
    manifest.mark_started()

    code = 0
    try:
        summary = _HANDLERS[args.command](cfg, out, manifest)
        code = int(summary.pop("_exit_code", 0))
        payload = {
            "command": args.command,
            "version": LIBRARY_VERSION,
            "config_hash": manifest.config_hash,
            "base_seed": manifest.base_seed,
            "results": summary,
        }
        manifest.record_output(write_json(out / "summary.json", payload))
    except LocwordError as exc:
        code = _exit_code_for(exc)
        manifest.record_error(type(exc).__name__, str(exc), code)
        print("error: %s" % exc, file=sys.stderr)
    except Exception as exc:  # pragma: no cover - defensive
        code = 1
        manifest.record_error(type(exc).__name__, str(exc), code)
        print("internal error: %s" % exc, file=sys.stderr)
    finally:
        manifest.write(out)

    return code


def _try_seed(cfg: dict) -> int | None:
    try:
        return _resolved_seed(cfg)
    except ParameterError:
        return None


if __name__ == "__main__":
    raise SystemExit(main())
