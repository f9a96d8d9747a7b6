"""Weighted nonlinear least-squares fits for the experiment curves.

Four models: power-law fidelity decay F0 (1-eps)^N, exponential
coherence decay F0 exp(-t/Tc), randomized-benchmarking decay A p^m + B,
and the thermal carrier Rabi signal with parameters (Omega0, T).

All fits run a damped Gauss-Newton loop (Levenberg-Marquardt style
damping, iteration cap 200, relative step tolerance 1e-10) with analytic
Jacobians, weights 1/stderr^2 and parameter boxes.  Initial guesses use
log-linearization; the thermal fit multi-starts over a temperature grid.
Parameter uncertainties come from the Jacobian-based covariance at the
optimum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .atom import HBAR, KB
from .motion import ModeSet, ThermalState, thermal_carrier_signal

MAX_ITERATIONS = 200
REL_STEP_TOL = 1e-10

# Multi-start temperature grid for the thermal Rabi fit (kelvin).
THERMAL_T_GRID = tuple(np.geomspace(0.1e-3, 100e-3, 8))
THERMAL_T_MIN = 1e-5
THERMAL_T_MAX = 1.0


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters with uncertainties and optimizer diagnostics."""

    model: str
    params: dict[str, float]
    stderrs: dict[str, float]
    residual_rss: float
    converged: bool
    iterations: int
    extras: dict[str, float] = field(default_factory=dict)

    def __str__(self) -> str:
        ps = ", ".join(f"{k}={v:.6g}(+-{self.stderrs.get(k, float('nan')):.2g})" for k, v in self.params.items())
        return f"{self.model}: {ps}, rss={self.residual_rss:.3g}, converged={self.converged}"


def _as_points(x, y, yerr):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if yerr is None:
        yerr = np.ones_like(y)
    yerr = np.asarray(yerr, dtype=float).ravel()
    if not (x.size == y.size == yerr.size):
        raise ValueError("x, y, stderr must have equal lengths")
    if np.any(yerr <= 0):
        raise ValueError("stderr values must be positive")
    return x, y, yerr


def _gauss_newton(value, jacobian, x, y, yerr, p0, lo, hi):
    """Damped Gauss-Newton on weighted residuals; returns (p, cov, rss, ok, iters)."""
    sw = 1.0 / yerr
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    p = np.clip(np.asarray(p0, dtype=float), lo, hi)
    r = (value(x, p) - y) * sw
    cost = float(r @ r)
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, MAX_ITERATIONS + 1):
        jac = jacobian(x, p) * sw[:, None]
        a = jac.T @ jac
        g = jac.T @ r
        d = np.diag(a).copy()
        d[d <= 0] = 1.0
        accepted = False
        for _ in range(60):
            try:
                step = np.linalg.solve(a + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_new = np.clip(p + step, lo, hi)
            r_new = (value(x, p_new) - y) * sw
            cost_new = float(r_new @ r_new)
            if cost_new <= cost * (1.0 + 1e-14):
                rel = float(np.max(np.abs(p_new - p) / np.maximum(np.abs(p), 1e-300)))
                p, r, cost = p_new, r_new, cost_new
                lam = max(lam / 3.0, 1e-14)
                accepted = True
                if rel < REL_STEP_TOL:
                    converged = True
                break
            lam *= 4.0
        if not accepted:
            # Damping exhausted without improvement: stationary point.
            converged = True
            break
        if converged:
            break
    jac = jacobian(x, p) * sw[:, None]
    try:
        cov = np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(jac.T @ jac)
    return p, cov, cost, converged, it


def _stderrs(cov: np.ndarray) -> np.ndarray:
    return np.sqrt(np.clip(np.diag(cov), 0.0, None))


# ----------------------------------------------------------------------
# power-law fidelity decay


def _power_value(x, p):
    f0, eps = p
    return f0 * np.power(1.0 - eps, x)

def _power_jacobian(x, p):
    f0, eps = p
    base = np.power(1.0 - eps, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        dmid = np.where(x > 0, np.power(1.0 - eps, x - 1.0), 0.0)
    return np.column_stack([base, -f0 * x * dmid])


def fit_power_decay(n, fbar, stderr=None) -> FitResult:
    """Fit F = F0 (1 - eps)^N to MUB-averaged fidelity versus round count."""
    x, y, yerr = _as_points(n, fbar, stderr)
    if x.size < 3 or np.unique(x).size != x.size:
        raise ValueError("need at least 3 points with distinct sweep values")
    ypos = np.clip(y, 1e-12, None)
    slope, logf0 = np.polyfit(x, np.log(ypos), 1, w=1.0 / yerr)
    p0 = (min(max(math.exp(logf0), 1e-6), 1.05), min(max(-math.expm1(slope), 0.0), 0.5))
    p, cov, rss, ok, it = _gauss_newton(
        _power_value, _power_jacobian, x, y, yerr, p0, lo=(0.0, 0.0), hi=(1.05, 1.0 - 1e-12)
    )
    se = _stderrs(cov)
    return FitResult(
        model="power_decay",
        params={"F0": p[0], "eps": p[1]},
        stderrs={"F0": se[0], "eps": se[1]},
        residual_rss=rss,
        converged=ok,
        iterations=it,
    )


# ----------------------------------------------------------------------
# exponential coherence decay (internally rate = 1/Tc, so "no decay" is rate -> 0)


def _exp_value(x, p):
    f0, rate = p
    return f0 * np.exp(-rate * x)

def _exp_jacobian(x, p):
    f0, rate = p
    e = np.exp(-rate * x)
    return np.column_stack([e, -f0 * x * e])


def fit_exp_decay(t, fbar, stderr=None) -> FitResult:
    """Fit F = F0 exp(-t / Tc); Tc is reported, the fit runs on rate = 1/Tc."""
    x, y, yerr = _as_points(t, fbar, stderr)
    if x.size < 3 or np.unique(x).size != x.size:
        raise ValueError("need at least 3 points with distinct sweep values")
    ypos = np.clip(y, 1e-12, None)
    slope, logf0 = np.polyfit(x, np.log(ypos), 1, w=1.0 / yerr)
    p0 = (min(max(math.exp(logf0), 1e-6), 1.05), max(-slope, 0.0))
    p, cov, rss, ok, it = _gauss_newton(
        _exp_value, _exp_jacobian, x, y, yerr, p0, lo=(0.0, 0.0), hi=(1.05, np.inf)
    )
    se = _stderrs(cov)
    f0, rate = p
    # No measurable decay over the sampled span: report the infinity sentinel.
    if rate * (x.max() - x.min()) < 1e-12:
        rate = 0.0
    tc = math.inf if rate == 0.0 else 1.0 / rate
    tc_err = math.inf if rate == 0.0 else se[1] / rate**2
    return FitResult(
        model="exp_decay",
        params={"F0": f0, "Tc": tc},
        stderrs={"F0": se[0], "Tc": tc_err},
        residual_rss=rss,
        converged=ok,
        iterations=it,
        extras={"rate": rate, "rate_stderr": se[1]},
    )


# ----------------------------------------------------------------------
# randomized benchmarking decay


def _rb_value(x, p):
    a, b, pd = p
    return a * np.power(pd, x) + b

def _rb_jacobian(x, p):
    a, b, pd = p
    base = np.power(pd, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        dmid = np.where(x > 0, np.power(pd, x - 1.0), 0.0)
    return np.column_stack([base, np.ones_like(x), a * x * dmid])


def fit_rb(m, survival, stderr=None, fix_offset: float | None = None) -> FitResult:
    """Fit survival = A p^m + B; reports average gate fidelity (1 + p) / 2.

    `fix_offset` pins B (e.g. at 0.5, the depolarized asymptote) and fits
    only A and p.
    """
    x, y, yerr = _as_points(m, survival, stderr)
    if x.size < 3 or np.unique(x).size != x.size:
        raise ValueError("need at least 3 points with distinct sweep values")
    b0 = 0.5 if fix_offset is None else float(fix_offset)
    resid = np.clip(y - b0, 1e-12, None)
    slope, loga = np.polyfit(x, np.log(resid), 1, w=1.0 / yerr)
    a0 = min(max(math.exp(loga), 1e-6), 1.05)
    pd0 = min(max(math.exp(slope), 1e-6), 1.0)
    if fix_offset is None:
        p, cov, rss, ok, it = _gauss_newton(
            _rb_value, _rb_jacobian, x, y, yerr, (a0, b0, pd0), lo=(0.0, 0.0, 0.0), hi=(1.05, 1.0, 1.0)
        )
        se = _stderrs(cov)
        a, b, pd = p
        se_a, se_b, se_p = se
    else:
        def value(x_, q):
            return _rb_value(x_, (q[0], b0, q[1]))
        def jacobian(x_, q):
            j = _rb_jacobian(x_, (q[0], b0, q[1]))
            return j[:, [0, 2]]
        p, cov, rss, ok, it = _gauss_newton(value, jacobian, x, y, yerr, (a0, pd0), lo=(0.0, 0.0), hi=(1.05, 1.0))
        se = _stderrs(cov)
        a, b, pd = p[0], b0, p[1]
        se_a, se_b, se_p = se[0], 0.0, se[1]
    return FitResult(
        model="rb_decay",
        params={"A": a, "B": b, "p": pd, "avg_gate_fidelity": (1.0 + pd) / 2.0},
        stderrs={"A": se_a, "B": se_b, "p": se_p, "avg_gate_fidelity": se_p / 2.0},
        residual_rss=rss,
        converged=ok,
        iterations=it,
    )


# ----------------------------------------------------------------------
# thermal carrier Rabi signal


def _thermal_value(t, p, modes: ModeSet):
    omega0, temp = p
    return np.asarray(thermal_carrier_signal(t, omega0, ThermalState(temperature=temp), modes))


def _thermal_jacobian(t, p, modes: ModeSet):
    omega0, temp = p
    eta2 = np.array(modes.etas) ** 2
    omegas = np.array(modes.omegas)
    xs = HBAR * omegas / (KB * temp)
    nb = 1.0 / np.expm1(xs)
    dnb_dT = xs * nb * (nb + 1.0) / temp
    a = 1.0 - eta2.sum() / 2.0
    f = np.exp(1j * omega0 * t * a)
    dlog_domega = 1j * t * a
    dlog_dT = np.zeros_like(t, dtype=np.complex128)
    for nb_i, dnb_i, e2 in zip(nb, dnb_dT, eta2):
        ph = np.exp(-1j * e2 * omega0 * t)
        d = nb_i + 1.0 - nb_i * ph
        f = f / d
        dd_domega = 1j * nb_i * e2 * t * ph
        dd_dT = (1.0 - ph) * dnb_i
        dlog_domega = dlog_domega - dd_domega / d
        dlog_dT = dlog_dT - dd_dT / d
    return np.column_stack([(f * dlog_domega).real / 2.0, (f * dlog_dT).real / 2.0])


def dominant_frequency(t, y) -> float:
    """Angular frequency of the dominant oscillation, from the discrete spectrum."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 8:
        raise ValueError("too few samples for a spectral estimate")
    dt = np.median(np.diff(t))
    amp = np.abs(np.fft.rfft(y - y.mean()))
    freqs = np.fft.rfftfreq(t.size, d=dt)
    k = int(np.argmax(amp[1:])) + 1
    return float(2.0 * np.pi * freqs[k])


def fit_thermal_rabi(t, p_signal, stderr=None, modes: ModeSet | None = None, t_grid=None) -> FitResult:
    """Fit (Omega0, T) to a thermally damped carrier Rabi trace.

    The starting Rabi frequency comes from the dominant spectral peak and
    the fit multi-starts over a log-spaced temperature grid to escape the
    local minima created by the envelope/frequency coupling.  Traces
    covering fewer than 2 oscillation periods are rejected as
    non-identifiable.
    """
    if modes is None:
        raise ValueError("modes required")
    x, y, yerr = _as_points(t, p_signal, stderr)
    if x.size < 8:
        raise ValueError("need at least 8 points")
    omega_guess = dominant_frequency(x, y)
    span = x.max() - x.min()
    periods = span * omega_guess / (2.0 * np.pi)
    if periods < 2.0:
        raise ValueError(
            f"non-identifiable trace: {periods:.2f} oscillation periods covered, need >= 2 "
            f"(spectral peak at {omega_guess / 2 / np.pi:.3g} Hz over a {span:.3g} s span)"
        )
    grid = THERMAL_T_GRID if t_grid is None else tuple(t_grid)
    value = lambda x_, p: _thermal_value(x_, p, modes)
    jacobian = lambda x_, p: _thermal_jacobian(x_, p, modes)
    best = None
    for t0 in grid:
        # The spectral estimate pins Omega0 to within a bin; a factor-4 box
        # around it keeps the optimizer off the Omega0 <= 0 boundary.
        p, cov, rss, ok, it = _gauss_newton(
            value, jacobian, x, y, yerr,
            (omega_guess, t0),
            lo=(omega_guess / 4.0, THERMAL_T_MIN),
            hi=(omega_guess * 4.0, THERMAL_T_MAX),
        )
        cand = (rss, p[1], p, cov, ok, it)
        if best is None or cand[0] < best[0] * (1.0 - 1e-12):
            best = cand
        elif abs(cand[0] - best[0]) <= 1e-12 * max(best[0], 1.0) and cand[1] < best[1]:
            # Equal-residual tie goes to the lower temperature.
            best = cand
    rss, _, p, cov, ok, it = best
    se = _stderrs(cov)
    return FitResult(
        model="thermal_rabi",
        params={"Omega0": p[0], "T": p[1]},
        stderrs={"Omega0": se[0], "T": se[1]},
        residual_rss=rss,
        converged=ok,
        iterations=it,
    )


def average_fidelity_mub(per_state) -> float:
    """Arithmetic mean of the six mutually-unbiased-basis fidelities."""
    vals = np.asarray(per_state, dtype=float).ravel()
    if vals.size != 6:
        raise ValueError("expected exactly 6 per-state fidelities")
    return float(vals.mean())
