"""Independent reference implementations used only to check the package.

These deliberately avoid the code paths they validate: the thermal
carrier signal is summed term by term over Fock states instead of using
the geometric closed form, Haar-average channel fidelity comes from the
Kraus-trace formula, and Jacobians are compared against central finite
differences.
"""
from __future__ import annotations

import numpy as np

from dualion.motion import fock_cutoff


def bruteforce_signal_factorized(t, omega0, nbars, etas, tail=1e-8):
    """Fock-sum carrier signal, truncated per mode, summed term by term.

    Uses the first-order carrier frequency, under which the joint sum
    factorizes exactly into per-mode sums; each per-mode geometric series
    is accumulated numerically rather than in closed form.
    """
    t = np.asarray(t, dtype=float)
    eta2 = np.asarray(etas, dtype=float) ** 2
    f = np.exp(1j * omega0 * t * (1.0 - eta2.sum() / 2.0))
    per_mode_tail = tail / len(nbars)
    for nb, e2 in zip(nbars, eta2):
        nmax = fock_cutoff(nb, per_mode_tail)
        z = np.exp(-1j * e2 * omega0 * t)
        term = np.full_like(z, 1.0 / (nb + 1.0))
        acc = term.copy()
        ratio = nb / (nb + 1.0)
        for _ in range(nmax):
            term = term * (ratio * z)
            acc += term
        f = f * acc
    return (1.0 + f.real) / 2.0


def bruteforce_signal_joint(t, omega0, nbars, etas, tail=1e-9):
    """Carrier signal summed over the explicit joint 4-mode Fock grid.

    Exponential in mode count; only usable for small occupations.
    """
    t = np.asarray(t, dtype=float)
    eta2 = np.asarray(etas, dtype=float) ** 2
    cutoffs = [fock_cutoff(nb, tail) for nb in nbars]
    grids = np.meshgrid(*[np.arange(c + 1) for c in cutoffs], indexing="ij")
    ns = np.stack([g.ravel() for g in grids], axis=1).astype(float)
    logp = np.zeros(ns.shape[0])
    for i, nb in enumerate(nbars):
        if nb == 0.0:
            logp[ns[:, i] > 0] = -np.inf
        else:
            logp += ns[:, i] * np.log(nb) - (ns[:, i] + 1.0) * np.log(nb + 1.0)
    probs = np.exp(logp)
    rabi = omega0 * (1.0 - (ns + 0.5) @ eta2)
    signal = np.empty_like(t)
    for k, tk in enumerate(t):
        signal[k] = np.sum(probs * (1.0 + np.cos(rabi * tk)) / 2.0)
    # Renormalize by the truncated mass so the comparison isolates the sum.
    return signal / probs.sum()


def haar_average_fidelity(kraus) -> float:
    """Haar-average fidelity of a channel: (sum_k |tr K_k|^2 + d) / (d^2 + d)."""
    d = kraus[0].shape[0]
    s = sum(abs(np.trace(k)) ** 2 for k in kraus)
    return float((s + d) / (d * (d + 1)))


def finite_difference_jacobian(fn, x, params, rel_step=1e-6):
    """Central-difference Jacobian of fn(x, params) w.r.t. params.

    Steps are relative to each parameter's magnitude so columns with very
    different scales (rad/s versus kelvin) are differenced accurately.
    """
    params = np.asarray(params, dtype=float)
    cols = []
    for i in range(params.size):
        h = rel_step * abs(params[i]) if params[i] != 0.0 else rel_step
        up = params.copy()
        dn = params.copy()
        up[i] += h
        dn[i] -= h
        cols.append((fn(x, up) - fn(x, dn)) / (2.0 * h))
    return np.column_stack(cols)
