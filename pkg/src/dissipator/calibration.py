"""Least-squares parameter extraction for ringdowns, lines and avoided crossings.

All fitters share one damped Gauss-Newton (Levenberg-Marquardt) core with
central-difference Jacobians.  Degenerate data produce a flagged
:class:`FitResult` instead of an exception so sweeps keep going.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .model import flux_curve

MAX_ITER = 200
XTOL = 1e-10
GTOL = 1e-8
GTOL_CONVERGED = 1e-6
LAMBDA0 = 1e-3
LAMBDA_MAX = 1e16

DEGENERATE = "degenerate"
NEGATIVE_RATE = "negative_rate"
NO_ANTICROSSING = "no_anticrossing"
NOT_CONVERGED = "not_converged"


class FitError(ValueError):
    pass


@dataclass
class FitResult:
    names: tuple
    values: np.ndarray
    uncertainties: np.ndarray
    residual_norm: float
    r_squared: float
    converged: bool
    iterations: int
    gradient_norm: float = 0.0
    covariance: np.ndarray = None
    flags: set = field(default_factory=set)

    def __getitem__(self, name):
        return float(self.values[self.names.index(name)])

    def error(self, name):
        return float(self.uncertainties[self.names.index(name)])

    def as_dict(self):
        out = {n: float(v) for n, v in zip(self.names, self.values)}
        out.update({f"{n}_err": float(e) for n, e in zip(self.names, self.uncertainties)})
        out.update(residual_norm=self.residual_norm, r_squared=self.r_squared, converged=self.converged,
                   iterations=self.iterations, flags=sorted(self.flags))
        return out

    @property
    def degenerate(self):
        return DEGENERATE in self.flags


def numerical_jacobian(fun, p):
    """Central differences with step ``max(1e-7 |p_i|, 1e-9)``."""
    p = np.asarray(p, dtype=float)
    cols = []
    for i in range(p.size):
        h = max(1e-7 * abs(p[i]), 1e-9)
        up, dn = p.copy(), p.copy()
        up[i] += h
        dn[i] -= h
        cols.append((fun(up) - fun(dn)) / (2 * h))
    return np.column_stack(cols)


def _scaled_gradient(J, r):
    rn = np.linalg.norm(r)
    if rn == 0:
        return 0.0
    cn = np.linalg.norm(J, axis=0)
    cn[cn == 0] = 1.0
    return float(np.max(np.abs(J.T @ r) / (cn * rn)))


def least_squares(residuals, p0, names, y=None, max_iter=MAX_ITER, xtol=XTOL, gtol=GTOL):
    """Minimise ``sum(residuals(p)**2)`` by damped Gauss-Newton.

    The damping ``lambda`` scales the diagonal of ``J^T J``; it grows by 10
    after a rejected step and shrinks by 10 after an accepted one.  Stops
    when the relative parameter change drops below ``xtol``, the scaled
    gradient (cosine between residual and Jacobian columns) below ``gtol``,
    or after ``max_iter`` iterations.  ``converged`` is decided afterwards
    from the final gradient ``|J^T r|``, normalised by the column norms and
    the data norm, which must be below ``GTOL_CONVERGED``.

    ``y`` (the data) sets that scale and the R^2 statistic.
    """
    p = np.asarray(p0, dtype=float).copy()
    r = residuals(p)
    cost = float(r @ r)
    lam = LAMBDA0
    it = 0
    stalled = False
    for it in range(1, max_iter + 1):
        J = numerical_jacobian(residuals, p)
        g = J.T @ r
        if _scaled_gradient(J, r) <= gtol or cost == 0.0:
            break
        A = J.T @ J
        diag = np.diag(A).copy()
        diag[diag == 0] = 1.0
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                step = np.full_like(p, np.nan)
            p_new = p + step
            r_new = residuals(p_new)
            cost_new = float(r_new @ r_new) if np.all(np.isfinite(r_new)) else math.inf
            if cost_new <= cost:
                break
            lam *= 10.0
            if lam > LAMBDA_MAX:
                stalled = True
                break
        if stalled:
            break
        p, r, cost = p_new, r_new, cost_new
        lam = max(lam / 10.0, 1e-15)
        if np.linalg.norm(step) <= xtol * (np.linalg.norm(p) + xtol):
            break

    J = numerical_jacobian(residuals, p)
    # gradient relative to the data scale, so an exact fit reads as zero
    yscale = float(np.linalg.norm(y)) if y is not None else 0.0
    yscale = max(yscale, float(np.linalg.norm(r)), 1e-300)
    cn = np.linalg.norm(J, axis=0)
    cn[cn == 0] = 1.0
    grad = float(np.max(np.abs(J.T @ r) / (cn * yscale)))
    n, k = r.size, p.size
    dof = max(n - k, 1)
    s2 = cost / dof
    try:
        cov = np.linalg.pinv(J.T @ J) * s2
        err = np.sqrt(np.clip(np.diag(cov), 0, None))
    except np.linalg.LinAlgError:
        cov = None
        err = np.full(k, np.inf)
    if y is not None:
        y = np.asarray(y, dtype=float).ravel()
        tss = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - cost / tss if tss > 0 else float("nan")
    else:
        r2 = float("nan")
    converged = bool(grad <= GTOL_CONVERGED)
    flags = set() if converged else {NOT_CONVERGED}
    return FitResult(tuple(names), p, err, math.sqrt(cost), r2, converged, it, grad, cov, flags)


def _check_xy(x, y, minimum, what):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise FitError(f"{what}: x and y lengths differ ({x.size} vs {y.size})")
    if x.size < minimum:
        raise FitError(f"{what}: need at least {minimum} points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError(f"{what}: data contain non-finite values")
    return x, y


def _is_flat(y):
    return np.ptp(y) <= 1e-12 * max(1.0, float(np.max(np.abs(y))))


def _degenerate_result(names, values, y):
    return FitResult(tuple(names), np.asarray(values, dtype=float), np.full(len(names), np.inf),
                     float(np.linalg.norm(y - np.mean(y))), float("nan"), True, 0, 0.0, None, {DEGENERATE})


# -- exponential -------------------------------------------------------------

def exponential(t, amplitude, rate, offset):
    return amplitude * np.exp(-rate * t) + offset


def exponential_guess(t, y):
    """Log-linear regression on baseline-subtracted data."""
    sign = 1.0 if y[0] >= y[-1] else -1.0
    z = sign * y
    span = np.ptp(z)
    baseline = z.min() - 1e-3 * span
    w = z - baseline
    mask = w > 1e-2 * span
    if mask.sum() < 2:
        mask = w > 0
    slope, intercept = np.polyfit(t[mask] - t[0], np.log(w[mask]), 1, w=np.sqrt(w[mask]))
    rate = max(-slope, 1e-12)
    amplitude = sign * math.exp(intercept) * math.exp(rate * t[0])
    return np.array([amplitude, rate, sign * baseline])


def _growth_guess(t, y):
    sign = 1.0 if abs(y[-1]) >= abs(y[0]) else -1.0
    z = sign * y
    w = z - z.min() + 1e-3 * np.ptp(z)
    slope, intercept = np.polyfit(t - t[0], np.log(w), 1)
    return np.array([sign * math.exp(intercept - slope * t[0]), -abs(slope), sign * (z.min() - 1e-3 * np.ptp(z))])


def fit_exponential(t, y, p0=None):
    """Fit ``A exp(-rate t) + offset``.

    Returns a :class:`FitResult` with parameters ``amplitude, rate, offset``.
    Constant data come back flagged ``degenerate``; an optimum with negative
    rate is flagged ``negative_rate``.
    """
    t, y = _check_xy(t, y, 5, "fit_exponential")
    if np.any(np.diff(t) <= 0):
        raise FitError("fit_exponential: t must be strictly increasing")
    names = ("amplitude", "rate", "offset")
    if _is_flat(y):
        return _degenerate_result(names, [0.0, 0.0, float(np.mean(y))], y)
    fun = lambda p: exponential(t, *p) - y
    if p0 is not None:
        res = least_squares(fun, np.asarray(p0, dtype=float), names, y)
    else:
        res = least_squares(fun, exponential_guess(t, y), names, y)
        if not res.converged:
            # a growing exponential sits outside the decaying guess's basin
            alt = least_squares(fun, _growth_guess(t, y), names, y)
            if alt.residual_norm < res.residual_norm:
                res = alt
    if res["rate"] < 0:
        res.flags.add(NEGATIVE_RATE)
    return res


# -- Lorentzian --------------------------------------------------------------

def lorentzian(f, center, fwhm, height, floor):
    return floor + height / (1.0 + (2.0 * (f - center) / fwhm) ** 2)


def fit_lorentzian(f, power, p0=None):
    """Single Lorentzian line; ``fwhm`` maps directly to the mode linewidth.

    Two overlapping lines still converge to a compromise single line with a
    lowered R^2; interpreting that is left to the caller.
    """
    f, y = _check_xy(f, power, 7, "fit_lorentzian")
    names = ("center", "fwhm", "height", "floor")
    if _is_flat(y):
        return _degenerate_result(names, [float(np.mean(f)), 0.0, 0.0, float(np.mean(y))], y)
    if p0 is None:
        floor = float(np.median(np.concatenate([y[: max(1, y.size // 10)], y[-max(1, y.size // 10):]])))
        i = int(np.argmax(np.abs(y - floor)))
        height = float(y[i] - floor)
        half = np.abs(y - floor) >= 0.5 * abs(height)
        width = float(np.ptp(f[half])) if half.sum() > 1 else float(np.ptp(f)) / 10
        width = max(width, float(np.min(np.abs(np.diff(f)))))
        p0 = np.array([f[i], width, height, floor])
    res = least_squares(lambda p: lorentzian(f, *p) - y, p0, names, y)
    res.values[1] = abs(res.values[1])
    return res


# -- avoided crossing --------------------------------------------------------

def _flux_model(flux_curve_params):
    if callable(flux_curve_params):
        return flux_curve_params
    fp = dict(flux_curve_params)
    offset = fp.pop("offset", 0.0)
    return lambda phi: flux_curve(phi, fp["omega_max"], fp["alpha"], fp["d"]) + offset


def anticrossing_branches(omega_1, omega_2, g):
    """Lower and upper eigenvalues of ``[[omega_1, g], [g, omega_2]]``."""
    mean = 0.5 * (omega_1 + omega_2)
    half = np.sqrt(0.25 * (omega_1 - omega_2) ** 2 + g * g)
    return mean - half, mean + half


def fit_avoided_crossing(phi, branch_freqs, flux_curve_params, p0=None):
    """Fit a tunable mode crossing a fixed one.

    ``branch_freqs`` is an ``(N, 2)`` array of the two eigenbranches at each
    flux point.  The tunable mode follows ``flux_curve_params`` (a callable
    ``phi -> omega`` or a dict with ``omega_max, alpha, d`` and optional
    ``offset``); the fit returns the coupling ``g`` (half the minimum gap) and
    the fixed mode frequency ``omega_bare``.  A coupling consistent with zero
    is flagged ``no_anticrossing``.
    """
    phi = np.asarray(phi, dtype=float).ravel()
    br = np.sort(np.asarray(branch_freqs, dtype=float), axis=1)
    if br.shape != (phi.size, 2):
        raise FitError(f"branch_freqs must have shape ({phi.size}, 2), got {br.shape}")
    if phi.size < 3:
        raise FitError("fit_avoided_crossing: need at least 3 flux points")
    tunable = _flux_model(flux_curve_params)
    w1 = np.asarray(tunable(phi), dtype=float)
    names = ("g", "omega_bare")
    y = br.T.ravel()
    if p0 is None:
        gap = br[:, 1] - br[:, 0]
        i = int(np.argmin(gap))
        omega_bare = float(np.median(np.where(np.abs(br[:, 0] - w1) > np.abs(br[:, 1] - w1), br[:, 0], br[:, 1])))
        p0 = np.array([0.5 * gap[i], omega_bare])

    def residuals(p):
        lo, hi = anticrossing_branches(w1, p[1], p[0])
        return np.concatenate([lo, hi]) - y

    res = least_squares(residuals, p0, names, y)
    res.values[0] = abs(res.values[0])
    g, g_err = res.values[0], res.uncertainties[0]
    scale = max(abs(res.values[1]), 1.0)
    if g <= max(2.0 * g_err, 1e-6 * scale):
        res.flags.add(NO_ANTICROSSING)
    return res


# -- flux tuning curve -------------------------------------------------------

def fit_flux_curve(crossing_points, alpha=None, p0=None):
    """Fit ``omega_max`` and junction asymmetry ``d`` to (phi, omega) points.

    ``alpha`` pins the anharmonicity (the usual case, since crossings barely
    constrain it); pass ``None`` to fit it as a third parameter.  The
    asymmetry enters the model squared, so it is fitted as ``d^2`` and
    reported as ``d``.
    """
    pts = np.asarray(crossing_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise FitError("crossing_points must be a sequence of (phi, omega) pairs")
    phi, w = pts[:, 0], pts[:, 1]
    n_free = 2 if alpha is not None else 3
    if phi.size < max(n_free, 3 if alpha is None else n_free):
        raise FitError(f"fit_flux_curve: {phi.size} points cannot determine {n_free} parameters")
    if phi.size < 3 and alpha is None:
        raise FitError("fit_flux_curve: need at least 3 points")
    if p0 is None:
        alpha0 = alpha if alpha is not None else -0.03 * float(np.max(w))
        i = int(np.argmin(np.abs(phi - np.round(phi))))
        c = abs(math.cos(math.pi * phi[i]))
        wmax0 = float((w[i] - alpha0) / max(c, 0.3) ** 0.5 + alpha0)
        p0 = [wmax0, 0.01] + ([] if alpha is not None else [alpha0])

    def model(p):
        d2 = p[1]
        a = alpha if alpha is not None else p[2]
        u = np.cos(np.pi * phi) ** 2 + d2 * np.sin(np.pi * phi) ** 2
        return (p[0] - a) * np.abs(u) ** 0.25 + a

    names = ("omega_max", "d2") + (() if alpha is not None else ("alpha",))
    res = least_squares(lambda p: model(p) - w, np.asarray(p0, dtype=float), names, w)
    d2, d2_err = res.values[1], res.uncertainties[1]
    d = math.sqrt(abs(d2))
    d_err = d2_err / (2 * d) if d > 0 else math.sqrt(d2_err)
    res.names = ("omega_max", "d") + res.names[2:]
    res.values = np.array([res.values[0], d] + list(res.values[2:]))
    res.uncertainties = np.array([res.uncertainties[0], d_err] + list(res.uncertainties[2:]))
    return res


# -- dispersive coupling -----------------------------------------------------

def infer_coupling_from_chi(chi, omega_q, omega_c, alpha_q, full_shift=True, signed=False):
    """Qubit-cavity coupling from the dispersive shift of a transmon.

    Uses ``chi_half = g^2 alpha / (Delta (Delta + alpha))`` with
    ``Delta = omega_q - omega_c``.  With ``full_shift`` (default) ``chi`` is
    the full cavity pull between qubit ground and excited states, i.e.
    ``2 chi_half``.  Unless ``signed`` is set only magnitudes are used, since
    shifts are usually quoted unsigned; a signed ``chi`` whose sign
    contradicts the detuning regime raises ``ValueError``.
    """
    delta = omega_q - omega_c
    denom = delta * (delta + alpha_q)
    if denom == 0 or alpha_q == 0:
        raise ValueError("Delta (Delta + alpha) and alpha must be non-zero")
    chi_half = 0.5 * chi if full_shift else chi
    g2 = chi_half * denom / alpha_q
    if signed:
        if g2 < 0:
            raise ValueError("sign of chi is inconsistent with the qubit-cavity detuning regime")
    else:
        g2 = abs(g2)
    return math.sqrt(g2)
