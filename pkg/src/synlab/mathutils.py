"""Normal-distribution helpers shared by the device model and the RNG layer.

Both routines accept a float or a numpy array and return the matching kind.
They sit inside the Monte Carlo hot loops, so they are plain numpy
arithmetic with no Python-level iteration and no iterative integration.
"""

from __future__ import annotations

import numpy as np

_SQRT2 = float(np.sqrt(2.0))


def erfc_approx(x):
    """Complementary error function via the Chebyshev fit of Numerical
    Recipes sec. 6.2 (fractional error below 1.2e-7 everywhere)."""
    x = np.asarray(x, dtype=float)
    z = np.abs(x)
    t = 1.0 / (1.0 + 0.5 * z)
    r = t * np.exp(
        -z * z - 1.26551223
        + t * (1.00002368
        + t * (0.37409196
        + t * (0.09678418
        + t * (-0.18628806
        + t * (0.27886807
        + t * (-1.13520398
        + t * (1.48851587
        + t * (-0.82215223
        + t * 0.17087277)))))))))
    out = np.where(x >= 0.0, r, 2.0 - r)
    return float(out) if out.ndim == 0 else out


def normal_cdf(x):
    """Standard normal CDF.

    Absolute error stays below 1e-7 (half the erfc bound) and the relative
    error in the tails tracks the erfc fit, so small tail probabilities keep
    their leading digits.  Monotone non-decreasing over the float grid.
    """
    x = np.asarray(x, dtype=float)
    out = 0.5 * erfc_approx(-x / _SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def normal_quantile(p):
    """Inverse standard normal CDF (Wichura's PPND16 rational fits, AS 241).

    Absolute error is below 1e-9 for p in [1e-15, 1 - 1e-15]; p <= 0 maps to
    -inf and p >= 1 to +inf.
    """
    p_in = np.asarray(p, dtype=float)
    p_arr = np.atleast_1d(p_in).astype(float)
    out = np.empty_like(p_arr)

    q = p_arr - 0.5
    central = np.abs(q) <= 0.425
    if central.any():
        r = 0.180625 - q[central] * q[central]
        num = (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r
            + 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r
            + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r
            + 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0)
        den = (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r
            + 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r
            + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r
            + 4.2313330701600911252e+1) * r + 1.0)
        out[central] = q[central] * num / den

    tails = ~central
    if tails.any():
        pt = p_arr[tails]
        x = np.full_like(pt, np.nan)
        lower = pt < 0.5
        pr = np.where(lower, pt, 1.0 - pt)
        finite = pr > 0.0
        with np.errstate(divide="ignore"):
            r = np.sqrt(-np.log(np.where(finite, pr, 1.0)))
        mid = finite & (r <= 5.0)
        far = finite & (r > 5.0)

        rm = r[mid] - 1.6
        num = (((((((7.74545014278341407640e-4 * rm + 2.27238449892691845833e-2) * rm
            + 2.41780725177450611770e-1) * rm + 1.27045825245236838258e+0) * rm
            + 3.64784832476320460504e+0) * rm + 5.76949722146069140550e+0) * rm
            + 4.63033784615654529590e+0) * rm + 1.42343711074968357734e+0)
        den = (((((((1.05075007164441684324e-9 * rm + 5.47593808499534494600e-4) * rm
            + 1.51986665636164571966e-2) * rm + 1.48103976427480074590e-1) * rm
            + 6.89767334985100004550e-1) * rm + 1.67638483018380384940e+0) * rm
            + 2.05319162663775882187e+0) * rm + 1.0)
        x[mid] = num / den

        rf = r[far] - 5.0
        num = (((((((2.01033439929228813265e-7 * rf + 2.71155556874348757815e-5) * rf
            + 1.24266094738807843860e-3) * rf + 2.65321895265761230930e-2) * rf
            + 2.96560571828504891230e-1) * rf + 1.78482653991729133580e+0) * rf
            + 5.46378491116411436990e+0) * rf + 6.65790464350110377720e+0)
        den = (((((((2.04426310338993978564e-15 * rf + 1.42151175831644588870e-7) * rf
            + 1.84631831751005468180e-5) * rf + 7.86869131145613259100e-4) * rf
            + 1.48753612908506148525e-2) * rf + 1.36929880922735805310e-1) * rf
            + 5.99832206555887937690e-1) * rf + 1.0)
        x[far] = num / den

        x[~finite] = np.inf
        out[tails] = np.where(lower, -x, x)

    out[p_arr >= 1.0] = np.inf
    out[p_arr <= 0.0] = -np.inf
    out[np.isnan(p_arr)] = np.nan
    return float(out[0]) if np.ndim(p_in) == 0 else out.reshape(np.shape(p_in))
