import math

import numpy as np
from scipy import integrate, stats

from aircov.rss_dist import component_pdfs, rss_moments


def convolve_components(s, r, dep, p_los=None):
    """Density of S_l + S_n by direct numerical convolution of the two components."""
    c = component_pdfs(np.array([0.0]), r, dep, p_los=p_los)
    s = np.asarray(s, dtype=float)
    if c.los_degenerate:
        return component_pdfs(s - c.los_mean, r, dep, p_los=p_los).nlos
    if c.nlos_degenerate:
        return component_pdfs(s - c.nlos_mean, r, dep, p_los=p_los).los

    def f_l(t):
        return component_pdfs(np.array([t]), r, dep, p_los=p_los).los[0]

    mom = rss_moments(r, dep, p_los=p_los)
    lo, hi = c.los_mean - 12 * mom.sigma_sl, c.los_mean + 12 * mom.sigma_sl

    def integrand(t):
        return f_l(t) * component_pdfs(s - t, r, dep, p_los=p_los).nlos

    val, _ = integrate.quad_vec(integrand, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=400)
    return val


def chi2_pvalue(counts, cdf_edges):
    """Goodness-of-fit p-value for binned counts against expected bin probabilities.

    ``cdf_edges`` is the model CDF at the bin edges; mass outside the edges
    forms two tail cells. Cells with expectation below 5 are pooled.
    """
    counts = np.asarray(counts, dtype=float)
    n_in = counts.sum()
    probs = np.diff(cdf_edges)
    mass = cdf_edges[-1] - cdf_edges[0]
    expected = n_in * probs / mass
    obs, exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(counts, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            obs.append(acc_o)
            exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        obs[-1] += acc_o
        exp[-1] += acc_e
    obs, exp = np.array(obs), np.array(exp)
    stat = np.sum((obs - exp) ** 2 / exp)
    return float(stats.chi2.sf(stat, obs.size - 1))


def gain_ref(b, h, r):
    return 10 * math.log10(29000 / b**2) - 12 * (math.degrees(math.atan(r / h)) / b) ** 2


def bisect_crossover(b1, b2, r, lo=1.0, hi=1e6, tol=1e-6):
    """Root of the gain difference in h, by plain bisection."""
    f = lambda h: gain_ref(b1, h, r) - gain_ref(b2, h, r)
    flo = f(lo)
    assert flo * f(hi) < 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
