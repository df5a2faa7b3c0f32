"""Non-central chi-squared CDF via the Poisson mixture series."""

import math

import numpy as np
from scipy.special import gammainc, gammaln

from ..errors import InvalidParameter

_TAIL = 1e-12


def ncx2_cdf(x, dof, noncentrality):
    """CDF of the non-central chi-squared distribution.

    Evaluates sum_j Poisson(j; lam/2) * CentralChi2CDF(x; dof + 2j),
    truncating the series once the untouched Poisson tail mass is below
    1e-12.  The j-range expands outward from the Poisson mode, so large
    noncentralities stay in the well-conditioned regime.
    """
    if dof <= 0:
        raise InvalidParameter("dof must be > 0")
    if noncentrality < 0:
        raise InvalidParameter("noncentrality must be >= 0")
    if x <= 0:
        return 0.0
    half = noncentrality / 2.0
    if half == 0.0:
        return float(gammainc(dof / 2.0, x / 2.0))
    width = 10.0 * math.sqrt(half) + 20.0
    j_lo = max(0, int(math.floor(half - width)))
    j_hi = int(math.ceil(half + width))
    while True:
        j = np.arange(j_lo, j_hi + 1, dtype=np.float64)
        logw = j * math.log(half) - half - gammaln(j + 1.0)
        w = np.exp(logw)
        if 1.0 - w.sum() < _TAIL or (j_lo == 0 and j_hi > half + 700):
            break
        j_lo = max(0, j_lo - 64)
        j_hi += 64
    terms = gammainc(dof / 2.0 + j, x / 2.0)
    return float(min(max(np.dot(w, terms), 0.0), 1.0))
