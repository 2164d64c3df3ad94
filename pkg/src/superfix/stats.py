"""Binomial confidence intervals for fixation-rate estimates.

Uses the Agresti-Coull adjusted-Wald interval, which behaves well for the
extreme success rates that show up at large fitness advantage (p close to 1
with small samples).  The normal quantile comes from Wichura's rational
approximation, accurate to well below 1e-9 over the open unit interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    point: float
    confidence: float
    method: str = "agresti-coull"

    def contains(self, p: float) -> bool:
        return self.lo <= p <= self.hi

    def overlaps(self, other: "ConfidenceInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


# Coefficients of Wichura's algorithm AS 241 (PPND16).
_A = (3.3871328727963666080, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4, 5.2264952788528545610e3)
_C = (1.42343711074968357734, 4.63033784615654529590, 5.76949722146069140550,
      3.64784832476320460504, 1.27045825245236838258, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187, 1.67638483018380384940,
      6.89767334985100004550e-1, 1.48103976427480074590e-1,
      1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720, 5.46378491116411436990, 1.78482653991729133580,
      2.96560571828504891230e-1, 2.65321895265761230930e-2,
      1.24266094738807843860e-3, 2.71155556874348757815e-5,
      2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4,
      1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coeffs: tuple[float, ...], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def normal_quantile(p: float) -> float:
    """Inverse of the standard normal CDF for p in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile argument must lie in (0, 1), got {p}")
    q = p - 0.5
    if abs(q) <= 0.425:
        s = 0.180625 - q * q
        return q * _poly(_A, s) / _poly(_B, s)
    u = p if q < 0 else 1.0 - p
    t = math.sqrt(-math.log(u))
    if t <= 5.0:
        t -= 1.6
        val = _poly(_C, t) / _poly(_D, t)
    else:
        t -= 5.0
        val = _poly(_E, t) / _poly(_F, t)
    return -val if q < 0 else val


def agresti_coull(successes: int, trials: int,
                  confidence: float = 0.995) -> ConfidenceInterval:
    """Adjusted-Wald interval for a binomial proportion.

    Adds z^2/2 pseudo-successes and z^2 pseudo-trials before applying the
    Wald formula; endpoints are clamped to [0, 1].
    """
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    z = normal_quantile(1.0 - (1.0 - confidence) / 2.0)
    n_adj = trials + z * z
    p_adj = (successes + z * z / 2.0) / n_adj
    half = z * math.sqrt(p_adj * (1.0 - p_adj) / n_adj)
    return ConfidenceInterval(
        lo=max(0.0, p_adj - half),
        hi=min(1.0, p_adj + half),
        point=successes / trials,
        confidence=confidence,
    )


def wald_unstable(successes: int, trials: int) -> bool:
    """Flag samples where the plain Wald interval is known to misbehave
    (boundary counts or small samples)."""
    return trials < 40 or successes < 5 or trials - successes < 5
