"""Named shrinkage rules for the tuning constants (set-estimation slack and
numerical-differentiation step).

A rule maps the sample size T to kappa = T**(-c).  The three preset exponents
are exposed by name; any custom exponent in (0, 1/2) is accepted, which keeps
sqrt(T) * kappa -> infinity as required for the derivative estimators.
"""

from __future__ import annotations

from .validation import ValidationError

KAPPA_RULES: dict[str, float] = {
    "T^-1/4": 0.25,
    "T^-1/3": 1.0 / 3.0,
    "T^-2/5": 0.4,
}


def normalize_rule(rule) -> tuple[str, float]:
    """Return (label, exponent) for a named rule or a bare exponent."""
    if isinstance(rule, str):
        key = rule.replace("{", "").replace("}", "").replace(" ", "")
        if key in KAPPA_RULES:
            return key, KAPPA_RULES[key]
        try:
            exponent = float(key)
        except ValueError:
            raise ValidationError(
                f"unknown kappa rule {rule!r}; use one of {sorted(KAPPA_RULES)} "
                "or an exponent in (0, 1/2)"
            ) from None
    else:
        exponent = float(rule)
    if not 0.0 < exponent < 0.5:
        raise ValidationError(f"kappa exponent must lie in (0, 1/2), got {exponent!r}")
    return f"T^-{exponent:g}", exponent


def kappa_from_rule(rule, t: int) -> float:
    """Evaluate the rule at sample size t."""
    if t < 1:
        raise ValidationError(f"sample size must be >= 1, got {t}")
    _, exponent = normalize_rule(rule)
    return float(t) ** (-exponent)
