"""Input-validation helpers shared across estimators and the harness."""

from __future__ import annotations

from .errors import ProtocolError


def check_probability(value, what="score") -> float:
    try:
        f = float(value)
    except (TypeError, ValueError):
        raise ProtocolError(f"{what} is not a number: {value!r}") from None
    if not 0.0 <= f <= 1.0:
        raise ProtocolError(f"{what} out of [0, 1]: {f!r}")
    return f


def check_score_vector(scores, expected_len, what="scores") -> list[float]:
    if not isinstance(scores, list):
        raise ProtocolError(f"{what} is not a list")
    if len(scores) != expected_len:
        raise ProtocolError(f"{what} length {len(scores)} != expected {expected_len}")
    return [check_probability(s, what=what) for s in scores]
