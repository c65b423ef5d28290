"""Strictly monotone scalar transforms with first and second derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import math

import numpy as np

from .errors import HypothesisError, TransformDomainError


@dataclass(frozen=True)
class Transform:
    """A scalar transform U with evaluators for U, U' and U''.

    `domain` is the open interval on which the transform is defined; points
    outside it raise TransformDomainError.
    """

    name: str
    u: Callable[[float], float]
    du: Callable[[float], float]
    d2u: Callable[[float], float]
    domain: tuple[float, float] = (-math.inf, math.inf)

    def check_domain(self, t) -> None:
        t = np.asarray(t, dtype=float)
        lo, hi = self.domain
        if np.any(t <= lo) or np.any(t >= hi):
            raise TransformDomainError(
                f"value outside the open domain ({lo}, {hi}) of transform {self.name}")

    def eval(self, t: float) -> tuple[float, float, float]:
        self.check_domain(t)
        return self.u(t), self.du(t), self.d2u(t)


def identity_transform() -> Transform:
    return Transform(name="identity", u=lambda t: t, du=lambda t: 1.0,
                     d2u=lambda t: 0.0)


def negative_sqrt_transform() -> Transform:
    """U(t) = -sqrt(-t) on t < 0; increasing with U'' > 0."""
    return Transform(
        name="neg-sqrt",
        u=lambda t: -math.sqrt(-t),
        du=lambda t: 0.5 * (-t) ** -0.5,
        d2u=lambda t: 0.25 * (-t) ** -1.5,
        domain=(-math.inf, 0.0),
    )


def negative_log_transform() -> Transform:
    """U(t) = -log(-t) on t < 0; increasing with U'' > 0."""
    return Transform(
        name="neg-log",
        u=lambda t: -math.log(-t),
        du=lambda t: -1.0 / t,
        d2u=lambda t: 1.0 / (t * t),
        domain=(-math.inf, 0.0),
    )


def negative_power_transform(p: float) -> Transform:
    """U(t) = -(-t)^((2-p)/4) on t < 0; increasing only for p < 2.

    For p >= 2 the exponent is nonpositive and the transform is no longer
    strictly increasing on (-inf, 0); such p are rejected.
    """
    if not (0.0 < p < 2.0):
        raise HypothesisError(
            f"power transform requires 0 < p < 2; for p = {p} the map "
            "-(-t)^((2-p)/4) is not strictly increasing on (-inf, 0)")
    q = (2.0 - p) / 4.0
    return Transform(
        name=f"neg-power-{p:g}",
        u=lambda t: -((-t) ** q),
        du=lambda t: q * (-t) ** (q - 1.0),
        d2u=lambda t: q * (1.0 - q) * (-t) ** (q - 2.0),
        domain=(-math.inf, 0.0),
    )
