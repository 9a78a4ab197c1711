"""Uniform means over finite groups, pairing forms, and the compatibility
checks between them.

Everything here averages over the whole group, so free-ball domains are
rejected: without an invariant mean the constructions below have nothing to
average against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import OPERATOR, NormKind
from .groups import FiniteGroup, FreeBall, UnsupportedDomainError
from .maps import (
    GroupMap,
    adj,
    batch_norms,
    constant_identity,
    pd_min_eig,
    sup_norm,
    unit_defect,
    _require_compatible,
)

PRECONDITION_TOL = 1e-10


def _require_finite(domain, what: str) -> FiniteGroup:
    if isinstance(domain, FreeBall):
        raise UnsupportedDomainError(
            f"{what} averages over the whole domain and needs a finite group; "
            "a free-ball domain carries no invariant mean"
        )
    return domain


def mean(phi: GroupMap) -> np.ndarray:
    """Uniform average of the map's values."""
    _require_finite(phi.domain, "uniform mean")
    return phi.values.mean(axis=0)


def mean_invariance_residual(phi: GroupMap) -> float:
    """How far the mean is from left translation invariance.

    Exactly zero in exact arithmetic; measures only summation-order noise.
    """
    g = _require_finite(phi.domain, "translation invariance residual")
    center = phi.values.mean(axis=0)
    shifted = phi.values[g.mul].mean(axis=1)  # shifted[x] = mean_y phi(x y)
    return float(batch_norms(shifted - center).max())


def average_pd(phi: GroupMap) -> GroupMap:
    """The averaged map ``psi(x) = mean_y phi(x y) phi(y)*``.

    For unitary-valued ``phi`` this is the positive definite replacement that
    keeps ``psi(e) = 1`` and stays within the multiplicative defect of
    ``phi``.
    """
    g = _require_finite(phi.domain, "positive definite averaging")
    translated = phi.values[g.mul]  # translated[x, y] = phi(x y)
    psi = np.einsum("xyij,ykj->xik", translated, phi.values.conj()) / g.order
    label = f"avg({phi.label})" if phi.label else "avg"
    return GroupMap(g, phi.dim, psi, label=label)


def form(phi: GroupMap, psi: GroupMap) -> np.ndarray:
    """Sesquilinear pairing ``mean_x phi(x)* psi(x)``, conjugate-linear on the left."""
    _require_finite(phi.domain, "pairing form")
    _require_compatible(phi, psi)
    n = phi.values.shape[0]
    return np.einsum("xji,xjk->ik", phi.values.conj(), psi.values) / n


def translate_coefficient(phi: GroupMap) -> GroupMap:
    """The coefficient map ``m(x) = mean_y phi(x y)* phi(y)``.

    This is the pairing of ``phi`` against its inverse translates.  Under the
    Gram convention of :func:`ulamlab.maps.pd_min_eig` (blocks
    ``m(inv(x_i) x_j)``) its Gram is an exact mean of squares
    ``mean_z M(z)* M(z)`` with block columns ``phi(inv(x_i) z)``, hence PSD
    for every bounded ``phi``.  The direct-translate pairing
    ``mean_y phi(inv(x) y)* phi(y)`` produces the blockwise transpose
    instead, which fails positivity on nonabelian domains.
    """
    g = _require_finite(phi.domain, "translate coefficients")
    translated = phi.values[g.mul]
    m = np.einsum("xyji,yjk->xik", translated.conj(), phi.values) / g.order
    label = f"coeff({phi.label})" if phi.label else "coeff"
    return GroupMap(g, phi.dim, m, label=label)


@dataclass
class ConditionBReport:
    """Checks that the mean and the form cooperate.

    ``form_at_one`` pairs the constant identity map with itself and must be
    the identity; ``bound_ratio`` is the worst ``||<phi, phi>|| / ||phi||^2``
    over the sampled maps; ``pd_min_eigs`` are Gram minima of the translate
    coefficient maps.
    """

    group_label: str
    dim: int
    trials: int
    seed: int
    form_at_one: np.ndarray
    bound_ratio: float
    pd_min_eigs: list[float] = field(default_factory=list)

    IDENTITY_TOL = 1e-12
    RATIO_TOL = 1e-10
    PD_TOL = 1e-9

    @property
    def identity_residual(self) -> float:
        return float(linalg.op_norm(self.form_at_one - np.eye(self.dim)))

    @property
    def passed(self) -> bool:
        return (
            self.identity_residual <= self.IDENTITY_TOL
            and self.bound_ratio <= 1.0 + self.RATIO_TOL
            and all(e >= -self.PD_TOL for e in self.pd_min_eigs)
        )

    def to_dict(self) -> dict:
        return {
            "group": self.group_label,
            "dim": self.dim,
            "trials": self.trials,
            "seed": self.seed,
            "identity_residual": self.identity_residual,
            "bound_ratio": self.bound_ratio,
            "pd_min_eigs": list(self.pd_min_eigs),
            "worst_pd_min_eig": min(self.pd_min_eigs, default=0.0),
            "passed": self.passed,
        }


def condition_b_report(
    group: FiniteGroup, dim: int, trials: int = 20, seed: int = 0
) -> ConditionBReport:
    """Sample random bounded maps and measure the mean/form compatibility."""
    from .generators import random_map  # deferred to keep module load acyclic

    ones = constant_identity(group, dim)
    form_at_one = form(ones, ones)
    ratios = [0.0]
    eigs = []
    for t in range(trials):
        phi = random_map(group, dim, sup=1.0, seed=seed + t)
        norm = sup_norm(phi)
        if norm > 0:
            ratios.append(float(linalg.op_norm(form(phi, phi))) / norm**2)
        eigs.append(pd_min_eig(translate_coefficient(phi)))
    return ConditionBReport(
        group_label=group.label,
        dim=dim,
        trials=trials,
        seed=seed,
        form_at_one=form_at_one,
        bound_ratio=max(ratios),
        pd_min_eigs=eigs,
    )


def condition_c_check(phi: GroupMap, psi: GroupMap) -> float:
    """Residual of the averaging identity that ties ``psi`` to ``phi``.

    Measures ``max_x || phi(x)* psi(x) - mean_y phi(x)* phi(x y) phi(y)* ||``;
    zero exactly when ``psi`` agrees with the averaged map against ``phi``.
    """
    g = _require_finite(phi.domain, "averaging identity residual")
    _require_compatible(phi, psi)
    left = adj(phi.values) @ psi.values
    translated = phi.values[g.mul]
    right = (
        np.einsum("xji,xyjk,ylk->xil", phi.values.conj(), translated, phi.values.conj())
        / g.order
    )
    return float(batch_norms(left - right).max())


@dataclass
class MarginReport:
    """Per-element margins of a bound check; skipped when preconditions fail."""

    name: str
    margins: list[float] = field(default_factory=list)
    skipped: bool = False
    reason: str = ""

    MARGIN_TOL = 1e-10

    @property
    def worst_margin(self) -> float:
        return min(self.margins, default=0.0)

    @property
    def passed(self) -> bool:
        return self.skipped or self.worst_margin >= -self.MARGIN_TOL

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "margins": list(self.margins),
            "worst_margin": self.worst_margin,
            "skipped": self.skipped,
            "reason": self.reason,
            "passed": self.passed,
        }


def closeness_bound_check(phi: GroupMap, psi: GroupMap) -> MarginReport:
    """Check ``||phi(x) - psi(x)|| <= max_y ||phi(x)phi(y) - phi(x y)||``.

    Needs ``phi`` unitary-valued and ``psi`` tied to ``phi`` by the averaging
    identity; when either precondition fails the check reports itself as
    skipped rather than asserting a bound that does not apply.
    """
    g = _require_finite(phi.domain, "closeness bound")
    _require_compatible(phi, psi)
    report = MarginReport(name="closeness")
    delta, _ = unit_defect(phi)
    if delta > PRECONDITION_TOL:
        report.skipped = True
        report.reason = f"unit defect {delta:.3e} exceeds {PRECONDITION_TOL:.0e}"
        return report
    residual = condition_c_check(phi, psi)
    if residual > PRECONDITION_TOL:
        report.skipped = True
        report.reason = f"averaging residual {residual:.3e} exceeds {PRECONDITION_TOL:.0e}"
        return report
    translated = phi.values[g.mul]  # translated[x, y] = phi(x y)
    products = np.einsum("xij,yjk->xyik", phi.values, phi.values)
    per_pair = np.linalg.svd(products - translated, compute_uv=False)[..., 0]
    bounds = per_pair.max(axis=1)
    lefts = batch_norms(phi.values - psi.values)
    report.margins = [float(b - l) for b, l in zip(bounds, lefts)]
    return report


def norm_estimate_check(
    phi: GroupMap, psi: GroupMap, kind: NormKind = OPERATOR
) -> MarginReport:
    """Check ``||phi(x) - psi(x)||_kind <= mean_y ||phi(x y) - phi(x)phi(y)||_kind``.

    The mean-based sharpening of the closeness bound.  Schatten norms must be
    trace normalized here (the bound lives in the normalized-trace setting);
    the unitarity and averaging preconditions match the closeness check.
    """
    g = _require_finite(phi.domain, "norm estimate")
    _require_compatible(phi, psi)
    report = MarginReport(name=f"norm_estimate[{kind.describe()}]")
    if kind.kind == "schatten" and not kind.trace_normalized:
        report.skipped = True
        report.reason = "Schatten norms must be trace normalized for this estimate"
        return report
    delta, _ = unit_defect(phi)
    if delta > PRECONDITION_TOL:
        report.skipped = True
        report.reason = f"unit defect {delta:.3e} exceeds {PRECONDITION_TOL:.0e}"
        return report
    residual = condition_c_check(phi, psi)
    if residual > PRECONDITION_TOL:
        report.skipped = True
        report.reason = f"averaging residual {residual:.3e} exceeds {PRECONDITION_TOL:.0e}"
        return report
    translated = phi.values[g.mul]  # translated[x, y] = phi(x y)
    products = np.einsum("xij,yjk->xyik", phi.values, phi.values)
    per_pair = linalg.gauge(linalg.singular_values(translated - products), kind)
    bounds = np.asarray(per_pair).mean(axis=1)
    lefts = batch_norms(phi.values - psi.values, kind)
    report.margins = [float(b - l) for b, l in zip(bounds, lefts)]
    return report
