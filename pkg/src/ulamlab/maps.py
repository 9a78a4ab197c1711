"""Matrix-valued maps on group domains and their defect measurements.

A :class:`GroupMap` assigns a ``dim x dim`` complex matrix to every element
of a finite group or free-ball domain.  The measurements quantify how far a
map is from being a multiplicative, unitary-valued representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import OPERATOR, NormKind
from .groups import (
    FiniteGroup,
    FreeBall,
    UnsupportedDomainError,
    inverse_indices,
    n_elements,
    parse_group_spec,
)

GRAM_HERMITIAN_TOL = 1e-8
MAX_GRAM_DIM = 8192
_PAIR_CHUNK = 1 << 22  # complex entries per batch of pair products


class PreconditionError(ValueError):
    """Input violates a documented precondition of the operation."""


def adj(values: np.ndarray) -> np.ndarray:
    """Conjugate transpose of each matrix in a stack."""
    return np.conj(np.swapaxes(values, -1, -2))


@dataclass(eq=False)
class GroupMap:
    domain: FiniteGroup | FreeBall
    dim: int
    values: np.ndarray  # (n_elements, dim, dim) complex
    label: str = ""

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.complex128)
        n = n_elements(self.domain)
        if vals.shape != (n, self.dim, self.dim):
            raise ValueError(
                f"values must have shape ({n}, {self.dim}, {self.dim}), got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("map values must be finite")
        self.values = vals

    @property
    def identity_index(self) -> int:
        return self.domain.identity

    @property
    def restricted(self) -> bool:
        """True when products are only defined on the domain's pair index."""
        return isinstance(self.domain, FreeBall)

    def value(self, x: int) -> np.ndarray:
        return self.values[x]


def constant_identity(domain: FiniteGroup | FreeBall, dim: int) -> GroupMap:
    vals = np.broadcast_to(np.eye(dim, dtype=np.complex128), (n_elements(domain), dim, dim))
    return GroupMap(domain, dim, vals.copy(), label="one")


def same_domain(a: FiniteGroup | FreeBall, b: FiniteGroup | FreeBall) -> bool:
    if a is b:
        return True
    if isinstance(a, FiniteGroup) and isinstance(b, FiniteGroup):
        return a.order == b.order and np.array_equal(a.mul, b.mul)
    if isinstance(a, FreeBall) and isinstance(b, FreeBall):
        return a.rank == b.rank and a.radius == b.radius
    return False


def _require_compatible(phi: GroupMap, psi: GroupMap) -> None:
    if not same_domain(phi.domain, psi.domain):
        raise ValueError("maps live on different domains")
    if phi.dim != psi.dim:
        raise ValueError(f"maps have different dimensions ({phi.dim} vs {psi.dim})")


def _pair_arrays(domain: FiniteGroup | FreeBall) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Indices (x, y, xy) of every defined product."""
    if isinstance(domain, FiniteGroup):
        n = domain.order
        xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        return xs.ravel(), ys.ravel(), domain.mul[xs, ys].ravel()
    items = sorted(domain.pair_index.items())
    xs = np.array([x for (x, _), _ in items], dtype=np.int64)
    ys = np.array([y for (_, y), _ in items], dtype=np.int64)
    ks = np.array([k for _, k in items], dtype=np.int64)
    return xs, ys, ks


def batch_norms(mats: np.ndarray, kind: NormKind = OPERATOR) -> np.ndarray:
    """Norm of each matrix in a stack under ``kind``."""
    return np.atleast_1d(linalg.gauge(linalg.singular_values(mats), kind))


def mult_defect(phi: GroupMap, kind: NormKind = OPERATOR) -> tuple[float, tuple[int, int]]:
    """Worst deviation from multiplicativity and the pair attaining it.

    Free-ball domains are scanned only over pairs whose product stays in the
    ball.
    """
    xs, ys, ks, = _pair_arrays(phi.domain)
    chunk = max(1, _PAIR_CHUNK // (phi.dim * phi.dim))
    worst = -1.0
    witness = (int(xs[0]), int(ys[0]))
    for lo in range(0, len(xs), chunk):
        sl = slice(lo, lo + chunk)
        diff = phi.values[xs[sl]] @ phi.values[ys[sl]] - phi.values[ks[sl]]
        norms = batch_norms(diff, kind)
        w = int(np.argmax(norms))
        if norms[w] > worst:
            worst = float(norms[w])
            witness = (int(xs[sl][w]), int(ys[sl][w]))
    return worst, witness


def unit_defect(phi: GroupMap) -> tuple[float, int]:
    """Worst of ``1 - v v*`` and ``1 - v* v`` in operator norm, with witness."""
    v = phi.values
    eye = np.eye(phi.dim, dtype=np.complex128)
    left = batch_norms(eye - v @ adj(v))
    right = batch_norms(eye - adj(v) @ v)
    per_element = np.maximum(left, right)
    w = int(np.argmax(per_element))
    return float(per_element[w]), w


def iso_defect(phi: GroupMap) -> float:
    """Worst ``1 - v* v`` deviation alone (isometry defect)."""
    v = phi.values
    eye = np.eye(phi.dim, dtype=np.complex128)
    return float(batch_norms(eye - adj(v) @ v).max())


def sup_norm(phi: GroupMap) -> float:
    return float(batch_norms(phi.values).max())


def distance(phi: GroupMap, psi: GroupMap, kind: NormKind = OPERATOR) -> float:
    """Uniform distance ``max_x ||phi(x) - psi(x)||`` under ``kind``."""
    _require_compatible(phi, psi)
    return float(batch_norms(phi.values - psi.values, kind).max())


def pd_min_eig(phi: GroupMap) -> float:
    """Smallest eigenvalue of the full-group Gram block matrix.

    The Gram has blocks ``phi(inv(x_i) * x_j)``.  A Gram that is not
    Hermitian within ``GRAM_HERMITIAN_TOL`` is definitely not PSD and is
    reported as ``-inf``.
    """
    if isinstance(phi.domain, FreeBall):
        raise UnsupportedDomainError(
            "positive definiteness scans the full group Gram and needs a finite group"
        )
    g = phi.domain
    n, d = g.order, phi.dim
    if n * d > MAX_GRAM_DIM:
        raise ValueError(f"Gram dimension {n * d} exceeds {MAX_GRAM_DIM}")
    blocks = phi.values[g.mul[g.inv[:, None], np.arange(n)[None, :]]]
    big = blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d)
    if linalg.op_norm(big - big.conj().T) > GRAM_HERMITIAN_TOL:
        return float("-inf")
    return float(np.linalg.eigvalsh((big + big.conj().T) / 2.0)[0])


def adjoint_map(phi: GroupMap) -> GroupMap:
    """The map ``x -> phi(inv(x))*``; fixes representations pointwise."""
    ii = inverse_indices(phi.domain)
    label = f"adj({phi.label})" if phi.label else "adj"
    return GroupMap(phi.domain, phi.dim, adj(phi.values[ii]), label=label)


@dataclass
class DefectReport:
    epsilon: float
    delta: float
    iso_delta: float
    sup_norm: float
    norm_kind: str
    witness_pair: tuple[int, int]
    witness_element: int
    restricted: bool

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "iso_delta": self.iso_delta,
            "sup_norm": self.sup_norm,
            "norm_kind": self.norm_kind,
            "witness_pair": list(self.witness_pair),
            "witness_element": self.witness_element,
            "restricted": self.restricted,
        }


def defect_report(phi: GroupMap, kind: NormKind = OPERATOR) -> DefectReport:
    """All defect measurements in one pass.

    ``epsilon`` uses the requested norm; ``delta`` and ``iso_delta`` are
    operator-norm quantities.
    """
    eps, pair = mult_defect(phi, kind)
    delta, element = unit_defect(phi)
    return DefectReport(
        epsilon=eps,
        delta=delta,
        iso_delta=iso_defect(phi),
        sup_norm=sup_norm(phi),
        norm_kind=kind.describe(),
        witness_pair=pair,
        witness_element=element,
        restricted=phi.restricted,
    )


@dataclass
class PerturbationBoundReport:
    """Measured defects of a nearby map against bounds predicted from the base.

    Each predicted value is the base defect plus the growth a uniform
    perturbation of size ``eta`` can cause; slack is predicted minus measured.
    """

    eta: float
    predicted_iso: float
    measured_iso: float
    predicted_unit: float
    measured_unit: float
    predicted_mult: float
    measured_mult: float

    SLACK_TOL = 1e-10

    @property
    def iso_slack(self) -> float:
        return self.predicted_iso - self.measured_iso

    @property
    def unit_slack(self) -> float:
        return self.predicted_unit - self.measured_unit

    @property
    def mult_slack(self) -> float:
        return self.predicted_mult - self.measured_mult

    @property
    def passed(self) -> bool:
        tol = self.SLACK_TOL
        return self.iso_slack >= -tol and self.unit_slack >= -tol and self.mult_slack >= -tol

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "predicted_iso": self.predicted_iso,
            "measured_iso": self.measured_iso,
            "predicted_unit": self.predicted_unit,
            "measured_unit": self.measured_unit,
            "predicted_mult": self.predicted_mult,
            "measured_mult": self.measured_mult,
            "iso_slack": self.iso_slack,
            "unit_slack": self.unit_slack,
            "mult_slack": self.mult_slack,
            "passed": self.passed,
        }


def perturbation_bound_report(phi: GroupMap, psi: GroupMap) -> PerturbationBoundReport:
    """How the defects of ``psi`` compare with bounds predicted from ``phi``."""
    _require_compatible(phi, psi)
    eta = distance(phi, psi)
    norms = sup_norm(phi) + sup_norm(psi)
    eps_phi, _ = mult_defect(phi)
    unit_phi, _ = unit_defect(phi)
    eps_psi, _ = mult_defect(psi)
    unit_psi, _ = unit_defect(psi)
    return PerturbationBoundReport(
        eta=eta,
        predicted_iso=iso_defect(phi) + norms * eta,
        measured_iso=iso_defect(psi),
        predicted_unit=unit_phi + norms * eta,
        measured_unit=unit_psi,
        predicted_mult=eps_phi + (1.0 + norms) * eta,
        measured_mult=eps_psi,
    )


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _decode_matrix(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)


def map_to_dict(phi: GroupMap) -> dict:
    """JSON form: complex scalars as [re, im] pairs, matrices row-major."""
    return {
        "group": phi.domain.label,
        "dim": phi.dim,
        "values": {str(i): _encode_matrix(phi.values[i]) for i in range(len(phi.values))},
    }


def map_from_dict(data: dict, domain: FiniteGroup | FreeBall | None = None) -> GroupMap:
    if domain is None:
        domain = parse_group_spec(data["group"])
    dim = int(data["dim"])
    n = n_elements(domain)
    vals = np.zeros((n, dim, dim), dtype=np.complex128)
    for key, rows in data["values"].items():
        vals[int(key)] = _decode_matrix(rows)
    return GroupMap(domain, dim, vals, label=data.get("label", ""))
