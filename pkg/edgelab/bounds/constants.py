"""
Closed-form first-order stability bounds.

Filter stability constants:
    shift-invariant        2 sqrt(n) C_L
    eigenvector-sharing    2 sqrt(n) (1 + n eps) C_L
    general edge-varying   2 sqrt(n) (1 + 2 n eps) C_L
A network of L layers with F features multiplies the filter constant by
L F^(L-1). Every bound is linear in ||x|| and in the perturbation size.
"""
import math

from pydantic import BaseModel, Field, field_validator

from errors import InvalidInputError
from filters import FilterClass


def _check(**values: float):
    for label, value in values.items():
        if value < 0 or not math.isfinite(value):
            raise InvalidInputError(f"{label} must be a finite value >= 0, got {value}")


def si_constant(c_lipschitz: float, n: int) -> float:
    return 2.0 * math.sqrt(n) * c_lipschitz


def es_constant(c_lipschitz: float, n: int, eps_misalign: float) -> float:
    return 2.0 * math.sqrt(n) * (1.0 + n * eps_misalign) * c_lipschitz


def edge_constant(c_lipschitz: float, n: int, eps_misalign: float) -> float:
    return 2.0 * math.sqrt(n) * (1.0 + 2.0 * n * eps_misalign) * c_lipschitz


def bound_si(c_lipschitz: float, n: int, x_norm: float, pert_size: float) -> float:
    _check(c_lipschitz=c_lipschitz, x_norm=x_norm, pert_size=pert_size)
    return si_constant(c_lipschitz, n) * x_norm * pert_size


def bound_es(c_lipschitz: float, n: int, eps_misalign: float, x_norm: float, pert_size: float) -> float:
    _check(c_lipschitz=c_lipschitz, eps_misalign=eps_misalign, x_norm=x_norm, pert_size=pert_size)
    return es_constant(c_lipschitz, n, eps_misalign) * x_norm * pert_size


def bound_edge(c_lipschitz: float, n: int, eps_misalign: float, x_norm: float, pert_size: float) -> float:
    _check(c_lipschitz=c_lipschitz, eps_misalign=eps_misalign, x_norm=x_norm, pert_size=pert_size)
    return edge_constant(c_lipschitz, n, eps_misalign) * x_norm * pert_size


def bound_network(filter_constant: float, layers: int, features: int, x_norm: float, pert_size: float) -> float:
    """L F^(L-1) C ||x|| eps for a filter stability constant C."""
    _check(filter_constant=filter_constant, x_norm=x_norm, pert_size=pert_size)
    if layers < 1 or features < 1:
        raise InvalidInputError(f"layers and features must be >= 1, got L={layers}, F={features}")
    return layers * features ** (layers - 1) * filter_constant * x_norm * pert_size


def remainder_warning(pert_size: float, eps_misalign: float = 0.0, threshold: float = 0.1) -> bool:
    """True when the omitted second-order terms may no longer be negligible."""
    return pert_size > threshold or eps_misalign > threshold


class StabilityConstants(BaseModel):
    """Constants entering one bound."""
    c_lipschitz: float = Field(ge=0)
    n: int = Field(ge=1)
    eps_misalign: float = Field(default=0.0, ge=0)
    class_tag: FilterClass

    @field_validator("class_tag", mode="before")
    @classmethod
    def parse_class_tag(cls, value):
        return FilterClass.parse(value)

    def filter_constant(self) -> float:
        """Stability constant of the class (SI also covers convolutional)."""
        if self.class_tag in (FilterClass.CONVOLUTIONAL, FilterClass.SHIFT_INVARIANT):
            return si_constant(self.c_lipschitz, self.n)
        if self.class_tag in (FilterClass.EIGENVECTOR_SHARING, FilterClass.NODE_VARYING):
            return es_constant(self.c_lipschitz, self.n, self.eps_misalign)
        return edge_constant(self.c_lipschitz, self.n, self.eps_misalign)

    def bound(self, x_norm: float, pert_size: float, layers: int = 1, features: int = 1) -> float:
        return bound_network(self.filter_constant(), layers, features, x_norm, pert_size)
