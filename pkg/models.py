"""
Data models for the strain-limiting thermoelasticity solver
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np


class BoundaryTag(Enum):
    GAMMA1 = "gamma1"  # y = 0
    GAMMA2 = "gamma2"  # x = 1
    GAMMA3 = "gamma3"  # y = 1
    GAMMA4 = "gamma4"  # x = 0
    CRACK_UPPER = "crack_upper"
    CRACK_LOWER = "crack_lower"


class FieldKind(Enum):
    SCALAR = "scalar"
    VECTOR = "vector"

    @property
    def components(self) -> int:
        return 1 if self is FieldKind.SCALAR else 2


class Domain(Enum):
    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"


class TemperatureCase(Enum):
    CASE1 = 1
    CASE2 = 2


class ModelKind(Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class QuadCell:
    node_ids: Tuple[int, int, int, int]  # counterclockwise


@dataclass(frozen=True)
class SymTensor2:
    """Symmetric 2x2 tensor stored as (xx, yy, xy)."""
    xx: float = 0.0
    yy: float = 0.0
    xy: float = 0.0

    @classmethod
    def identity(cls, scale: float = 1.0) -> "SymTensor2":
        return cls(scale, scale, 0.0)

    @classmethod
    def from_components(cls, values) -> "SymTensor2":
        xx, yy, xy = (float(v) for v in values)
        return cls(xx, yy, xy)

    def components(self) -> np.ndarray:
        return np.array([self.xx, self.yy, self.xy])

    def trace(self) -> float:
        return self.xx + self.yy

    def ddot(self, other: "SymTensor2") -> float:
        """Double contraction A : B"""
        return self.xx * other.xx + self.yy * other.yy + 2.0 * self.xy * other.xy

    def norm(self) -> float:
        """Frobenius norm"""
        return math.sqrt(self.ddot(self))

    def __add__(self, other: "SymTensor2") -> "SymTensor2":
        return SymTensor2(self.xx + other.xx, self.yy + other.yy, self.xy + other.xy)

    def __sub__(self, other: "SymTensor2") -> "SymTensor2":
        return SymTensor2(self.xx - other.xx, self.yy - other.yy, self.xy - other.xy)

    def __mul__(self, scale: float) -> "SymTensor2":
        return SymTensor2(scale * self.xx, scale * self.yy, scale * self.xy)

    __rmul__ = __mul__


@dataclass(frozen=True)
class MaterialParams:
    lam: float = 1.0
    mu: float = 1.0
    a: float = 0.5
    beta: float = 0.02
    k: float = 20.0
    g: float = -10.0
    alpha_t: float = 0.1

    @property
    def alpha(self) -> float:
        """Thermal stress coefficient alpha = alpha_T (3 lambda + 2 mu)"""
        return self.alpha_t * (3.0 * self.lam + 2.0 * self.mu)

    def linearized(self) -> "MaterialParams":
        return replace(self, beta=0.0)

    def with_beta(self, beta: float) -> "MaterialParams":
        return replace(self, beta=beta)

    def validate(self) -> Dict[str, object]:
        """Validate material constants"""
        errors = []
        if not self.mu > 0:
            errors.append("mu must be positive")
        if not self.lam + self.mu > 0:
            errors.append("lambda + mu must be positive")
        if not self.a > 0:
            errors.append("a must be positive")
        if not self.beta >= 0:
            errors.append("beta must be non-negative")
        if not self.k > 0:
            errors.append("k must be positive")
        return {"valid": len(errors) == 0, "errors": errors}


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-8
    max_iter: int = 50

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("Newton tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("Newton max_iter must be at least 1")


@dataclass
class SolutionState:
    theta: np.ndarray
    u: np.ndarray  # interleaved (u_x, u_y) per node
    newton_history: List[float] = field(default_factory=list)
    converged: bool = False
    certificate: float = 0.0
    message: str = ""

    @property
    def iterations(self) -> int:
        return len(self.newton_history)

    @property
    def final_residual(self) -> Optional[float]:
        return self.newton_history[-1] if self.newton_history else None

    def displacement(self) -> np.ndarray:
        """Nodal displacements as an (n_nodes, 2) array"""
        return self.u.reshape(-1, 2)
