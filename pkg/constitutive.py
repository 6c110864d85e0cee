"""
Strain-limiting constitutive algebra in two dimensions

Tensors are handled either as SymTensor2 values or, for the vectorised kernels
used by assembly and post-processing, as arrays whose trailing axis holds the
(xx, yy, xy) components.
"""
from typing import Optional, Tuple

import numpy as np

from errors import StrainLimitViolation
from models import MaterialParams, SymTensor2

DIM = 2
IDENTITY = np.array([1.0, 1.0, 0.0])
# A : B = sum(METRIC * A * B) for (xx, yy, xy) components
METRIC = np.array([1.0, 1.0, 2.0])
# below this energy norm the Theta1 * Theta2 term of the tangent is dropped
TANGENT_NORM_FLOOR = 1e-14


def ddot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(METRIC * a * b, axis=-1)


def trace(a: np.ndarray) -> np.ndarray:
    return a[..., 0] + a[..., 1]


def elasticity_components(eps: np.ndarray, params: MaterialParams) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    return 2.0 * params.mu * eps + params.lam * trace(eps)[..., None] * IDENTITY


def compliance_components(stress: np.ndarray, params: MaterialParams) -> np.ndarray:
    if not (params.mu > 0 and params.lam + params.mu > 0):
        raise ValueError(f"degenerate moduli lambda={params.lam}, mu={params.mu}")
    stress = np.asarray(stress, dtype=float)
    mu, lam = params.mu, params.lam
    coeff = lam / (2.0 * mu * DIM * (lam + 2.0 * mu / DIM))
    return stress / (2.0 * mu) - coeff * trace(stress)[..., None] * IDENTITY


def energy_norm_components(eps: np.ndarray, params: MaterialParams) -> np.ndarray:
    """|E^{1/2}[eps]| = sqrt(eps : E[eps])"""
    eps = np.asarray(eps, dtype=float)
    return np.sqrt(np.maximum(ddot(eps, elasticity_components(eps, params)), 0.0))


def find_strain_limit_violation(norms: np.ndarray, params: MaterialParams) -> Optional[Tuple[int, ...]]:
    """Index of the largest beta * r >= 1 entry, or None inside the coercive region"""
    if params.beta <= 0.0:
        return None
    norms = np.asarray(norms, dtype=float)
    scaled = params.beta * norms
    if not np.any(scaled >= 1.0):
        return None
    return np.unravel_index(int(np.argmax(scaled)), norms.shape)


def _require_coercive(norms: np.ndarray, params: MaterialParams) -> None:
    index = find_strain_limit_violation(norms, params)
    if index is not None:
        raise StrainLimitViolation(float(np.asarray(norms)[index]), params.beta)


def psi_values(r: np.ndarray, params: MaterialParams) -> np.ndarray:
    """Psi(r) = (1 - (beta r)^a)^(-1/a)"""
    r = np.asarray(r, dtype=float)
    if params.beta == 0.0:
        return np.ones_like(r)
    _require_coercive(r, params)
    return (1.0 - (params.beta * r) ** params.a) ** (-1.0 / params.a)


def stress_components(eps: np.ndarray, params: MaterialParams) -> np.ndarray:
    """Mechanical stress L(eps) = Psi(|E^{1/2}[eps]|) E[eps]"""
    norms = energy_norm_components(eps, params)
    return psi_values(norms, params)[..., None] * elasticity_components(eps, params)


def strain_components(stress: np.ndarray, params: MaterialParams) -> np.ndarray:
    """F(T) = K[T] / (1 + beta^a |K^{1/2}[T]|^a)^(1/a)"""
    compliant = compliance_components(stress, params)
    if params.beta == 0.0:
        return compliant
    s = np.sqrt(np.maximum(ddot(np.asarray(stress, dtype=float), compliant), 0.0))
    denom = (1.0 + (params.beta * s) ** params.a) ** (1.0 / params.a)
    return compliant / denom[..., None]


def _tangent_scalars(eps_n: np.ndarray, params: MaterialParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Psi(N), the coefficient of the rank-one term, and E[eps_n]"""
    stiff_n = elasticity_components(eps_n, params)
    norms = np.sqrt(np.maximum(ddot(eps_n, stiff_n), 0.0))
    psi = psi_values(norms, params)
    coeff = np.zeros_like(norms)
    if params.beta > 0.0:
        a, beta = params.a, params.beta
        live = norms >= TANGENT_NORM_FLOOR
        n = norms[live]
        coeff[live] = beta ** a * n ** (a - 2.0) * (1.0 - beta ** a * n ** a) ** (-1.0 - 1.0 / a)
    return psi, coeff, stiff_n


def tangent_components(eps_n: np.ndarray, eps_delta: np.ndarray, params: MaterialParams) -> np.ndarray:
    """Directional derivative of L at eps_n in the direction eps_delta"""
    eps_n = np.asarray(eps_n, dtype=float)
    eps_delta = np.asarray(eps_delta, dtype=float)
    psi, coeff, stiff_n = _tangent_scalars(eps_n, params)
    theta2 = ddot(eps_n, elasticity_components(eps_delta, params))
    return (psi[..., None] * elasticity_components(eps_delta, params)
            + (coeff * theta2)[..., None] * stiff_n)


def elasticity_matrix(params: MaterialParams) -> np.ndarray:
    """E as a 3x3 map on (xx, yy, xy) components"""
    lam, mu = params.lam, params.mu
    return np.array([[lam + 2 * mu, lam, 0.0],
                     [lam, lam + 2 * mu, 0.0],
                     [0.0, 0.0, 2 * mu]])


def tangent_form_matrix(eps_n: np.ndarray, params: MaterialParams) -> np.ndarray:
    """Symmetric W with a : tangent(eps_n, b) = a^T W b, shape (..., 3, 3)"""
    eps_n = np.asarray(eps_n, dtype=float)
    psi, coeff, stiff_n = _tangent_scalars(eps_n, params)
    weighted = METRIC * stiff_n
    base = METRIC[:, None] * elasticity_matrix(params)
    return (psi[..., None, None] * base
            + coeff[..., None, None] * weighted[..., :, None] * weighted[..., None, :])


def limiting_map(d: SymTensor2, beta: float, a: float) -> SymTensor2:
    """D / (1 - beta^a |D|^a)^(1/a) with the Frobenius norm"""
    r = d.norm()
    if beta * r >= 1.0:
        raise StrainLimitViolation(r, beta)
    return d * (1.0 - (beta * r) ** a) ** (-1.0 / a)


def elasticity_apply(eps: SymTensor2, params: MaterialParams) -> SymTensor2:
    return SymTensor2.from_components(elasticity_components(eps.components(), params))


def compliance_apply(stress: SymTensor2, params: MaterialParams) -> SymTensor2:
    return SymTensor2.from_components(compliance_components(stress.components(), params))


def energy_norm(eps: SymTensor2, params: MaterialParams) -> float:
    return float(energy_norm_components(eps.components(), params))


def psi(r: float, params: MaterialParams) -> float:
    return float(psi_values(r, params))


def stress_from_strain(eps: SymTensor2, params: MaterialParams) -> SymTensor2:
    return SymTensor2.from_components(stress_components(eps.components(), params))


def strain_from_stress(stress: SymTensor2, params: MaterialParams) -> SymTensor2:
    return SymTensor2.from_components(strain_components(stress.components(), params))


def tangent_apply(eps_n: SymTensor2, eps_delta: SymTensor2, params: MaterialParams) -> SymTensor2:
    return SymTensor2.from_components(
        tangent_components(eps_n.components(), eps_delta.components(), params)
    )
