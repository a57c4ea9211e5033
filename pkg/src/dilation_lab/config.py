"""Central tolerance record.

Every numerical threshold used by the library lives here.  The environment
variable ``DILATION_LAB_TOLERANCE_SCALE`` multiplies all of them (default 1),
which is handy when running on inputs with very large energy scales.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

ENV_SCALE = "DILATION_LAB_TOLERANCE_SCALE"


@dataclass(frozen=True)
class Tolerances:
    hermiticity: float = 1e-10
    eig_residual: float = 1e-10
    jacobi_offdiag: float = 1e-13
    degenerate_gap: float = 1e-10
    phase_zero: float = 1e-10
    positive_definite: float = 1e-12
    singular_det: float = 1e-12
    exceptional_cos: float = 1e-9
    degenerate_s: float = 1e-12
    normalization: float = 1e-12
    metric_mismatch: float = 1e-8
    general_tau_imag: float = 1e-8
    general_tau_cond: float = 1e8
    imaginary_residual: float = 1e-10
    dual_path: float = 1e-8
    decision: float = 1e-9
    constraint: float = 1e-9
    bound_slack: float = 1e-9

    def scaled(self, factor: float) -> "Tolerances":
        # the condition-number cap is a ceiling, so it scales the other way
        changes = {}
        for f in fields(self):
            value = getattr(self, f.name)
            changes[f.name] = value / factor if f.name == "general_tau_cond" else value * factor
        return replace(self, **changes)


DEFAULT = Tolerances()


def tolerances() -> Tolerances:
    """Return the active tolerances, honouring ``DILATION_LAB_TOLERANCE_SCALE``."""
    raw = os.environ.get(ENV_SCALE)
    if raw is None or raw.strip() == "":
        return DEFAULT
    try:
        factor = float(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_SCALE} must be a positive number, got {raw!r}") from exc
    if not factor > 0:
        raise ValueError(f"{ENV_SCALE} must be a positive number, got {raw!r}")
    return DEFAULT if factor == 1.0 else DEFAULT.scaled(factor)
