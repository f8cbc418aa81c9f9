"""Numerical tests of whether a bipartite qudit gate is a universal entangler."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .gates import UnitaryGate, builtin, candidate, clock_z, fourier, hadamard_uh, pauli_y, shift_x, sqrt_gate  # noqa: E402
from .search import DeConfig, counterexample_search, de_minimize, min_entanglement_search  # noqa: E402
from .separability import (  # noqa: E402
    column_separability_filter,
    is_separable_state,
    multipartite_split_residual,
    operator_kron_residual,
    state_kron_residual,
)
from .states import BipartiteShape, ProductState, PureState, apply_gate, entanglement_entropy  # noqa: E402
