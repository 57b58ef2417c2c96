"""Separable-operation convertibility of multipartite pure states."""

__version__ = "0.1.0"

from .adm import ADM, adm_of, majorizes, monotones, unitary_stab_test
from .critical import check_critical, kempf_ness_probe, normalize_to_critical
from .fourqubit import (
    klein_stabilizer,
    l_state,
    l_state_stabilizer,
    make_crit_state,
    p3_operator,
    sep_characterization_4q,
    u_basis,
)
from .invariants import f2_bipartite, f2_four_qubit, f4_three_qubit, null_cone_flag, stabilizer_phase_check
from .pmax import (
    DeficitOperator,
    PmaxBounds,
    lemma1_separability,
    pmax_bounds,
    pmax_to_critical,
    separability_probe,
    sigma_p,
    teleportation_monotone,
)
from .sep_decide import (
    EnsembleSpec,
    TransformationVerdict,
    check_bipartite,
    check_deterministic,
    check_ensemble,
    check_ghz_class,
    kraus_operators,
)
from .stabilizer import (
    StabilizerGroup,
    catalog,
    generate_group,
    ghz_t0_twirl,
    ghz_t_twirl,
    twirl,
    unitarize,
    verify_stabilizer,
)
from .states import bell, ghz, max_entangled, schmidt_state, w_state
from .tensor_core import HilbertShape, LocalOperator, PureState, apply, compose, reduced_density

__all__ = [name for name in dir() if not name.startswith("_")]
