"""Exact valuations on the first Weyl algebra and their Ore extensions.

The package builds valuations from tower descriptors, evaluates values and
residues exactly over the rationals, enumerates the compatible orderings,
and converts towers to the z-sequence form living in the Ore extension of
Puiseux series, with round-trip checks between the two presentations.
"""

from .coeff import Rat, format_rat, parse_rat
from .descriptor import (
    GroupKind,
    InfiniteRule,
    IrrationalTerminal,
    OmegaDescriptor,
    OmegaStep,
    Violation,
    basis_slot,
    builtin_rule,
    commutator_value,
    group_kind,
    omega_element,
    omega_fraction,
    validate,
)
from .errors import (
    ConversionInternalError,
    DeclarationInconsistent,
    DepthExceeded,
    EvenRootOfNegative,
    MissingSignChoice,
    NegativeXPower,
    NonzeroRequired,
    NonzeroValue,
    NoRationalRoot,
    NotExtendable,
    ParseError,
    SignChoiceForbidden,
    SignChoiceRequired,
    TruncationLoss,
    WeylvalError,
)
from .evaluate import (
    LeadingData,
    SampleReport,
    equivalent,
    eval_element,
    eval_fraction,
    leading_data,
    monomial_gap_value,
    residue,
    residue_fraction,
    sample_element,
    shadow_eval,
    strongly_abelian_sample,
    unit_generators,
)
from .expr import format_expr, parse_expr
from .extension import (
    ExtendViolation,
    GammaResolution,
    RoundtripReport,
    check_extendable,
    cofactor_tail,
    cofactor_tail_residue,
    gamma_tilde,
    omega_to_z,
    resolve_gammas,
    root_cofactor,
    root_cofactor_residue,
    roundtrip_check,
    tail_count,
)
from .orderings import (
    ExtensionResult,
    OrderingDescriptor,
    compatibility_check,
    enumerate_orderings,
    extend_ordering,
    sign,
)
from .series import (
    OrePoly,
    PuiseuxSeries,
    ZRule,
    ZSequence,
    ZTerminal,
    a_series,
    builtin_z_rule,
    delta,
    embed,
    format_series,
    ore_mul,
    parse_series,
    shift_variable,
    tilde_eval,
    translate_y,
    z_eval,
    z_eval_naive,
    z_residue,
)
from .valuegroup import INFINITY, Value, ValueGroupElement, cmp, value_to_json
from .weyl import WeylElement, WeylFraction, apply_to_poly, commutator, normalize

__version__ = "0.1.0"

__all__ = [
    "ConversionInternalError",
    "DeclarationInconsistent",
    "DepthExceeded",
    "EvenRootOfNegative",
    "ExtendViolation",
    "ExtensionResult",
    "GammaResolution",
    "GroupKind",
    "INFINITY",
    "InfiniteRule",
    "IrrationalTerminal",
    "LeadingData",
    "MissingSignChoice",
    "NegativeXPower",
    "NonzeroRequired",
    "NonzeroValue",
    "NoRationalRoot",
    "NotExtendable",
    "OmegaDescriptor",
    "OmegaStep",
    "OrderingDescriptor",
    "OrePoly",
    "ParseError",
    "PuiseuxSeries",
    "Rat",
    "RoundtripReport",
    "SampleReport",
    "SignChoiceForbidden",
    "SignChoiceRequired",
    "TruncationLoss",
    "Value",
    "ValueGroupElement",
    "Violation",
    "WeylElement",
    "WeylFraction",
    "WeylvalError",
    "ZRule",
    "ZSequence",
    "ZTerminal",
    "a_series",
    "apply_to_poly",
    "basis_slot",
    "builtin_rule",
    "builtin_z_rule",
    "check_extendable",
    "cmp",
    "cofactor_tail",
    "cofactor_tail_residue",
    "commutator",
    "commutator_value",
    "compatibility_check",
    "delta",
    "embed",
    "enumerate_orderings",
    "equivalent",
    "eval_element",
    "eval_fraction",
    "extend_ordering",
    "format_expr",
    "format_rat",
    "format_series",
    "gamma_tilde",
    "group_kind",
    "leading_data",
    "monomial_gap_value",
    "normalize",
    "omega_element",
    "omega_fraction",
    "omega_to_z",
    "ore_mul",
    "parse_expr",
    "parse_rat",
    "parse_series",
    "residue",
    "residue_fraction",
    "resolve_gammas",
    "root_cofactor",
    "root_cofactor_residue",
    "roundtrip_check",
    "sample_element",
    "shadow_eval",
    "shift_variable",
    "sign",
    "strongly_abelian_sample",
    "tail_count",
    "tilde_eval",
    "translate_y",
    "unit_generators",
    "validate",
    "value_to_json",
    "z_eval",
    "z_eval_naive",
    "z_residue",
]
