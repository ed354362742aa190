"""Restriction decoder for topological color codes on colexes."""

__version__ = "0.1.0"

from .complexes import CellComplex, Chain, Colex, SimplicialComplex, colorset, color_label
from .lattices import Family, LatticeSpec, build
from .restriction import RestrictedLattice, restrict, check_morphism
from .homology import (
    HomologyBasis,
    homology_basis,
    color_code_basis,
    homology_class,
    colorable_filling,
    colorable_cycle,
    colorable_link_chain,
    membrane,
)
from .tc_decoders import make_decoder, mwpm_decode, uf_decode, DecoderUnavailable
from .decoder import (
    RestrictionDecoder,
    SimplifiedDecoder2D,
    DecodeOutcome,
    LiftError,
    restriction_decode,
    simplified_decode_2d,
    success_equivalence_check,
    lift,
)
from .montecarlo import (
    NoiseModel,
    DecoderSpec,
    sample_pfail,
    fit_crossing,
    effective_noise,
    inverse_effective_noise,
    threshold_transfer,
    verify_effective_noise,
)
