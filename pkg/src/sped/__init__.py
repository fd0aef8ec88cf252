"""Derivative-based recognition for parsing expression grammars."""

from .analysis import (
    ExpansionSets, NullabilityTable, WellFormedness, check_well_formed,
    compute_expansions, compute_nullability, simplify, simplify_grammar,
)
from .engine import (
    EOS, Engine, EngineInvariantError, RecognitionOutcome, StepContext, back,
    check_normalized, dag_stats, derive_step, match_set, recognize,
)
from .grammar import (
    Alt, CharLit, Empty, Fail, Grammar, GrammarError, Nonterm, Not, Seq,
    SurfaceExpr, desugar_star, format_grammar, load_grammar, parse_grammar,
)
from .oracle import FAILURE, FUEL_EXHAUSTED, Rest, interpret, run_oracle

__version__ = "0.1.0"
