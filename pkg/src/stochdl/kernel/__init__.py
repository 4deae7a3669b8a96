"""The proof kernel: axiom catalog, rules, proof scripts."""

from .axioms import PATHWISE, PROBABILISTIC, AxiomSchema, axiom_catalog, default_catalog, lookup
from .rules import PROB, RULES, Judgment, RuleError, apply_rule, instantiate
from .script import LemmaLibrary, ProofScript, ScriptError, Step, Verdict, check_file, check_proof, parse_script

__all__ = [
    "PATHWISE",
    "PROB",
    "PROBABILISTIC",
    "RULES",
    "AxiomSchema",
    "Judgment",
    "LemmaLibrary",
    "ProofScript",
    "RuleError",
    "ScriptError",
    "Step",
    "Verdict",
    "apply_rule",
    "axiom_catalog",
    "check_file",
    "check_proof",
    "default_catalog",
    "instantiate",
    "lookup",
    "parse_script",
]
