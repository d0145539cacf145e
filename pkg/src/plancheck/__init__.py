"""Plan verification toolkit: an SMV-subset frontend, a bounded model
checker over a hand-rolled CDCL solver, a deterministic plan encoder, and an
evaluation harness for LLM-translated models."""

__version__ = "0.1.0"

from .bmc import BoundExhausted, CounterexampleFound, Holds, check_spec, completeness_bound
from .kripke import KripkeStructure, Trace, compile
from .ltl import eval_on_lasso, format_ltl
from .plans import PlanProblem, PlanVerdict, check_problem, encode_plan, load_problem, simulate_plan
from .smv import ParseError, parse_ltl, parse_model, pretty_print

__all__ = [
    "__version__",
    "BoundExhausted",
    "CounterexampleFound",
    "Holds",
    "KripkeStructure",
    "ParseError",
    "PlanProblem",
    "PlanVerdict",
    "Trace",
    "check_problem",
    "check_spec",
    "compile",
    "completeness_bound",
    "encode_plan",
    "eval_on_lasso",
    "format_ltl",
    "load_problem",
    "parse_ltl",
    "parse_model",
    "pretty_print",
    "simulate_plan",
]
