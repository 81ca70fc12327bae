"""Conservative extensions of TGD ontologies: chase, homomorphisms, and checkers."""

from .chase import Budget, ChaseResult, NotFrontierOne, NotLinear, applicable, chase, chase_below, chase_below_fact, chase_con
from .hom import ChainSpec, cq_entailed, find_hom, hom_exists_n, infinite_chain_hom
from .model import CQ, TGD, Atom, BudgetExceeded, Database, Instance, MalformedRule, ModelError, Null, classify
from .textio import ParseError, format_rules, parse_cq, parse_database, parse_instance, parse_rules
from .verdict import Value, Verdict

__version__ = "0.1.0"
