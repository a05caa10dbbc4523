from .ast import *  # noqa: F401,F403
from .check import CallGraph, CallSite, call_graph, recursive_call_sites, typecheck
from .loops import loops_to_recursion, unit_loops_to_recursion
from .parser import parse, parse_expr
from .printer import expr_str, pretty


def load(text: str, allow_reserved: bool = False):
    """Parse, typecheck and eliminate loops in one step."""
    return unit_loops_to_recursion(typecheck(parse(text, allow_reserved), allow_reserved))
