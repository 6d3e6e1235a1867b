"""Static semantics reconstruction: Wasm -> JavaScript syntax units."""

from .abstraction import (
    AbstractionError, AbstractStack, AbstractValue, Context, JsFragment, ModuleAbstraction,
    StackUnderflow, abstract_data, abstract_function, abstract_instruction,
)
from .helpers import OP_HELPERS, prelude
from .names import NameGenerator

__all__ = [
    "AbstractionError", "AbstractStack", "AbstractValue", "Context", "JsFragment", "ModuleAbstraction",
    "NameGenerator", "OP_HELPERS", "StackUnderflow", "abstract_data", "abstract_function",
    "abstract_instruction", "prelude",
]
