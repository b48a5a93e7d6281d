"""Translation from annotated source classes to the intermediate
verification language."""

from miniproof.translate.context import (
    HandlerRegistry,
    TranslationContext,
    TranslationOptions,
    register_handler,
)
from miniproof.translate.pool import (
    PoolEntry,
    TranslationResult,
    build_pool,
    default_entries,
    translate_pool,
)
from miniproof.translate.routines import apply_invariant_defaults, translate_routine

__all__ = [
    "HandlerRegistry",
    "PoolEntry",
    "TranslationContext",
    "TranslationOptions",
    "TranslationResult",
    "apply_invariant_defaults",
    "build_pool",
    "default_entries",
    "register_handler",
    "translate_pool",
    "translate_routine",
]
