"""Structure index of the starting cube and its property verifier."""

from .catalog import (
    HALF_BLOCK_FAMILIES,
    BlockCatalog,
    HalfTransversalSet,
    StructureError,
    TransversalSet,
    build_catalog,
    half_transversal_set,
    starting_catalog,
    subcubes_through,
    transversal_set_of,
)
from .verify import PropertyReport, PropertyResult, check_properties, verify_properties

__all__ = [
    "HALF_BLOCK_FAMILIES", "BlockCatalog", "HalfTransversalSet", "StructureError", "TransversalSet",
    "build_catalog", "half_transversal_set", "starting_catalog", "subcubes_through", "transversal_set_of",
    "PropertyReport", "PropertyResult", "check_properties", "verify_properties",
]
