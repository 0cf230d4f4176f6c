"""Promise CSP toolkit: relational structures, polymorphisms, relaxations,
derivations and a sandwich classifier for symmetric/functional templates."""

from .core import (Relation, SearchConfig, Structure, find_homomorphism, is_homomorphism, parse_structure,
                   planted_instance, serialize_structure)
from .catalog import catalog_get
from .errors import (DataError, InvalidTemplate, PCSPError, PromiseViolation, ResourceLimitExceeded,
                     SignatureMismatch, VerdictMismatch)

__version__ = "0.1.0"

__all__ = [
    "Relation", "SearchConfig", "Structure", "find_homomorphism", "is_homomorphism", "parse_structure",
    "planted_instance", "serialize_structure", "catalog_get", "DataError", "InvalidTemplate", "PCSPError",
    "PromiseViolation", "ResourceLimitExceeded", "SignatureMismatch", "VerdictMismatch",
]
