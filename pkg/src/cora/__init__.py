"""cora: qualitative causal reasoning over evidence-backed causal maps.

Build causal maps from a knowledge base of extracted events, run
sign/weight inference with contradiction detection, explore what-if edits,
and score answer annotations: as a library, a CLI, and an HTTP service.
"""

from .builder import (
    BuildError,
    BuildResult,
    Lexicon,
    SearchParams,
    Template,
    build_map,
    generalize_map,
    instantiate_template,
    map_predicate,
)
from .dsl import ModelSyntaxError, ParseError, parse_model, serialize_model, try_parse
from .inference import (
    Edit,
    EditRejection,
    InferenceError,
    InferenceParams,
    InferenceResult,
    apply_edits,
    check_consistency,
    explain,
    infer,
    parse_edits,
    whatif,
)
from .kb import (
    AliasTable,
    EventRecord,
    IngestReport,
    KnowledgeBase,
    KnowledgeBaseError,
    TypeHierarchy,
    ingest_events,
    resolve_concept,
)
from .metrics import (
    AnnotationError,
    MetricsReport,
    compute_metrics,
    validate_annotations,
)
from .model import (
    CausalModel,
    SchemaError,
    from_json,
    structural_equal,
    to_json,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AliasTable",
    "AnnotationError",
    "BuildError",
    "BuildResult",
    "CausalModel",
    "Edit",
    "EditRejection",
    "EventRecord",
    "InferenceError",
    "InferenceParams",
    "InferenceResult",
    "IngestReport",
    "KnowledgeBase",
    "KnowledgeBaseError",
    "Lexicon",
    "MetricsReport",
    "ModelSyntaxError",
    "ParseError",
    "SchemaError",
    "SearchParams",
    "Template",
    "TypeHierarchy",
    "apply_edits",
    "build_map",
    "check_consistency",
    "compute_metrics",
    "explain",
    "from_json",
    "generalize_map",
    "infer",
    "ingest_events",
    "instantiate_template",
    "map_predicate",
    "parse_edits",
    "parse_model",
    "resolve_concept",
    "serialize_model",
    "structural_equal",
    "to_json",
    "try_parse",
    "validate",
    "validate_annotations",
    "whatif",
]
