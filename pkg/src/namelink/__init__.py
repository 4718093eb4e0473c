"""Author name disambiguation for bibliographic corpora.

The pipeline: parse records, group them into blocks by atomic name
variate (first initial plus last name), train one neural classifier per
ambiguous block, and resolve query names by correspondence frequency,
falling back to the classifier only when a name has several known
bearers.
"""

__version__ = "0.1.0"

from .records import (
    AuthorRef,
    BibRecord,
    atomic_name_variate,
    make_record,
    parse_author_name,
    read_records,
    variate_of_name,
    write_records,
)
from .blocking import (
    Block,
    NameIndex,
    assemble_block,
    build_name_index,
    correspondence_frequency,
    split_block,
)
from .embeddings import (
    CHAR_DIM,
    EmbeddingStore,
    HashingNameEmbedder,
    MissingEmbedding,
    Providers,
    StoreProvider,
    assemble_input,
    builtin_char_embedder,
    load_store,
    save_store,
)
from .network import (
    Batch,
    FitConfig,
    HiddenSpec,
    ModelParams,
    checkpoint_load,
    checkpoint_save,
    fit,
    forward,
    init_model,
)
from .training import TrainConfig, generate_samples, train_block
from .inference import (
    ModelRegistry,
    ModelUnavailable,
    Resolution,
    predict_author,
    resolve,
)
from .evaluation import EvalReport, evaluate_block, metrics_from_confusion
from .synth import SynthSpec, build_text_store, generate_corpus

__all__ = [
    "AuthorRef",
    "BibRecord",
    "Batch",
    "Block",
    "CHAR_DIM",
    "EmbeddingStore",
    "EvalReport",
    "FitConfig",
    "HashingNameEmbedder",
    "HiddenSpec",
    "MissingEmbedding",
    "ModelParams",
    "ModelRegistry",
    "ModelUnavailable",
    "NameIndex",
    "Providers",
    "Resolution",
    "StoreProvider",
    "SynthSpec",
    "TrainConfig",
    "assemble_block",
    "assemble_input",
    "atomic_name_variate",
    "build_name_index",
    "build_text_store",
    "builtin_char_embedder",
    "checkpoint_load",
    "checkpoint_save",
    "correspondence_frequency",
    "evaluate_block",
    "fit",
    "forward",
    "generate_corpus",
    "generate_samples",
    "init_model",
    "load_store",
    "make_record",
    "metrics_from_confusion",
    "parse_author_name",
    "predict_author",
    "read_records",
    "resolve",
    "save_store",
    "split_block",
    "train_block",
    "variate_of_name",
    "write_records",
]
