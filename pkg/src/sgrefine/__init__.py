"""Discourse-level scene-graph toolkit: flattened graph codec, sentence-merge
generation, triple-level edit refinement, graph similarity metrics, and a
downstream evaluation suite."""

__version__ = "0.1.0"

from .dataio import (
    DataError,
    DatasetManifest,
    DuplicateId,
    build_edit_dataset,
    load_dfoil,
    load_edit_tuples,
    load_error_annotations,
    load_instances,
    save_instances,
)
from .edits import (
    CorruptionConfig,
    EditActions,
    EditTuple,
    EmptyPool,
    FlagLengthMismatch,
    apply_edits,
    as_edit_tuple,
    corrupt,
    derive_edits,
    validate_insertions,
)
from .evalsuite import (
    CorpusStats,
    DegenerateInput,
    DFoilItem,
    EmptyInput,
    ErrorAnnotation,
    RankedPair,
    corpus_stats,
    dfoil_accuracy,
    error_rates,
    kendall_tau_b,
    mattr,
    mtld,
    pairwise_agreement,
    select_diverse,
    spearman_rho,
    tfidf_retrieve,
)
from .graph import (
    DEFAULT_POLICY,
    NormalizationPolicy,
    SceneGraph,
    StrictParseError,
    Triple,
    canonicalize,
    parse_graph,
    serialize_graph,
)
from .merge import (
    FileSentenceParser,
    Instance,
    MissingSentenceGraphs,
    generate_initial,
    merge_graphs,
    split_sentences,
)
from .metrics import (
    ScoreReport,
    SynonymLexicon,
    bsspice,
    default_embedder,
    score_graphs,
    soft_spice_directed,
    spice,
)
from .refine import (
    OracleProgrammer,
    ProgrammerProtocolError,
    ProgrammerUnavailable,
    RefinementConfig,
    RefinementTrace,
    RemoteProgrammer,
    ReplayProgrammer,
    heuristic_programmer,
    refine,
)
