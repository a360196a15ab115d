"""capqa: build VQA datasets from annotated image-caption corpora."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    AnnotatedSentence,
    CaptionRecord,
    Corpus,
    CorpusError,
    DatasetSplit,
    EntitySpan,
    ImageRef,
    Provenance,
    QAPair,
    Token,
    load_corpus,
    save_corpus,
    validate_corpus,
)
from .ptb import ParseTree, leaf_yield, parse_ptb, render_ptb  # noqa: F401
from .treequery import apply_edits, compile_pattern, find_all  # noqa: F401
