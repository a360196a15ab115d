"""capqa-ingest: PDF/web figure extraction and caption annotation."""

__version__ = "0.1.0"

from .annotate import BuiltinAnnotator, annotate_candidates  # noqa: F401
from .crawl import crawl_pairs  # noqa: F401
from .extract import ExtractionCandidate, extract_pdf_pairs  # noqa: F401
