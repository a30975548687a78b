"""Reference-based paper-by-paper subject classification.

Classifies individual publications into a category scheme by iteratively
propagating fractional category weights from citing papers onto cited
references and back, with journal-limited (JL) and unlimited (U1) variants,
threshold pruning of multi-assignments, and the full set of structural and
comparison indicators.
"""

__version__ = "0.1.0"

from .assign import PruneConfig, prune, prune_classification
from .corpus import Corpus, CorpusError, Paper, eligible_papers, load_corpus
from .engine import (Classification, EngineConfig, accumulate_reference_vectors,
                     propagate_limited, propagate_unlimited, run,
                     squared_difference)
from .scheme import (CategoryScheme, JournalAssignment, SchemeError,
                     fractionalize_journal, load_scheme, reference_scheme)

__all__ = [
    "Classification", "CategoryScheme", "Corpus", "CorpusError", "EngineConfig",
    "JournalAssignment", "Paper", "PruneConfig", "SchemeError",
    "accumulate_reference_vectors", "eligible_papers", "fractionalize_journal",
    "load_corpus", "load_scheme", "propagate_limited", "propagate_unlimited",
    "prune", "prune_classification", "reference_scheme", "run",
    "squared_difference",
]
