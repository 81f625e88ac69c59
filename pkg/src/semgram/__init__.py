"""semgram: joint induction of a context-free grammar and an ontology from
layered, semantically annotated text.

Sentences arrive as parallel annotation layers; a top-down parser turns them
into semantic trees; the spans no rule could expand are generalized into
candidate rules; a human (or a decision script) assigns each promoted rule a
property; grammar and trees then yield taxonomy assertions, long-tail
instances, and training data for instance-level relation models.
"""

from .corpus import (
    LEXICAL, CorpusError, LayeredSentence, Term, TermInterpretation, Token,
    interpret, load_corpus, make_sentence, save_corpus,
)
from .grammar import (
    Grammar, GrammarSnapshot, Rule, Symbol, instantiate_universal,
    load_grammar, parse_rule_text, parse_symbol, save_grammar,
)
from .parsing import (
    KERNEL_NAME, MatchLimits, ParseStats, ReliabilityParams, SemanticNode,
    SemanticTree, corpus_stats, match, parse, parse_corpus, parse_term,
    reliability,
)
from .induction import (
    CandidateRule, InductionSession, LayerPriority, StopCriteria,
    estimate_trigger_probability, generalize_bottom_up, generalize_layers,
    propose_rules, run_scripted,
)
from .ontology import (
    Assertion, Ontology, extract_instances, extract_taxonomy, infer_relations,
)

__version__ = "0.1.0"
