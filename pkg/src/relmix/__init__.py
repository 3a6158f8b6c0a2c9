"""Semantic relatedness from encyclopedia concept vectors, a lexical
ontology and collocation statistics, plus the evaluation harness."""

from .collocation import NgramTable, collocation_index, load_ngrams, mixed_collocation
from .combine import CombineParams, ew, ewc, sigmoid, tune
from .corpus import FilterCriteria, Page, Section, clean_wikitext, filter_pages, parse_dump
from .esa import InvertedIndex, SparseVector, build_index, concept_vector, esa, index_stats
from .evaluation import (
    EvalReport,
    WordPair,
    evaluate_measure,
    leave_one_out_stability,
    load_test_set,
    lowess,
    progressive_removal,
    spearman,
)
from .svr import SvrModel, cross_validate, predict, train_svr
from .wordnet import WordnetGraph, compute_ic, load_wordnet, path_length, synset_measure, word_measure

__version__ = "0.1.0"
