"""Lightweight domain ontology construction from plain and parsed text corpora."""

__version__ = "0.1.0"

from .cleaning import TextCleaner, clean_document, edit_distance
from .cluster import TTAClustering, build_distance_matrix, ngd_distance, tta_cluster
from .corpus import Document, build_frequency_index, ingest_directory
from .evaluation import evaluate_ontology, lexical_overlap, ontological_loss
from .frames import FrameExtractor, chunk_noun_phrases, extract_frames
from .ontology import assemble_ontology, export_dot, export_json, export_turtle
from .termhood import TermRecognizer, rank_terms

__all__ = [
    "Document", "FrameExtractor", "TTAClustering", "TermRecognizer", "TextCleaner",
    "assemble_ontology", "build_distance_matrix", "build_frequency_index", "chunk_noun_phrases",
    "clean_document", "edit_distance", "evaluate_ontology", "export_dot", "export_json",
    "export_turtle", "extract_frames", "ingest_directory", "lexical_overlap", "ngd_distance",
    "ontological_loss", "rank_terms", "tta_cluster",
]
