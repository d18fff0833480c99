__all__ = [
    "CodeKind",
    "Visit",
    "PatientRecord",
    "CodeSequence",
    "CodeVocabulary",
    "IngestReport",
    "read_claims",
    "ingest_claims",
    "build_vocabularies",
    "extract_sequences",
    "build_corpus",
]

from .models import CodeKind, Visit, PatientRecord, CodeSequence, CodeVocabulary
from .ingest import IngestReport, read_claims, ingest_claims
from .vocabulary import build_vocabularies, extract_sequences, build_corpus
