from typing import List, Sequence, Tuple

from adrsignal.claims.models import CodeKind, CodeSequence, CodeVocabulary, PatientRecord
from adrsignal.errors import EmptyInputError, VocabularyError


def build_vocabularies(records: Sequence[PatientRecord]) -> Tuple[CodeVocabulary, CodeVocabulary]:
    """
    Assign dense ids to every drug and disease code in first-appearance order.

    Records are walked by patient id, visits by date, and codes within a
    visit in string order, so the same corpus always yields the same ids.
    """
    if not records:
        raise EmptyInputError("no records to build vocabularies from")
    drugs: dict = {}
    diseases: dict = {}
    for record in sorted(records, key=lambda r: r.patient_id):
        for visit in record.visits:
            for code in sorted(visit.prescriptions):
                drugs.setdefault(code, len(drugs))
            for code in sorted(visit.diagnoses):
                diseases.setdefault(code, len(diseases))
    return (
        CodeVocabulary.from_codes(CodeKind.DRUG, drugs),
        CodeVocabulary.from_codes(CodeKind.DISEASE, diseases),
    )


def extract_sequences(record: PatientRecord, vocab: CodeVocabulary, kind: CodeKind) -> CodeSequence:
    """Temporal code sequence of one kind; within a visit codes follow ascending id."""
    kind = CodeKind(kind)
    if vocab.kind is not kind:
        raise VocabularyError(f"{vocab.kind.value} vocabulary used for {kind.value} sequence")
    tokens: List[int] = []
    for visit in record.visits:
        ids = []
        for code in visit.codes(kind):
            if code not in vocab:
                raise VocabularyError(f"{kind.value} code {code!r} missing from vocabulary")
            ids.append(vocab.id_of(code))
        tokens.extend(sorted(ids))
    return CodeSequence(kind, tuple(tokens))


def build_corpus(records: Sequence[PatientRecord], vocab: CodeVocabulary) -> List[CodeSequence]:
    """Skip-gram corpus of one kind; patients with fewer than two codes contribute nothing."""
    corpus = []
    for record in sorted(records, key=lambda r: r.patient_id):
        seq = extract_sequences(record, vocab, vocab.kind)
        if len(seq) >= 2:
            corpus.append(seq)
    return corpus
