import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conceptbench.corpus import (
    CANONICAL_SECTIONS,
    analyze,
    build_index,
    document_tokens,
    index_from_json,
    index_to_json,
    load_documents,
    match_phrase,
    select_sections,
    serialize_corpus,
)
from conceptbench.errors import (
    ConfigurationError,
    IngestionError,
    QueryError,
    XmlSyntaxError,
)

from conftest import SURVEY_CORPUS_XML


def corpus_xml(*docs: str, language: str = "en") -> bytes:
    body = "\n".join(docs)
    return f'<corpus language="{language}">\n{body}\n</corpus>'.encode()


def doc_xml(doc_id: str, text: str = "", timestamp: str = "2009-06-01T10:00:00Z",
            extra: str = "") -> str:
    return (f'<document id="{doc_id}" timestamp="{timestamp}" '
            f'url="doc://{doc_id}"><abstract>{text}</abstract>{extra}'
            f'</document>')


class TestLoadDocuments:
    def test_identity_ingestion(self):
        corpus = load_documents(corpus_xml(
            doc_xml("D1"), doc_xml("D2"), doc_xml("D3")))
        assert len(corpus) == 3
        assert [d.id for d in corpus] == ["D1", "D2", "D3"]

    def test_duplicate_id(self):
        with pytest.raises(IngestionError, match="duplicate document id: D1"):
            load_documents(corpus_xml(doc_xml("D1"), doc_xml("D1")))

    def test_survey_structure(self, survey_corpus):
        # title/abstract/keywords/body all populated on every paper stub
        for doc in survey_corpus:
            for section in ("title", "abstract", "keywords", "body"):
                assert doc.sections[section]

    def test_missing_sections_become_empty(self):
        corpus = load_documents(corpus_xml(doc_xml("D1", "only abstract")))
        doc = corpus.get("D1")
        assert set(doc.sections) == set(CANONICAL_SECTIONS)
        assert doc.sections["body"] == ""

    def test_malformed_xml_reports_position(self):
        with pytest.raises(XmlSyntaxError) as err:
            load_documents(b"<corpus language='en'><document></corpus>")
        assert err.value.line >= 1

    def test_unparseable_timestamp_names_document(self):
        with pytest.raises(IngestionError, match="D9"):
            load_documents(corpus_xml(
                doc_xml("D9", timestamp="yesterday-ish")))

    def test_future_timestamp_rejected(self):
        with pytest.raises(IngestionError, match="future"):
            load_documents(corpus_xml(
                doc_xml("D1", timestamp="2999-01-01T00:00:00Z")))

    def test_undated_document_accepted(self):
        xml = corpus_xml(
            '<document id="D1" url="doc://D1"><title>t</title></document>')
        corpus = load_documents(xml)
        assert corpus.get("D1").timestamp is None
        assert not corpus.fully_timestamped

    def test_extra_elements_become_structured_fields(self):
        corpus = load_documents(corpus_xml(doc_xml(
            "D1", extra='<field name="person">P1</field>'
                        "<vehicle>sedan</vehicle>")))
        doc = corpus.get("D1")
        assert doc.structured_fields == {"person": "P1", "vehicle": "sedan"}

    def test_language_mismatch(self):
        with pytest.raises(ConfigurationError):
            load_documents(corpus_xml(doc_xml("D1")), language="dutch")

    def test_stream_input(self):
        corpus = load_documents(io.BytesIO(corpus_xml(doc_xml("D1"))))
        assert len(corpus) == 1


class TestRoundTrip:
    def test_serialize_reingests_equal(self, survey_corpus):
        again = load_documents(serialize_corpus(survey_corpus))
        assert again == survey_corpus
        for a, b in zip(survey_corpus, again):
            assert a == b

    def test_serialization_deterministic(self, survey_corpus):
        assert serialize_corpus(survey_corpus) == \
            serialize_corpus(survey_corpus)


class TestSelectSections:
    def test_excludes_body(self, survey_corpus):
        doc = survey_corpus.get("P1")
        text = select_sections(doc, {"title", "abstract", "keywords"})
        assert "fuzzy methods" not in text
        assert "data mining" in text

    def test_all_sections(self, survey_corpus):
        doc = survey_corpus.get("P1")
        text = select_sections(doc, set(CANONICAL_SECTIONS))
        assert "fuzzy methods" in text

    def test_absent_section_contributes_nothing(self):
        corpus = load_documents(corpus_xml(doc_xml("D1", "text")))
        assert select_sections(corpus.get("D1"), {"keywords"}) == ""

    def test_unknown_section_rejected(self, survey_corpus):
        with pytest.raises(ConfigurationError):
            select_sections(survey_corpus.get("P1"), {"footnotes"})


class TestAnalyze:
    def test_english_golden(self):
        # frozen output of the shipped english analyzer
        assert analyze("Data Mining and KDD", "english") == \
            ["data", "mine", "kdd"]

    def test_empty(self):
        assert analyze("", "english") == []
        assert analyze("", "russian") == []

    def test_deterministic(self):
        text = "The quick brown foxes are jumping over lazy dogs!"
        assert analyze(text, "english") == analyze(text, "english")

    def test_stop_words_dropped(self):
        assert "the" not in analyze("the lattice", "english")
        assert analyze("de politie", "dutch") == ["politie"]

    def test_unsupported_language(self):
        with pytest.raises(ConfigurationError):
            analyze("hello", "klingon")

    def test_digits_are_boundaries(self):
        assert analyze("abc123def", "english") == ["abc", "def"]

    def test_russian_golden(self):
        assert analyze("Скрытые марковские модели", "russian") == \
            ["скрыт", "марковск", "модел"]

    def test_dutch_golden(self):
        assert analyze("De lichamelijke opvoeding", "dutch") == \
            ["lichamelijk", "opvoed"]

    @given(st.text(max_size=80))
    @settings(max_examples=200, deadline=None)
    def test_stemming_fixpoint(self, text):
        # analyze(join(analyze(s))) reaches a fixpoint after one extra pass
        once = analyze(" ".join(analyze(text, "english")), "english")
        twice = analyze(" ".join(once), "english")
        assert once == twice


class TestIndex:
    def test_counts_exact(self):
        corpus = load_documents(corpus_xml(
            doc_xml("D1", "data mining and more data mining")))
        index = build_index(corpus, {"abstract"})
        assert index.occurrence_count("data", "D1", "abstract") == 2
        assert index.occurrence_count("mine", "D1", "abstract") == 2

    def test_empty_sections_zero_postings(self, survey_corpus):
        index = build_index(survey_corpus, set())
        assert index.postings == {}

    def test_rebuild_byte_identical(self, survey_corpus):
        a = build_index(survey_corpus, {"title", "abstract", "keywords"})
        b = build_index(survey_corpus, {"title", "abstract", "keywords"})
        assert index_to_json(a) == index_to_json(b)

    def test_json_round_trip(self, survey_index):
        again = index_from_json(index_to_json(survey_index))
        assert again == survey_index
        assert index_to_json(again) == index_to_json(survey_index)

    def test_empty_corpus_rejected(self):
        from conceptbench.corpus.model import Corpus, Provenance
        from datetime import datetime, timezone
        corpus = Corpus(documents=(), language="english",
                        provenance=Provenance("x", datetime.now(timezone.utc)))
        with pytest.raises(ConfigurationError):
            build_index(corpus, {"title"})

    def test_postings_partition_token_counts(self, survey_corpus,
                                             survey_index):
        # sum of per-term counts in a section == token count of that section
        for doc in survey_corpus:
            for section in ("title", "abstract", "keywords"):
                tokens = analyze(doc.sections[section],
                                 survey_corpus.language)
                total = sum(
                    survey_index.occurrence_count(term, doc.id, section)
                    for term in set(tokens))
                assert total == len(tokens)


class TestMatchPhrase:
    def test_paper_term_cluster_example(self, survey_index):
        # "data mining" matches P1; "data exploration" must not match the
        # attribute-exploration paper P3
        assert "P1" in match_phrase(survey_index, "data mining")
        assert "P3" not in match_phrase(survey_index, "data exploration")

    def test_adjacency_required(self):
        corpus = load_documents(corpus_xml(
            doc_xml("D1", "data from text mining")))
        index = build_index(corpus, {"abstract"})
        assert match_phrase(index, "data mining") == set()

    def test_absent_phrase(self, survey_index):
        assert match_phrase(survey_index, "quantum entanglement") == set()

    def test_empty_after_analysis(self, survey_index):
        with pytest.raises(QueryError):
            match_phrase(survey_index, "the and of")

    def test_match_consistency_brute_scan(self, survey_corpus, survey_index):
        # oracle: re-scan analyzed section tokens for contiguous runs
        phrases = ["data mining", "inverted index", "formal context",
                   "event sequence", "data", "survey"]
        sections = {"title", "abstract", "keywords"}
        for phrase in phrases:
            needle = analyze(phrase, survey_corpus.language)
            expected = set()
            for doc in survey_corpus:
                for section in sections:
                    hay = analyze(doc.sections[section],
                                  survey_corpus.language)
                    for start in range(len(hay) - len(needle) + 1):
                        if hay[start:start + len(needle)] == needle:
                            expected.add(doc.id)
            assert match_phrase(survey_index, phrase) == expected, phrase

    def test_document_tokens_cover_sections(self, survey_corpus):
        tokens = document_tokens(survey_corpus, "P6", {"abstract"})
        assert tokens == ["sort", "network", "consid", "delight"]
