import math
import random

import pytest

from nexus.errors import DomainError
from nexus.graph import Graph
from nexus.helpdesk import (
    DEFAULT_STOPWORDS,
    KnowledgeBase,
    InstitutionProfile,
    build_kb,
    question_tokens,
    route,
)
from nexus.vocab import Thesaurus, tokenize

from oracles import oracle_route

WORDS = ["transport", "lists", "ghetto", "artwork", "testimony", "diary", "card",
         "bulletin", "children", "newspapers", "barracks", "terezin"]


def kb_from_texts(texts: dict[str, str]) -> KnowledgeBase:
    tokenized = {pid: tokenize(text) for pid, text in texts.items()}
    n = len(texts)
    df: dict[str, int] = {}
    for tokens in tokenized.values():
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    profiles = {}
    for pid, tokens in tokenized.items():
        tf: dict[str, int] = {}
        for token in tokens:
            tf[token] = tf.get(token, 0) + 1
        vector = {t: (1.0 + math.log(c))
                  * (1.0 if n == 1 else math.log((n + 1) / (df[t] + 1)))
                  for t, c in tf.items()}
        profiles[pid] = InstitutionProfile(pid, texts[pid], vector, contact=f"{pid}@x")
    return KnowledgeBase(profiles)


class TestBuildKb:
    def test_empty_registry_gives_empty_kb(self):
        kb = build_kb(Graph(), Thesaurus())
        assert len(kb) == 0

    def test_four_archive_fixture_gives_four_profiles(self, loaded_portal):
        assert len(loaded_portal.kb) == 4

    def test_repository_without_units_excluded(self, loaded_portal, fixture_dir, tmp_path):
        from conftest import make_config
        from nexus.portal import Portal
        from nexus.core import Repository
        portal = Portal.open(make_config(fixture_dir, str(tmp_path / "d")))
        portal.register_repository(
            Repository(ehri_id="9999", authorized_form_of_name="Empty Archive",
                       country="CZ", contact="x@y"), code="mt")
        portal.rebuild()
        assert "9999" not in portal.kb.profiles

    def test_profile_weights_match_formula_recomputation(self, loaded_portal):
        kb = loaded_portal.kb
        n = len(kb.profiles)
        df: dict[str, int] = {}
        for profile in kb.profiles.values():
            for term in set(tokenize(profile.profile_text)):
                df[term] = df.get(term, 0) + 1
        for profile in kb.profiles.values():
            tf: dict[str, int] = {}
            for token in tokenize(profile.profile_text):
                tf[token] = tf.get(token, 0) + 1
            for term, count in tf.items():
                expected = (1.0 + math.log(count)) * math.log((n + 1) / (df[term] + 1))
                assert profile.term_vector[term] == pytest.approx(expected, abs=1e-12)


class TestRoute:
    def test_stopword_only_question_rejected(self, loaded_portal):
        with pytest.raises(DomainError) as err:
            loaded_portal.ask("the of and in", ["en"])
        assert err.value.code == "empty-question"

    def test_kb_not_built(self):
        thesaurus = Thesaurus()
        with pytest.raises(DomainError) as err:
            route(KnowledgeBase({}), thesaurus, "anything", ["en"])
        assert err.value.code == "kb-not-built"

    def test_transport_list_question_ranks_holder_first(self, loaded_portal):
        answer = loaded_portal.ask("Where can I find transport lists from Theresienstadt?",
                                   ["en"])
        assert answer.ranked
        # yv (2798) holds the dedicated transport list collection
        assert answer.ranked[0].repository_ehri_id == "2798"
        holders = {"2798", "4406"}
        non_holders = [r for r in answer.ranked if r.repository_ehri_id not in holders]
        for outsider in non_holders:
            assert outsider.score <= answer.ranked[0].score
        assert answer.ranked[0].contact

    def test_word_order_invariance(self, loaded_portal):
        a = loaded_portal.ask("transport lists Theresienstadt", ["en"])
        b = loaded_portal.ask("Theresienstadt lists transport", ["en"])
        assert [(r.repository_ehri_id, r.score) for r in a.ranked] == \
               [(r.repository_ehri_id, r.score) for r in b.ranked]

    def test_single_repository_kb_always_ranks_it_first(self):
        kb = kb_from_texts({"only": "testimony diary ghetto"})
        thesaurus = Thesaurus()
        answer = route(kb, thesaurus, "ghetto diary", ["en"])
        assert [r.repository_ehri_id for r in answer.ranked] == ["only"]

    def test_scores_in_unit_interval_and_sorted(self, loaded_portal):
        answer = loaded_portal.ask("artwork drawings from the technical department", ["en"])
        scores = [r.score for r in answer.ranked]
        assert all(0.0 <= s <= 1.0 + 1e-12 for s in scores)
        assert scores == sorted(scores, reverse=True)

    def test_route_matches_brute_force_oracle_on_seeded_kbs(self):
        rng = random.Random(31)
        thesaurus = Thesaurus()  # no expansion: pure cosine comparison
        for _ in range(40):
            texts = {}
            for i in range(rng.randint(1, 20)):
                texts[f"inst{i:02d}"] = " ".join(
                    rng.choice(WORDS) for _ in range(rng.randint(3, 40)))
            kb = kb_from_texts(texts)
            question_words = [rng.choice(WORDS) for _ in range(rng.randint(1, 6))]
            question = " ".join(question_words)
            answer = route(kb, thesaurus, question, ["en"])
            bag = question_tokens(question, ["en"], DEFAULT_STOPWORDS)
            expected = oracle_route({p: tokenize(t) for p, t in texts.items()}, bag)
            expected_ranked = sorted(
                [(pid, s) for pid, s in expected.items() if s > 0.0],
                key=lambda kv: (-kv[1], kv[0]))
            got = [(r.repository_ehri_id, r.score) for r in answer.ranked]
            assert [pid for pid, _ in got] == [pid for pid, _ in expected_ranked]
            for (_, got_score), (_, want_score) in zip(got, expected_ranked):
                assert got_score == pytest.approx(want_score, abs=1e-9)

    def test_expansion_reaches_profiles_in_other_languages(self, loaded_portal):
        # German query for children newspapers: only bt holds them, and its
        # catalogue says "children newspaper" in English, reached via labels
        answer = loaded_portal.ask("Kinderzeitschriften", ["en", "de", "cs"])
        assert "kw-newspaper" in answer.question_trace.matched_concepts
        assert answer.ranked
        assert answer.ranked[0].repository_ehri_id == "3115"

    def test_universal_term_scores_zero_by_idf(self, loaded_portal):
        # "Tagesbefehl" occurs in every profile: df = N makes idf zero, so no
        # institution is discriminated and nothing ranks
        answer = loaded_portal.ask("denní rozkaz", ["en", "de", "cs"])
        assert "kw-daily-bulletin" in answer.question_trace.matched_concepts
        assert answer.ranked == []
