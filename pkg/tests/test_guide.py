import json
import random

import pytest

from nexus.core import DateSpan
from nexus.errors import DomainError
from nexus.guide import (
    CopyAssertion,
    GuideConfig,
    biography,
    build_guide,
    confirm_copy,
    copies_of,
    map_features,
    suggest_copies,
    timeline_query,
    title_similarity,
    title_trigrams,
)
from nexus.portal import Portal

from conftest import load_four_archives, make_config

from oracles import oracle_similarity


@pytest.fixture()
def portal(fixture_dir, tmp_path) -> Portal:
    p = Portal.open(make_config(fixture_dir, str(tmp_path / "data")))
    load_four_archives(p, fixture_dir)
    return p


@pytest.fixture()
def guide(portal, fixture_dir):
    return portal.build_guide(GuideConfig.load(f"{fixture_dir}/guide-terezin.json"))


class TestBuildGuide:
    def test_four_repositories_in_scope(self, guide):
        assert len(guide.repository_ids) == 4
        assert guide.unit_ids  # all imported units are held by scope repos

    def test_empty_scope_is_valid(self, portal):
        built = portal.build_guide(GuideConfig(guide_id="empty"))
        assert built.unit_ids == set()
        assert built.stats == {"keyword": 0, "department": 0, "map": 0,
                               "timeline": 0, "person": 0}

    def test_missing_reference_listed(self, portal, fixture_dir):
        config = GuideConfig.load(f"{fixture_dir}/guide-terezin.json")
        config.places.append("pl-ghost")
        config.biographies.append("per-ghost")
        with pytest.raises(DomainError) as err:
            portal.build_guide(config)
        assert err.value.code == "unknown-reference"
        assert "place:pl-ghost" in err.value.details["missing"]
        assert "person:per-ghost" in err.value.details["missing"]

    def test_multiple_access_paths_reach_daily_bulletin(self, portal, guide):
        # keyword path and department path both reach the bulletin unit
        bulletin = "jmp/terezin/bulletins/tb-440501"
        subjects = {n.id for n in portal.graph.neighbors(bulletin, "subject", "out")}
        departments = {n.id for n in portal.graph.neighbors(bulletin, "memberOfDepartment", "out")}
        keyword_tree = {"kw-root"} | portal.thesaurus.narrower_closure("kw-root")
        department_tree = {"dep-root"} | portal.thesaurus.narrower_closure("dep-root")
        assert subjects & keyword_tree
        assert departments & department_tree
        assert guide.stats["keyword"] > 0
        assert guide.stats["department"] > 0


class TestMapFeatures:
    def test_every_place_is_a_feature_with_wgs84_geometry(self, portal, guide):
        collection = map_features(guide, portal.graph, portal.store)
        assert collection["type"] == "FeatureCollection"
        assert len(collection["features"]) == len(guide.place_ids)
        for feature in collection["features"]:
            geometry = feature["geometry"]
            if geometry["type"] == "Point":
                lon, lat = geometry["coordinates"]
                assert -180 <= lon <= 180 and -90 <= lat <= 90
            else:
                assert geometry["type"] == "Polygon"
                ring = geometry["coordinates"][0]
                assert ring[0] == ring[-1]

    def test_linked_unit_counts_match_edge_scan(self, portal, guide):
        collection = map_features(guide, portal.graph, portal.store)
        for feature in collection["features"]:
            place_id = feature["id"]
            expected = {
                e.src for e in portal.graph.edges()
                if e.dst == place_id and e.label in ("aboutPlace", "locatedAt")
                and e.src in guide.unit_ids
            }
            assert feature["properties"]["linkedUnitCount"] == len(expected)

    def test_zero_link_place_still_present(self, portal, guide):
        collection = map_features(guide, portal.graph, portal.store)
        counts = {f["id"]: f["properties"]["linkedUnitCount"] for f in collection["features"]}
        assert counts["pl-crematorium"] == 0

    def test_placed_plus_unplaced_conserves_scope(self, portal, guide):
        collection = map_features(guide, portal.graph, portal.store)
        assert collection["placedUnits"] + collection["unplacedUnits"] == len(guide.unit_ids)


class TestTimeline:
    def test_liberation_retrieved_for_1945(self, portal, guide):
        events = timeline_query(guide, portal.graph, "1945-01", "1945-12")
        assert "ev-liberation" in [e.event_id for e in events]

    def test_range_before_everything_is_empty(self, portal, guide):
        assert timeline_query(guide, portal.graph, "1800", "1900") == []

    def test_invalid_range(self, portal, guide):
        with pytest.raises(DomainError) as err:
            timeline_query(guide, portal.graph, "1946", "1944")
        assert err.value.code == "invalid-range"

    def test_overlap_filter_matches_brute_force(self, portal, guide):
        lo, hi = DateSpan("1941"), DateSpan("1944-06-23")
        window = DateSpan("1941", "1944-06-23")
        got = {e.event_id for e in timeline_query(guide, portal.graph, "1941", "1944-06-23")}
        expected = set()
        from nexus.guide import event_from_node
        for event_id in guide.event_ids:
            event = event_from_node(portal.graph.node(event_id))
            if event.when.overlaps(window):
                expected.add(event_id)
        assert got == expected

    def test_order_start_then_precision_then_id(self, portal, guide):
        events = timeline_query(guide, portal.graph, "1941", "1999")
        keys = [e.sort_key() for e in events]
        assert keys == sorted(keys)
        # the year-precision film event sorts before any June 1944 day event
        ids = [e.event_id for e in events]
        assert ids.index("ev-propaganda-film") < ids.index("ev-red-cross-visit")


class TestCopySuggestion:
    def test_planted_duplicates_all_recovered(self, portal, guide, fixture_dir):
        manifest = json.load(open(f"{fixture_dir}/manifest.json", encoding="utf-8"))
        candidates = suggest_copies(guide, portal.graph, 0.85)
        found_pairs = {(c.unit_a, c.unit_b) for c in candidates}
        for group in manifest["copyGroups"]:
            members = [f"{code}/{path}" for code, path in group["members"]]
            for i, a in enumerate(members):
                for b in members[i + 1:]:
                    assert tuple(sorted((a, b))) in found_pairs

    def test_identical_titles_score_one(self):
        score = title_similarity("Tagesbefehl 1.5.1944", "Tagesbefehl 1.5.1944",
                                 [DateSpan("1944-05-01")], [DateSpan("1944-05-01")])
        assert score == 1.0

    def test_disjoint_titles_not_emitted(self, portal, guide):
        candidates = suggest_copies(guide, portal.graph, 0.85)
        for candidate in candidates:
            title_a = portal.graph.node(candidate.unit_a).properties["title"]
            title_b = portal.graph.node(candidate.unit_b).properties["title"]
            assert title_trigrams(title_a) & title_trigrams(title_b)

    def test_similarity_symmetric_on_random_pairs(self):
        rng = random.Random(8)
        words = ["tagesbefehl", "transport", "listy", "zpráva", "1944", "terezín"]
        for _ in range(200):
            a = " ".join(rng.choice(words) for _ in range(rng.randint(1, 5)))
            b = " ".join(rng.choice(words) for _ in range(rng.randint(1, 5)))
            overlap = rng.random() < 0.5
            dates = [DateSpan("1944")] if overlap else [DateSpan("1943")]
            left = title_similarity(a, b, dates, [DateSpan("1944")])
            right = title_similarity(b, a, [DateSpan("1944")], dates)
            assert left == right
            assert left == pytest.approx(
                oracle_similarity(a, b, overlap), abs=1e-12)

    def test_candidates_match_all_pairs_oracle(self, portal, guide):
        threshold = 0.85
        got = {(c.unit_a, c.unit_b): c.similarity
               for c in suggest_copies(guide, portal.graph, threshold)}
        units = []
        for unit_id in guide.unit_ids:
            node = portal.graph.node(unit_id)
            repo = portal.graph.neighbors(unit_id, "heldBy", "out")[0].id
            spans = []
            for text in node.properties.get("datesOfCreation", []):
                spans.append(DateSpan.from_text(str(text)))
            units.append((unit_id, repo, str(node.properties.get("title", "")), spans))
        expected = {}
        for i, (id_a, repo_a, title_a, spans_a) in enumerate(units):
            for id_b, repo_b, title_b, spans_b in units[i + 1:]:
                if repo_a == repo_b:
                    continue
                overlap = any(x.overlaps(y) for x in spans_a for y in spans_b)
                score = oracle_similarity(title_a, title_b, overlap)
                if score >= threshold:
                    expected[tuple(sorted((id_a, id_b)))] = score
        assert got.keys() == expected.keys()
        for pair, score in expected.items():
            assert got[pair] == pytest.approx(score, abs=1e-12)

    def test_threshold_validation(self, portal, guide):
        with pytest.raises(DomainError):
            suggest_copies(guide, portal.graph, 0.0)
        with pytest.raises(DomainError):
            suggest_copies(guide, portal.graph, 1.5)


class TestConfirmCopy:
    def test_confirm_adds_symmetric_edge(self, portal, guide):
        candidates = suggest_copies(guide, portal.graph, 0.85)
        first = candidates[0]
        assertion = confirm_copy(guide, portal.graph, first.unit_a, first.unit_b, "catalogued")
        assert assertion.status == "confirmed"
        assert first.unit_b in copies_of(portal.graph, first.unit_a)
        assert first.unit_a in copies_of(portal.graph, first.unit_b)

    def test_confirm_twice_is_idempotent(self, portal, guide):
        candidates = suggest_copies(guide, portal.graph, 0.85)
        first = candidates[0]
        confirm_copy(guide, portal.graph, first.unit_a, first.unit_b)
        edges_before = portal.graph.edge_count()
        again = confirm_copy(guide, portal.graph, first.unit_a, first.unit_b)
        assert again.status == "confirmed"
        assert portal.graph.edge_count() == edges_before

    def test_unknown_assertion(self, portal, guide):
        with pytest.raises(DomainError) as err:
            confirm_copy(guide, portal.graph, "jmp/terezin", "yv/o7")
        assert err.value.code == "unknown-assertion"

    def test_confirmed_links_survive_rebuild_and_reimport(self, portal, guide, fixture_dir):
        candidates = suggest_copies(guide, portal.graph, 0.85)
        for candidate in candidates:
            confirm_copy(guide, portal.graph, candidate.unit_a, candidate.unit_b)
        load_four_archives(portal, fixture_dir)  # re-import everything
        rebuilt = portal.build_guide(GuideConfig.load(f"{fixture_dir}/guide-terezin.json"))
        bulletin = "jmp/terezin/bulletins/tb-440501"
        assert len(copies_of(portal.graph, bulletin)) >= 2
        # re-suggesting excludes already confirmed pairs
        assert suggest_copies(rebuilt, portal.graph, 0.85) == []


class TestBiography:
    def test_scheck_links_documentation_project_units(self, portal, guide):
        result = biography(guide, portal.graph, portal.store, "per-scheck")
        assert "jmp/terezin/docproject" in result["linkedUnits"]
        assert result["person"]["biography"]
        assert "ev-documentation-project" in result["events"]

    def test_person_without_units_is_valid(self, portal, guide):
        result = biography(guide, portal.graph, portal.store, "per-adler")
        assert result["linkedUnits"] == []

    def test_linked_units_match_edge_scan(self, portal, guide):
        for person_id in guide.biography_ids:
            result = biography(guide, portal.graph, portal.store, person_id)
            expected = sorted(
                e.src for e in portal.graph.edges()
                if e.label == "aboutPerson" and e.dst == person_id
                and e.src in guide.unit_ids
            )
            assert result["linkedUnits"] == expected

    def test_unknown_person(self, portal, guide):
        with pytest.raises(DomainError) as err:
            biography(guide, portal.graph, portal.store, "per-ghost")
        assert err.value.code == "unknown-person"
