import pytest

from nexus.fixtures import generate_fixtures
from nexus.guide import GuideConfig
from nexus.ingest import load_profile
from nexus.portal import Portal, ServiceConfig


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> str:
    out = tmp_path_factory.mktemp("corpus")
    generate_fixtures(str(out), seed=42)
    return str(out)


def make_config(fixture_dir: str, data_dir: str) -> ServiceConfig:
    return ServiceConfig(
        data_directory=data_dir,
        thesaurus_files=[f"{fixture_dir}/thesaurus.tsv"],
        concordance_files=[f"{fixture_dir}/concordance.tsv"],
        persons_files=[f"{fixture_dir}/persons.jsonl"],
        places_files=[f"{fixture_dir}/places.jsonl"],
        events_files=[f"{fixture_dir}/events.jsonl"],
        repositories_files=[f"{fixture_dir}/repositories.jsonl"],
    )


def load_four_archives(portal: Portal, fixture_dir: str) -> None:
    """File-import all four exports (harvest is exercised separately)."""
    for code, suffix in [("jmp", "jmp-terezin.xml"), ("yv", "yv-terezin.xml"),
                         ("bt", "bt-files.csv"), ("tm", "tm-items.csv")]:
        profile = load_profile(f"{fixture_dir}/profiles/{code}.json")
        with open(f"{fixture_dir}/{suffix}", "rb") as handle:
            portal.ingest_bytes(code, profile, handle.read())


@pytest.fixture(scope="session")
def loaded_portal(fixture_dir, tmp_path_factory) -> Portal:
    """A portal with the whole fixture corpus imported and the guide built.

    Session-scoped: tests using it must not mutate it (mutation tests build
    their own portal).
    """
    data_dir = tmp_path_factory.mktemp("portal-data")
    portal = Portal.open(make_config(fixture_dir, str(data_dir)))
    load_four_archives(portal, fixture_dir)
    portal.build_guide(GuideConfig.load(f"{fixture_dir}/guide-terezin.json"))
    return portal
