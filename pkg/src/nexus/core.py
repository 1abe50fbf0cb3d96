"""Canonical archival description types and their validators.

DocumentaryUnit and Repository follow the multi-level description standards
the portal integrates (unit hierarchies fonds..item, institution records with
contact data). Validators report problems instead of raising, so dirty
partner exports can be quarantined record by record at import time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from typing import TYPE_CHECKING, Optional

from nexus.errors import DomainError

if TYPE_CHECKING:
    from nexus.graph import Graph

# Closed level vocabulary: the standard ladder plus the subcollection shapes
# some partner archives use.
LEVELS = frozenset(
    {
        "fonds",
        "subfonds",
        "series",
        "subseries",
        "file",
        "item",
        "collection",
        "subcollection",
        "otherlevel",
    }
)

PRECISIONS = ("year", "month", "day")
CERTAINTIES = frozenset({"exact", "approximate"})

_YEAR_RE = re.compile(r"^\d{4}$")
_MONTH_RE = re.compile(r"^\d{4}-\d{2}$")
_DAY_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_LANG_RE = re.compile(r"^[a-z]{2}$")
_COUNTRY_RE = re.compile(r"^[A-Z]{2}$")


def date_precision(value: str) -> str:
    """Precision of a trimmed ISO date string ("1944", "1944-05", "1944-05-01")."""
    if _YEAR_RE.match(value):
        return "year"
    if _MONTH_RE.match(value):
        return "month"
    if _DAY_RE.match(value):
        return "day"
    raise ValueError(f"not a trimmed ISO date: {value!r}")


def date_floor(value: str) -> date:
    """Earliest calendar day covered by a trimmed ISO date."""
    precision = date_precision(value)
    if precision == "year":
        return date(int(value), 1, 1)
    if precision == "month":
        y, m = value.split("-")
        return date(int(y), int(m), 1)
    return date.fromisoformat(value)


def date_ceiling(value: str) -> date:
    """Latest calendar day covered by a trimmed ISO date."""
    precision = date_precision(value)
    if precision == "year":
        return date(int(value), 12, 31)
    if precision == "month":
        y, m = int(value[:4]), int(value[5:7])
        if m == 12:
            return date(y, 12, 31)
        return date.fromordinal(date(y, m + 1, 1).toordinal() - 1)
    return date.fromisoformat(value)


@dataclass
class DateSpan:
    """A dated interval with reduced precision kept in the serialized form.

    start/end are trimmed ISO strings; precision is derived from the string so
    a year-precision value can never carry a stray month or day.
    """

    start: str
    end: Optional[str] = None
    certainty: str = "exact"

    @property
    def start_precision(self) -> str:
        return date_precision(self.start)

    @property
    def end_precision(self) -> Optional[str]:
        return None if self.end is None else date_precision(self.end)

    def problems(self) -> list[str]:
        out = []
        try:
            start_floor = date_floor(self.start)
        except ValueError:
            return [f"bad start date {self.start!r}"]
        if self.end is not None:
            try:
                end_ceiling = date_ceiling(self.end)
            except ValueError:
                return [f"bad end date {self.end!r}"]
            if start_floor > end_ceiling:
                out.append(f"start {self.start} after end {self.end}")
        if self.certainty not in CERTAINTIES:
            out.append(f"unknown certainty {self.certainty!r}")
        return out

    def overlaps(self, other: "DateSpan") -> bool:
        a0, a1 = date_floor(self.start), date_ceiling(self.end or self.start)
        b0, b1 = date_floor(other.start), date_ceiling(other.end or other.start)
        return a0 <= b1 and b0 <= a1

    def to_text(self) -> str:
        text = self.start if self.end is None else f"{self.start}/{self.end}"
        return f"ca. {text}" if self.certainty == "approximate" else text

    @classmethod
    def from_text(cls, text: str) -> "DateSpan":
        raw = text.strip()
        certainty = "exact"
        approx = re.match(r"^(ca\.?|approx\.?)\s+", raw, re.IGNORECASE)
        if approx:
            certainty = "approximate"
            raw = raw[approx.end():]
        if "/" in raw:
            start, end = raw.split("/", 1)
            span = cls(start.strip(), end.strip(), certainty)
        else:
            span = cls(raw, None, certainty)
        problems = span.problems()
        if problems:
            raise ValueError("; ".join(problems))
        return span


@dataclass
class DocumentaryUnit:
    """One node of a hierarchical archival description (fonds down to item)."""

    global_id: str
    local_id: str
    level: str
    title: str = ""
    dates_of_creation: list[DateSpan] = field(default_factory=list)
    language_of_material: list[str] = field(default_factory=list)
    language_of_description: str = ""
    scope_content: str = ""
    extent: str = ""
    keywords: list[str] = field(default_factory=list)
    places: list[str] = field(default_factory=list)
    persons: list[str] = field(default_factory=list)
    departments: list[str] = field(default_factory=list)
    parent: Optional[str] = None
    provenance_note: str = ""
    source_system: str = ""
    # Date information that exists in the source but could not be parsed; it
    # satisfies the "dated or explicitly undated" rule at warning severity.
    unparsed_dates: list[str] = field(default_factory=list)
    undated: bool = False


@dataclass
class Repository:
    """A collection-holding institution record."""

    ehri_id: str
    authorized_form_of_name: str
    country: str = ""
    other_names: list[str] = field(default_factory=list)
    address: str = ""
    contact: str = ""
    description_status: str = "draft"
    holdings_summary: str = ""
    harvest_endpoint: Optional[str] = None
    harvest_capable: bool = False


@dataclass
class CountryReport:
    """Executive country summary: history, archives, and research sections."""

    country: str
    section_history: str = ""
    section_archives: str = ""
    section_research: str = ""
    max_length: int = 8000


@dataclass
class Issue:
    severity: str  # "error" | "warning"
    code: str
    message: str
    path: str = ""


@dataclass
class ValidationReport:
    subject_id: str
    issues: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    @property
    def has_errors(self) -> bool:
        return any(i.severity == "error" for i in self.issues)

    def add(self, severity: str, code: str, message: str, path: str = "") -> None:
        self.issues.append(Issue(severity, code, message, path))

    def to_dict(self) -> dict:
        return {
            "subjectId": self.subject_id,
            "issues": [
                {"severity": i.severity, "code": i.code, "message": i.message, "path": i.path}
                for i in self.issues
            ],
        }


def paragraphs(text: str) -> list[str]:
    """Text blocks separated by one or more blank lines."""
    blocks = re.split(r"\n\s*\n", text.strip())
    return [b for b in blocks if b.strip()]


def validate_unit(unit: DocumentaryUnit) -> ValidationReport:
    """Check unit invariants plus the portal's minimum description rules.

    Never mutates the unit; problems are reported, not raised.
    """
    report = ValidationReport(unit.global_id)
    if not unit.global_id.strip():
        report.add("error", "missing-id", "unit has no global id")
    if not unit.title.strip():
        report.add("error", "missing-title", "unit has no title", "title")
    if not unit.level:
        report.add("error", "missing-level", "unit has no level", "level")
    elif unit.level not in LEVELS:
        report.add("error", "unknown-level", f"level {unit.level!r} is not in the vocabulary", "level")
    if not unit.dates_of_creation and not unit.unparsed_dates and not unit.undated:
        report.add(
            "error",
            "missing-date",
            "unit has no date of creation and is not marked undated",
            "datesOfCreation",
        )
    for i, span in enumerate(unit.dates_of_creation):
        for problem in span.problems():
            report.add("error", "bad-date-span", problem, f"datesOfCreation[{i}]")
    for raw in unit.unparsed_dates:
        report.add("warning", "unparsed-date", f"date kept verbatim: {raw!r}", "datesOfCreation")
    if unit.parent is not None:
        if unit.parent == unit.global_id:
            report.add("error", "self-parent", "unit names itself as parent", "parent")
        elif unit.parent.split("/", 1)[0] != unit.global_id.split("/", 1)[0]:
            report.add(
                "error",
                "foreign-parent",
                f"parent {unit.parent!r} is outside this repository subtree",
                "parent",
            )
    for i, code in enumerate(unit.language_of_material):
        if not _LANG_RE.match(code):
            report.add("warning", "bad-language-code", f"{code!r} is not a two-letter code",
                       f"languageOfMaterial[{i}]")
    if unit.language_of_description and not _LANG_RE.match(unit.language_of_description):
        report.add("warning", "bad-language-code",
                   f"{unit.language_of_description!r} is not a two-letter code",
                   "languageOfDescription")
    return report


def validate_repository(repo: Repository) -> ValidationReport:
    """Check Repository invariants and the institution-record minimum."""
    report = ValidationReport(repo.ehri_id)
    if not repo.ehri_id.strip():
        report.add("error", "missing-id", "repository has no identifier")
    if not repo.authorized_form_of_name.strip():
        report.add("error", "missing-name", "repository has no authorized name", "authorizedFormOfName")
    if not repo.country:
        report.add("error", "missing-country", "repository has no country", "country")
    elif not _COUNTRY_RE.match(repo.country):
        report.add("error", "bad-country", f"{repo.country!r} is not a two-letter country code", "country")
    if not repo.contact.strip() and not repo.address.strip():
        report.add("error", "missing-contact", "repository has neither contact nor address", "contact")
    if repo.harvest_capable and not repo.harvest_endpoint:
        report.add("error", "endpoint-missing", "harvest-capable repository has no endpoint", "harvestEndpoint")
    if repo.harvest_endpoint and not repo.harvest_capable:
        report.add("error", "endpoint-unexpected", "endpoint given but repository is not harvest-capable",
                   "harvestEndpoint")
    if repo.description_status not in ("draft", "published"):
        report.add("error", "bad-status", f"unknown description status {repo.description_status!r}",
                   "descriptionStatus")
    return report


def validate_country_report(report: CountryReport) -> ValidationReport:
    """Check the fixed report structure: 2 + 2 + >=1 paragraphs within budget."""
    out = ValidationReport(report.country)
    sections = [
        ("history", report.section_history, 2),
        ("archives", report.section_archives, 2),
        ("research", report.section_research, None),  # at least one paragraph
    ]
    total = 0
    for name, text, exact in sections:
        if not text.strip():
            out.add("error", f"missing-section:{name}", f"section {name} is empty", name)
            continue
        total += len(text)
        count = len(paragraphs(text))
        if exact is not None and count != exact:
            out.add("error", f"paragraph-count:{name}",
                    f"section {name} has {count} paragraphs, expected {exact}", name)
    if total > report.max_length:
        out.add("error", "over-budget",
                f"report is {total} characters, budget is {report.max_length}")
    return out


def unit_depth(unit_id: str, registry: "Graph") -> int:
    """Parent hops from the unit to the root of its tree (root = 0)."""
    if not registry.has_node(unit_id):
        raise DomainError("unknown-id", f"no unit {unit_id!r} in the registry")
    return registry.depth(unit_id, "partOf")
