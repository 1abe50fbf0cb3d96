"""nexus: a desk-scale portal for dispersed archival descriptions.

A property-graph registry integrates heterogeneous archive exports into one
point of access, with multilingual query expansion, faceted search, user
annotations with moderation, helpdesk routing to holding institutions, and
a themed research guide built over the integrated corpus.
"""

from nexus.errors import DomainError

__version__ = "0.1.0"

__all__ = ["DomainError", "__version__"]
