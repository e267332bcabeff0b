"""annodesk: a centralized service for creating, annotating and managing
parallel corpora with role-based project administration."""

__version__ = "0.1.0"
