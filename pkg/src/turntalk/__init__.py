"""turntalk: a turn-taking conversation mediator for parents and minimally
verbal children, with coaching guides, adaptive communication-card decks,
session logging, and usage analytics."""

__version__ = "0.1.0"
