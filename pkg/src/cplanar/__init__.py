"""C-planarity testing for embedded flat clustered graphs with at most two
vertices per cluster on every face."""

from __future__ import annotations

__version__ = "0.1.0"
