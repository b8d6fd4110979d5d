"""Rule-based wired-table extraction from digital PDFs and page images."""

__version__ = "0.1.0"
