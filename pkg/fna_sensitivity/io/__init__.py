"""CSV ingestion, run configuration and report emission."""
