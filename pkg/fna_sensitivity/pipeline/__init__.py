"""High-level analysis facade driven by the CLI."""
