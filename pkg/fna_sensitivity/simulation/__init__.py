"""Data-generating processes, truth oracles and replication studies."""
