"""Dataset ingestion, synthesis and patch sampling."""
