"""Training stages and fusion inference."""
