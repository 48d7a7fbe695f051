"""Text priors: category embeddings and text-conditioned loss weights."""
