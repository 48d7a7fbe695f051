"""Differentiable image primitives."""
