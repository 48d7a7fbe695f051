"""Fusion network shared by teacher and student."""
