"""Iterated elimination of strictly dominated strategies under interaction structures."""
