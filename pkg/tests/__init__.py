"""Tests package for mdim_algebraic."""
