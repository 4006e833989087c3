"""Tabled program texts used by the benchmark runners."""
