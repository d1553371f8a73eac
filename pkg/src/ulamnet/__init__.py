"""Ulam networks of intermittency maps: Google matrix, PageRank and spectra."""
