"""Schedulers, the exhaustive explorer, seed sweeps and the command line."""
