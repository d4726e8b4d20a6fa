"""
Domain layer for the WSC toolkit.
Contains code definitions, signal enumeration, distances, bounds, decoding and the deterministic thread pool.
"""
