"""
Application layer orchestrating domain logic, random generation and persistence.
"""
