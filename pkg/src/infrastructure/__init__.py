"""
Infrastructure layer: random number streams, codebook generators and file formats.
"""
