"""
Transaction stream codecs and the synthetic stream generator.
"""

from .binary_codec import encode_binary, parse_binary, write_binary
from .synthetic import SynthParams, SyntheticChain, generate_synthetic
from .text_codec import encode_text, parse_text, write_text

__all__ = [
    "encode_binary",
    "parse_binary",
    "write_binary",
    "encode_text",
    "parse_text",
    "write_text",
    "SynthParams",
    "SyntheticChain",
    "generate_synthetic",
]
