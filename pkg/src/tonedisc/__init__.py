"""tonedisc: single-tone neighbor discovery over a cellular uplink.

Library layers: galois (field + transform), codec (TDID codewords),
phy (tone medium, detection, coded uplink), mac (acquisition and neighbor
bookkeeping), net (topology and scheme simulations), harness (experiment
configs -> CSV). Compiled hot loops live in kernels with a numpy fallback.
"""
from .codec import (CodecParams, DecodeResult, Invalid, Message, Shifted, Valid,
                    ambiguity_census, capability_ok, classify, decode_multi,
                    encode, make_params, min_distance)
from .galois import GftPair, PrimeField, find_primitive_root, make_gft
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CodecParams", "DecodeResult", "GftPair", "Invalid", "Message",
    "PrimeField", "Shifted", "Valid", "ambiguity_census", "capability_ok",
    "classify", "decode_multi", "encode", "find_primitive_root", "make_gft",
    "make_params", "min_distance", "__version__",
]
