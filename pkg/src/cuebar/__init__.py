"""Cue barcodes: authenticated, encrypted 2D barcodes that also show a human-readable cue."""
from .arrangement import OK, ArrangementLayout, AttackKind, AttackSpec, Violation, apply_attack, assign_cues
from .arrangement import cue_symbols_for, verify_arrangement
from .barcode import BarcodeImage, BarcodeSpec, capacity, decode_barcode, encode_barcode, read_superpixels
from .channel import ChannelModel, measure_superpixel_error, transmit
from .ecc import EccPolicy, ecc_decode_block, ecc_decode_stream, ecc_encode_block, ecc_encode_stream
from .errors import (AuthError, BoundsError, CapacityError, CardinalityError, ChannelError, ConfigError,
                     CuebarError, DecodeError, DegenerateError, FitError, FormatError, LengthError,
                     RangeError, RejectError, TooFewPointsError)
from .glyphs import CueImage, GlyphSet, default_glyphs, read_cue, render_cue
from .keys import LBlockCodebook, SessionKey, derive_codebook, keygen
from .lblock import LBlock, decode_pair, encode_pair
from .payload import ProtectedPayload, from_readable, protect, to_readable, unprotect
from .protocol import (ChannelEdge, Party, Role, SecurityReport, SessionOutcome, builtin_strategies,
                       evaluate_security, run_method)
from .registration import (AffineTransform, ControlPointSet, detect_control_points, estimate_transform,
                           mean_displacement, rectify)

__version__ = "0.1.0"

__all__ = [
    "AffineTransform",
    "ArrangementLayout",
    "AttackKind",
    "AttackSpec",
    "AuthError",
    "BarcodeImage",
    "BarcodeSpec",
    "BoundsError",
    "CapacityError",
    "CardinalityError",
    "ChannelEdge",
    "ChannelError",
    "ChannelModel",
    "ConfigError",
    "ControlPointSet",
    "CueImage",
    "CuebarError",
    "DecodeError",
    "DegenerateError",
    "EccPolicy",
    "FitError",
    "FormatError",
    "GlyphSet",
    "LBlock",
    "LBlockCodebook",
    "LengthError",
    "OK",
    "Party",
    "ProtectedPayload",
    "RangeError",
    "RejectError",
    "Role",
    "SecurityReport",
    "SessionKey",
    "SessionOutcome",
    "TooFewPointsError",
    "Violation",
    "apply_attack",
    "assign_cues",
    "builtin_strategies",
    "capacity",
    "cue_symbols_for",
    "decode_barcode",
    "decode_pair",
    "default_glyphs",
    "derive_codebook",
    "detect_control_points",
    "ecc_decode_block",
    "ecc_decode_stream",
    "ecc_encode_block",
    "ecc_encode_stream",
    "encode_barcode",
    "encode_pair",
    "estimate_transform",
    "evaluate_security",
    "from_readable",
    "keygen",
    "mean_displacement",
    "measure_superpixel_error",
    "protect",
    "read_cue",
    "read_superpixels",
    "rectify",
    "render_cue",
    "run_method",
    "to_readable",
    "transmit",
    "unprotect",
    "verify_arrangement",
]
