"""Privacy-preserving lookup: Bloom filters, crypto suites and relay protocols."""

from .bloom import BloomFilter, expected_fpr
from .crypto import CryptoSuite, DecryptionError, HashCryptoSuite, KeyPair, RsaCryptoSuite, make_suite
from .protocols import (
    PrivacyContext,
    ProtocolTrace,
    anonymity_violations,
    blindness_violations,
    partial_hash_lookup,
    pick_proxy,
    private_search,
    proxy_lookup,
    secure_transfer,
    session_report,
)

__all__ = [
    "BloomFilter",
    "CryptoSuite",
    "DecryptionError",
    "HashCryptoSuite",
    "KeyPair",
    "PrivacyContext",
    "ProtocolTrace",
    "RsaCryptoSuite",
    "anonymity_violations",
    "blindness_violations",
    "expected_fpr",
    "make_suite",
    "partial_hash_lookup",
    "pick_proxy",
    "private_search",
    "proxy_lookup",
    "secure_transfer",
    "session_report",
]
