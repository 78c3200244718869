"""Crypto primitives behind one interface.

``HashCryptoSuite`` is a fast, deterministic stand-in built from SHA-256,
SHAKE-256 and HMAC.  It keeps the public-to-private table itself, which plays
the role of the trapdoor, so "encrypt to a public key" works without real
public-key math.  ``RsaCryptoSuite`` uses 1024-bit RSA (OAEP, PSS) with
AES-GCM for bulk data.  The protocols only rely on the invariants: decryption
inverts encryption for the matching key, fails otherwise, and verification
accepts exactly what signing produced.
"""

from __future__ import annotations

import abc
import hashlib
import hmac
import os
import random
from dataclasses import dataclass


class DecryptionError(Exception):
    pass


@dataclass(frozen=True)
class KeyPair:
    owner: int
    public: bytes
    private: object


class CryptoSuite(abc.ABC):
    def hash(self, data: bytes) -> bytes:
        return hashlib.sha256(data).digest()

    @abc.abstractmethod
    def keypair(self, owner: int) -> KeyPair: ...

    @abc.abstractmethod
    def seal(self, public: bytes, plaintext: bytes) -> bytes:
        """Encrypt for the holder of ``public``."""

    @abc.abstractmethod
    def open(self, keys: KeyPair, blob: bytes) -> bytes:
        """Decrypt a sealed blob; raises DecryptionError for the wrong key."""

    @abc.abstractmethod
    def sign(self, keys: KeyPair, data: bytes) -> bytes: ...

    @abc.abstractmethod
    def verify(self, public: bytes, data: bytes, signature: bytes) -> bool: ...

    @abc.abstractmethod
    def session_key(self) -> bytes: ...

    @abc.abstractmethod
    def encrypt(self, key: bytes, plaintext: bytes) -> bytes: ...

    @abc.abstractmethod
    def decrypt(self, key: bytes, blob: bytes) -> bytes: ...

    def can_open(self, keys: KeyPair, blob: bytes) -> bool:
        try:
            self.open(keys, blob)
        except DecryptionError:
            return False
        return True

    def can_decrypt(self, key: bytes, blob: bytes) -> bool:
        try:
            self.decrypt(key, blob)
        except DecryptionError:
            return False
        return True


class HashCryptoSuite(CryptoSuite):
    _TAG = 16

    def __init__(self, seed: int = 0):
        self._rng = random.Random(seed)
        self._trapdoor: dict[bytes, bytes] = {}

    def keypair(self, owner: int) -> KeyPair:
        secret = self._rng.randbytes(32)
        public = hashlib.sha256(b"public:" + secret).digest()
        self._trapdoor[public] = secret
        return KeyPair(owner, public, secret)

    @staticmethod
    def _derive(secret: bytes, purpose: bytes) -> bytes:
        return hashlib.sha256(purpose + b":" + secret).digest()

    def encrypt(self, key: bytes, plaintext: bytes) -> bytes:
        nonce = self._rng.randbytes(16)
        stream = hashlib.shake_256(key + nonce).digest(len(plaintext))
        body = bytes(a ^ b for a, b in zip(plaintext, stream))
        tag = hmac.new(key, nonce + body, hashlib.sha256).digest()[: self._TAG]
        return nonce + tag + body

    def decrypt(self, key: bytes, blob: bytes) -> bytes:
        if len(blob) < 16 + self._TAG:
            raise DecryptionError("ciphertext too short")
        nonce, tag, body = blob[:16], blob[16 : 16 + self._TAG], blob[16 + self._TAG :]
        expected = hmac.new(key, nonce + body, hashlib.sha256).digest()[: self._TAG]
        if not hmac.compare_digest(tag, expected):
            raise DecryptionError("authentication tag mismatch")
        stream = hashlib.shake_256(key + nonce).digest(len(body))
        return bytes(a ^ b for a, b in zip(body, stream))

    def seal(self, public: bytes, plaintext: bytes) -> bytes:
        secret = self._trapdoor[public]
        return self.encrypt(self._derive(secret, b"seal"), plaintext)

    def open(self, keys: KeyPair, blob: bytes) -> bytes:
        return self.decrypt(self._derive(keys.private, b"seal"), blob)

    def sign(self, keys: KeyPair, data: bytes) -> bytes:
        return hmac.new(self._derive(keys.private, b"sign"), data, hashlib.sha256).digest()

    def verify(self, public: bytes, data: bytes, signature: bytes) -> bool:
        secret = self._trapdoor.get(public)
        if secret is None:
            return False
        expected = hmac.new(self._derive(secret, b"sign"), data, hashlib.sha256).digest()
        return hmac.compare_digest(expected, signature)

    def session_key(self) -> bytes:
        return self._rng.randbytes(32)


class RsaCryptoSuite(CryptoSuite):
    """1024-bit RSA identities; sealed messages are RSA-OAEP-wrapped AES-GCM."""

    def __init__(self, key_size: int = 1024):
        from cryptography.hazmat.primitives import hashes, serialization
        from cryptography.hazmat.primitives.asymmetric import padding, rsa
        from cryptography.hazmat.primitives.ciphers.aead import AESGCM

        self._hashes, self._ser, self._padding, self._rsa, self._aesgcm = hashes, serialization, padding, rsa, AESGCM
        self.key_size = key_size

    def _oaep(self):
        h = self._hashes.SHA256()
        return self._padding.OAEP(mgf=self._padding.MGF1(h), algorithm=h, label=None)

    def _pss(self):
        return self._padding.PSS(mgf=self._padding.MGF1(self._hashes.SHA256()),
                                 salt_length=self._padding.PSS.MAX_LENGTH)

    def keypair(self, owner: int) -> KeyPair:
        private = self._rsa.generate_private_key(public_exponent=65537, key_size=self.key_size)
        public = private.public_key().public_bytes(
            self._ser.Encoding.DER, self._ser.PublicFormat.SubjectPublicKeyInfo
        )
        return KeyPair(owner, public, private)

    def _load(self, public: bytes):
        return self._ser.load_der_public_key(public)

    def encrypt(self, key: bytes, plaintext: bytes) -> bytes:
        nonce = os.urandom(12)
        return nonce + self._aesgcm(key).encrypt(nonce, plaintext, None)

    def decrypt(self, key: bytes, blob: bytes) -> bytes:
        from cryptography.exceptions import InvalidTag

        try:
            return self._aesgcm(key).decrypt(blob[:12], blob[12:], None)
        except (InvalidTag, ValueError) as exc:
            raise DecryptionError(str(exc) or "invalid tag") from None

    def seal(self, public: bytes, plaintext: bytes) -> bytes:
        key = self.session_key()
        wrapped = self._load(public).encrypt(key, self._oaep())
        return len(wrapped).to_bytes(2, "big") + wrapped + self.encrypt(key, plaintext)

    def open(self, keys: KeyPair, blob: bytes) -> bytes:
        size = int.from_bytes(blob[:2], "big")
        try:
            key = keys.private.decrypt(blob[2 : 2 + size], self._oaep())
        except ValueError:
            raise DecryptionError("RSA-OAEP unwrap failed") from None
        return self.decrypt(key, blob[2 + size :])

    def sign(self, keys: KeyPair, data: bytes) -> bytes:
        return keys.private.sign(data, self._pss(), self._hashes.SHA256())

    def verify(self, public: bytes, data: bytes, signature: bytes) -> bool:
        from cryptography.exceptions import InvalidSignature

        try:
            self._load(public).verify(signature, data, self._pss(), self._hashes.SHA256())
        except InvalidSignature:
            return False
        return True

    def session_key(self) -> bytes:
        return self._aesgcm.generate_key(bit_length=256)


def make_suite(name: str, seed: int = 0) -> CryptoSuite:
    if name == "rsa":
        return RsaCryptoSuite()
    return HashCryptoSuite(seed)
