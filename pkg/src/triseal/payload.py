"""Authenticated payload encryption under a key derived from the mask.

A record's payload key is KDF(serialize(mask)) for the record's random
target-group mask, so the key algebra stays inside the pairing groups while
the payload uses a standard AEAD (AES-256-GCM).  Authenticated encryption
is what makes a wrong recovered mask detectable: decryption with the
wrong key fails the tag check with overwhelming probability.

Envelope layout: 1 scheme-id byte | 12-byte nonce | ciphertext+tag.
"""

from __future__ import annotations

import hashlib
import os
import random
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import AuthenticationFailure
from .pairing import GtElement, PairingContext

SCHEME_AES256_GCM = 1
_NONCE_LEN = 12
_TAG_LEN = 16
_KDF_TAG = b"triseal/v1/payload-key:"


@dataclass(frozen=True)
class PayloadCiphertext:
    scheme_id: int
    nonce: bytes
    body: bytes  # ciphertext followed by the 16-byte tag

    def to_bytes(self) -> bytes:
        return bytes([self.scheme_id]) + self.nonce + self.body


def payload_from_bytes(raw: bytes) -> PayloadCiphertext:
    if len(raw) < 1 + _NONCE_LEN + _TAG_LEN:
        raise AuthenticationFailure("ciphertext envelope too short")
    if raw[0] != SCHEME_AES256_GCM:
        raise AuthenticationFailure(f"unknown payload scheme id {raw[0]}")
    return PayloadCiphertext(
        scheme_id=raw[0],
        nonce=raw[1 : 1 + _NONCE_LEN],
        body=raw[1 + _NONCE_LEN :],
    )


def derive_key(ctx: PairingContext, mask: GtElement) -> bytes:
    """Deterministic 32-byte payload key from a target-group mask."""
    return hashlib.sha256(_KDF_TAG + ctx.gt_to_bytes(mask)).digest()


def encrypt_payload(
    key: bytes,
    plaintext: bytes,
    *,
    rng: random.Random | None = None,
) -> PayloadCiphertext:
    """AEAD-encrypt under a fresh nonce (injectable rng for replayable runs)."""
    nonce = os.urandom(_NONCE_LEN) if rng is None else rng.randbytes(_NONCE_LEN)
    body = AESGCM(key).encrypt(nonce, plaintext, None)
    return PayloadCiphertext(scheme_id=SCHEME_AES256_GCM, nonce=nonce, body=body)


def decrypt_payload(key: bytes, ct: PayloadCiphertext) -> bytes:
    if ct.scheme_id != SCHEME_AES256_GCM:
        raise AuthenticationFailure(f"unknown payload scheme id {ct.scheme_id}")
    try:
        return AESGCM(key).decrypt(ct.nonce, ct.body, None)
    except InvalidTag as exc:
        raise AuthenticationFailure("payload authentication failed") from exc
