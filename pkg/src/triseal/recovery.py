"""Layer 3: key-mask wrapping and local recovery.

The search and credential proofs are replayed with an independent key set:
the owner holds a second secret sk' (distinct from the search sk), every
authority holds a second attribute secret a'_i, and a record carries

    dtk_transferor      = g^(r'/sk')         dtk_owner_modifier = g^(r')
    dtk_aa_transferor_i = g^(s'_i / a'_i)    dtk_aa_modifier_i  = g^(s'_i)
    wrapped_key         = m * e(g, g)^(sum_{i in P} s'_i + r')

for fresh nonces (r', s'_i) never shared with the other layers and a random
target-group mask m.  The payload key is derived from m (see payload), so
the wrapped value stays inside the group algebra.

A qualified user holds an owner token (prod_{i in S} pk_i * g)^(sk'),
per-attribute authority tokens (g * H(GID)^(r'_u))^(a'_i) bound to one
blinding H(GID)^(r'_u), and recovers, with no server involvement,

    e(g,g)^(r')        = e(owner_token, dtk_transferor)
                          / e(prod_{i in S} pk_i, dtk_owner_modifier)
    e(g,g)^(sum s'_i)  = prod_i e(aa_token_i, dtk_aa_transferor_i)
                          / prod_i e(H(GID)^(r'_u), dtk_aa_modifier_i)
    m                  = wrapped_key / e(g,g)^(sum s'_i + r').

Tokens from the search/credential layers cannot stand in for these: the
exponents differ, so substitution leaves a non-trivial residual factor and
the recovered mask fails payload authentication.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Collection, Iterable, Mapping, Sequence

from .abe import BlindedIdentity
from .errors import BadAttribute, EmptySubset, IncompleteTokens, InvalidBlinding, NonceReuse
from .pairing import GroupElement, GtElement, PairingContext
from .sse import SetPublicKeys


@dataclass(frozen=True)
class OwnerRecoveryKey:
    """Owner decryption-consent secret sk'; independent of the search sk."""

    sk_dtk: int


def new_recovery_key(
    ctx: PairingContext,
    rng: random.Random,
    *,
    distinct_from: Collection[int] = (),
) -> OwnerRecoveryKey:
    forbidden = {s % ctx.order for s in distinct_from}
    while True:
        sk = ctx.random_scalar(rng)
        if sk not in forbidden:
            return OwnerRecoveryKey(sk_dtk=sk)


@dataclass(frozen=True)
class RecoveryAttributeKeyPair:
    attribute_id: str
    ask_dtk: int  # a'_i
    apk_dtk: GroupElement  # g^(1/a'_i)


def recovery_aa_setup(
    ctx: PairingContext,
    attribute_id: str,
    rng: random.Random | None = None,
    *,
    ask: int | None = None,
    distinct_from: Collection[int] = (),
) -> RecoveryAttributeKeyPair:
    """Second attribute key pair, kept apart from the credential-layer a_i."""
    forbidden = {s % ctx.order for s in distinct_from}
    if ask is None:
        if rng is None:
            raise ValueError("need rng or an injected secret")
        while True:
            ask = ctx.random_scalar(rng)
            if ask not in forbidden:
                break
    else:
        ask = ctx.require_nonzero(ask, "recovery attribute secret")
        if ask % ctx.order in forbidden:
            raise NonceReuse("recovery attribute secret equals a credential-layer secret")
    return RecoveryAttributeKeyPair(
        attribute_id=attribute_id,
        ask_dtk=ask,
        apk_dtk=ctx.g_right ** ctx.scalar_inverse(ask),
    )


@dataclass(frozen=True)
class KeyRecoveryElements:
    """Record-side wrapping material; nonces independent of layers 1 and 2."""

    attrs: tuple[str, ...]
    dtk_transferor: GroupElement  # g^(r'/sk')
    dtk_owner_modifier: GroupElement  # g^(r')
    dtk_aa_transferors: tuple[GroupElement, ...]  # g^(s'_i / a'_i)
    dtk_aa_modifiers: tuple[GroupElement, ...]  # g^(s'_i)
    wrapped_key: GtElement  # m * e(g,g)^(sum s'_i + r')


@dataclass(frozen=True)
class DecryptionTokenSet:
    """User-held recovery capability; aa_tokens all bound to blinded_r."""

    owner_token: GroupElement
    subset: tuple[int, ...]
    aa_tokens: Mapping[str, GroupElement]
    blinded_r: BlindedIdentity | None


def wrap_key(
    ctx: PairingContext,
    owner: OwnerRecoveryKey,
    attrs: Sequence[str],
    recovery_apks: Mapping[str, GroupElement],
    r_prime: int,
    s_primes: Mapping[str, int],
    mask: GtElement,
    *,
    reserved_nonces: Collection[int] = (),
) -> KeyRecoveryElements:
    """Wrap ``mask`` under the record policy.

    ``reserved_nonces`` carries the nonces already spent by the search and
    credential layers of the same record; any collision is rejected to keep
    the layers algebraically independent.
    """
    if not attrs:
        raise ValueError("policy needs at least one attribute")
    reserved = {s % ctx.order for s in reserved_nonces}
    r = ctx.require_nonzero(r_prime, "wrapping nonce")
    if r in reserved:
        raise NonceReuse("wrapping nonce reused from another layer")
    sk_inv = ctx.scalar_inverse(owner.sk_dtk)
    transferors = []
    modifiers = []
    exponent_sum = r
    for attr in attrs:
        if attr not in recovery_apks:
            raise BadAttribute(f"no recovery public key for attribute {attr!r}")
        s = ctx.require_nonzero(s_primes[attr], f"wrapping nonce for {attr!r}")
        if s in reserved:
            raise NonceReuse(f"wrapping nonce for {attr!r} reused from another layer")
        transferors.append(recovery_apks[attr] ** s)
        modifiers.append(ctx.g_right**s)
        exponent_sum += s
    return KeyRecoveryElements(
        attrs=tuple(attrs),
        dtk_transferor=ctx.g_right ** (r * sk_inv),
        dtk_owner_modifier=ctx.g_right**r,
        dtk_aa_transferors=tuple(transferors),
        dtk_aa_modifiers=tuple(modifiers),
        wrapped_key=mask * ctx.gt_generator**exponent_sum,
    )


def consent_decrypt_token(
    ctx: PairingContext,
    owner: OwnerRecoveryKey,
    subset: Iterable[int],
    pks: SetPublicKeys,
    *,
    basic: bool = False,
) -> GroupElement:
    """owner_token = (prod_{i in S} pk_i * g)^(sk'); issued alongside the
    search consent."""
    subset = tuple(subset)
    if basic:
        if subset:
            raise ValueError("basic mode carries no subset")
    else:
        if not subset:
            raise EmptySubset("data-set subset must be non-empty")
        subset = pks.check_subset(subset)
    return (pks.left_product(subset) * ctx.g_left) ** owner.sk_dtk


def issue_decrypt_token(
    ctx: PairingContext,
    kp: RecoveryAttributeKeyPair,
    blinded_r: BlindedIdentity | None,
) -> GroupElement:
    """aa_token = (g * H(GID)^(r'_u))^(a'_i), same blinding rules as
    credential issuance."""
    if blinded_r is None:
        return ctx.g_left**kp.ask_dtk
    if blinded_r.element.is_identity:
        raise InvalidBlinding("blinded identity must not be the group identity")
    return (ctx.g_left * blinded_r.element) ** kp.ask_dtk


def recover_key(
    ctx: PairingContext,
    elems: KeyRecoveryElements,
    tokens: DecryptionTokenSet,
    pks: SetPublicKeys,
) -> GtElement:
    """Unwrap the mask locally; needs only the record elements, the token
    set, and the public set keys.  Wrong tokens produce a wrong mask, which
    surfaces as an authentication failure at payload decryption."""
    missing = [a for a in elems.attrs if a not in tokens.aa_tokens]
    if missing:
        raise IncompleteTokens(f"no decryption token for: {', '.join(missing)}")
    owner_part = ctx.pair(tokens.owner_token, elems.dtk_transferor)
    if tokens.subset:
        owner_part = owner_part / ctx.pair(
            pks.left_product(pks.check_subset(tokens.subset)), elems.dtk_owner_modifier
        )
    aa_part = ctx.gt_identity()
    for attr, transferor, modifier in zip(
        elems.attrs, elems.dtk_aa_transferors, elems.dtk_aa_modifiers
    ):
        aa_part = aa_part * ctx.pair(tokens.aa_tokens[attr], transferor)
        if tokens.blinded_r is not None:
            aa_part = aa_part / ctx.pair(tokens.blinded_r.element, modifier)
    return elems.wrapped_key / (owner_part * aa_part)
