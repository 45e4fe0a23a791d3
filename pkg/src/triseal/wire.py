"""Layer-level serialization: JSON envelopes with base64url element bytes.

Every top-level artifact embeds the versioned parameter header so a reader
can rebuild the pairing context before decoding elements.  Canonical bytes
(sorted keys, compact separators) make equality checks and record ids
stable.
"""

from __future__ import annotations

import base64
import json
from typing import Any, Mapping

from .abe import AccessPolicyElements, AttributeCredential, BlindedIdentity
from .errors import BadRecord
from .pairing import WIRE_FORMAT as WIRE_FORMAT_VERSION
from .pairing import GroupElement, GtElement, PairingContext, Side
from .payload import PayloadCiphertext, payload_from_bytes
from .recovery import DecryptionTokenSet, KeyRecoveryElements
from .sse import SearchToken, SetPublicKeys, SseRecordElements


def b64e(raw: bytes) -> str:
    return base64.urlsafe_b64encode(raw).decode("ascii")


def b64d(text: str) -> bytes:
    return base64.urlsafe_b64decode(text.encode("ascii"))


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def enc_elem(ctx: PairingContext, e: GroupElement) -> str:
    return b64e(ctx.element_to_bytes(e))


def dec_elem(ctx: PairingContext, text: str, side: Side) -> GroupElement:
    return ctx.element_from_bytes(b64d(text), side)


def enc_gt(ctx: PairingContext, e: GtElement) -> str:
    return b64e(ctx.gt_to_bytes(e))


def dec_gt(ctx: PairingContext, text: str) -> GtElement:
    return ctx.gt_from_bytes(b64d(text))


# -- layer 1 ----------------------------------------------------------------


def sse_to_wire(ctx: PairingContext, elems: SseRecordElements) -> dict:
    return {
        "stk_transferor": enc_elem(ctx, elems.stk_transferor),
        "kw_modifier": enc_elem(ctx, elems.kw_modifier),
        "tagged_keywords": [enc_gt(ctx, t) for t in elems.tagged_keywords],
        "update_keyword": enc_gt(ctx, elems.update_keyword),
    }


def sse_from_wire(ctx: PairingContext, obj: Mapping) -> SseRecordElements:
    tags = obj["tagged_keywords"]
    if not tags:
        raise BadRecord("record carries no tagged keywords")
    return SseRecordElements(
        stk_transferor=dec_elem(ctx, obj["stk_transferor"], Side.RIGHT),
        kw_modifier=dec_elem(ctx, obj["kw_modifier"], Side.RIGHT),
        tagged_keywords=tuple(dec_gt(ctx, t) for t in tags),
        update_keyword=dec_gt(ctx, obj["update_keyword"]),
    )


def token_to_wire(ctx: PairingContext, token: SearchToken) -> dict:
    return {"token": enc_elem(ctx, token.token), "subset": list(token.subset)}


def token_from_wire(ctx: PairingContext, obj: Mapping) -> SearchToken:
    return SearchToken(
        token=dec_elem(ctx, obj["token"], Side.LEFT),
        subset=tuple(int(i) for i in obj["subset"]),
    )


def pks_to_wire(ctx: PairingContext, pks: SetPublicKeys) -> dict:
    return {
        "left": [enc_elem(ctx, e) for e in pks.left],
        "right": [enc_elem(ctx, e) for e in pks.right],
    }


def pks_from_wire(ctx: PairingContext, obj: Mapping) -> SetPublicKeys:
    return SetPublicKeys(
        left=tuple(dec_elem(ctx, e, Side.LEFT) for e in obj["left"]),
        right=tuple(dec_elem(ctx, e, Side.RIGHT) for e in obj["right"]),
    )


# -- layer 2 --------------------------------------------------------------------


def abe_to_wire(ctx: PairingContext, elems: AccessPolicyElements) -> dict:
    # attributes serialize sorted; element pairs stay aligned with them
    order = sorted(range(len(elems.attrs)), key=lambda i: elems.attrs[i])
    return {
        "attrs": [elems.attrs[i] for i in order],
        "ac_transferors": [enc_elem(ctx, elems.ac_transferors[i]) for i in order],
        "plcy_modifiers": [enc_elem(ctx, elems.plcy_modifiers[i]) for i in order],
        "plcy": enc_gt(ctx, elems.plcy),
    }


def abe_from_wire(ctx: PairingContext, obj: Mapping) -> AccessPolicyElements:
    attrs = tuple(obj["attrs"])
    if not attrs:
        raise BadRecord("record carries an empty policy")
    if len(obj["ac_transferors"]) != len(attrs) or len(obj["plcy_modifiers"]) != len(attrs):
        raise BadRecord("policy element count does not match the attribute list")
    return AccessPolicyElements(
        attrs=attrs,
        ac_transferors=tuple(dec_elem(ctx, e, Side.RIGHT) for e in obj["ac_transferors"]),
        plcy_modifiers=tuple(dec_elem(ctx, e, Side.RIGHT) for e in obj["plcy_modifiers"]),
        plcy=dec_gt(ctx, obj["plcy"]),
    )


def credential_to_wire(ctx: PairingContext, cred: AttributeCredential) -> dict:
    return {"attribute_id": cred.attribute_id, "credential": enc_elem(ctx, cred.credential)}


def credential_from_wire(ctx: PairingContext, obj: Mapping) -> AttributeCredential:
    return AttributeCredential(
        attribute_id=obj["attribute_id"],
        credential=dec_elem(ctx, obj["credential"], Side.LEFT),
    )


def blinded_to_wire(ctx: PairingContext, blinded: BlindedIdentity) -> str:
    return enc_elem(ctx, blinded.element)


def blinded_from_wire(ctx: PairingContext, text: str) -> BlindedIdentity:
    return BlindedIdentity(element=dec_elem(ctx, text, Side.LEFT))


# -- layer 3 -------------------------------------------------------------


def recovery_to_wire(ctx: PairingContext, elems: KeyRecoveryElements) -> dict:
    order = sorted(range(len(elems.attrs)), key=lambda i: elems.attrs[i])
    return {
        "attrs": [elems.attrs[i] for i in order],
        "dtk_transferor": enc_elem(ctx, elems.dtk_transferor),
        "dtk_owner_modifier": enc_elem(ctx, elems.dtk_owner_modifier),
        "dtk_aa_transferors": [enc_elem(ctx, elems.dtk_aa_transferors[i]) for i in order],
        "dtk_aa_modifiers": [enc_elem(ctx, elems.dtk_aa_modifiers[i]) for i in order],
        "wrapped_key": enc_gt(ctx, elems.wrapped_key),
    }


def recovery_from_wire(ctx: PairingContext, obj: Mapping) -> KeyRecoveryElements:
    attrs = tuple(obj["attrs"])
    if not attrs:
        raise BadRecord("record carries no key-recovery policy")
    if len(obj["dtk_aa_transferors"]) != len(attrs) or len(obj["dtk_aa_modifiers"]) != len(attrs):
        raise BadRecord("recovery element count does not match the attribute list")
    return KeyRecoveryElements(
        attrs=attrs,
        dtk_transferor=dec_elem(ctx, obj["dtk_transferor"], Side.RIGHT),
        dtk_owner_modifier=dec_elem(ctx, obj["dtk_owner_modifier"], Side.RIGHT),
        dtk_aa_transferors=tuple(dec_elem(ctx, e, Side.RIGHT) for e in obj["dtk_aa_transferors"]),
        dtk_aa_modifiers=tuple(dec_elem(ctx, e, Side.RIGHT) for e in obj["dtk_aa_modifiers"]),
        wrapped_key=dec_gt(ctx, obj["wrapped_key"]),
    )


def tokenset_to_wire(ctx: PairingContext, tokens: DecryptionTokenSet) -> dict:
    return {
        "owner_token": enc_elem(ctx, tokens.owner_token),
        "subset": list(tokens.subset),
        "aa_tokens": {a: enc_elem(ctx, t) for a, t in sorted(tokens.aa_tokens.items())},
        "blinded_r": None if tokens.blinded_r is None else blinded_to_wire(ctx, tokens.blinded_r),
    }


def tokenset_from_wire(ctx: PairingContext, obj: Mapping) -> DecryptionTokenSet:
    return DecryptionTokenSet(
        owner_token=dec_elem(ctx, obj["owner_token"], Side.LEFT),
        subset=tuple(int(i) for i in obj["subset"]),
        aa_tokens={a: dec_elem(ctx, t, Side.LEFT) for a, t in obj["aa_tokens"].items()},
        blinded_r=None if obj["blinded_r"] is None else blinded_from_wire(ctx, obj["blinded_r"]),
    )


def payload_to_wire(ct: PayloadCiphertext) -> str:
    return b64e(ct.to_bytes())


def payload_from_wire(text: str) -> PayloadCiphertext:
    return payload_from_bytes(b64d(text))
