"""Command-line drivers for the protocol actors against file-backed state.

Each invocation acts as one role whose state lives under ``--home``; other
actors are referenced by their directories (public files only, except for
``issue``, which simulates the user--authority exchange in one process and
therefore reads the authority's key file while writing only user files).

Exit codes: 0 success, 1 protocol error, 2 usage error, 3 clean no-match.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import abe, wire
from .actors import Authority, AuthorityPublic, ConsentGrant, Owner, User, UserSession
from .errors import ProtocolError
from .pairing import PairingContext, Side, context_from_header
from .recovery import OwnerRecoveryKey, RecoveryAttributeKeyPair
from .server import (
    EscrowServer,
    record_to_wire,
    search_request_to_wire,
    search_response_from_wire,
    search_response_to_wire,
)
from .sse import OwnerSseKey, SetPublicKeys, server_setup

EXIT_OK = 0
EXIT_PROTOCOL = 1
EXIT_NO_MATCH = 3

STORE_NAME = "store.log"


def _write_json(path: Path, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(wire.canonical_json(obj) + b"\n")


def _read_json(path: Path) -> dict:
    return json.loads(path.read_text())


def _rng(seed: str | None) -> random.Random:
    if seed is None:
        return random.SystemRandom()
    return random.Random(int(seed, 16))


def _parse_subset(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part)


def _parse_list(text: str) -> list[str]:
    return [part for part in text.split(",") if part]


# -- actor state files -----------------------------------------------------------


def _server_paths(home: str) -> tuple[Path, Path]:
    root = Path(home)
    return root / "public.json", root / STORE_NAME


def _load_server_public(home: str) -> tuple[PairingContext, SetPublicKeys]:
    public = _read_json(_server_paths(home)[0])
    ctx = context_from_header(public["params"])
    return ctx, wire.pks_from_wire(ctx, public["pks"])


def _open_server(home: str) -> EscrowServer:
    return EscrowServer.open(_server_paths(home)[1])


def _load_owner(home: str) -> Owner:
    state = _read_json(Path(home) / "owner.json")
    ctx = context_from_header(state["params"])
    return Owner(
        ctx=ctx,
        owner_id=state["owner_id"],
        sse_key=OwnerSseKey(int(state["sk"], 16)),
        recovery_key=OwnerRecoveryKey(int(state["sk_dtk"], 16)),
        update_id=state["update_id"],
        rng=_rng(None),
    )


def _load_authority(home: str) -> Authority:
    state = _read_json(Path(home) / "aa.json")
    ctx = context_from_header(state["params"])
    ask = int(state["ask"], 16)
    ask_dtk = int(state["ask_dtk"], 16)
    return Authority(
        ctx=ctx,
        attribute_id=state["attribute_id"],
        kp=abe.aa_setup(ctx, state["attribute_id"], ask=ask),
        kp_dtk=RecoveryAttributeKeyPair(
            attribute_id=state["attribute_id"],
            ask_dtk=ask_dtk,
            apk_dtk=ctx.g_right ** ctx.scalar_inverse(ask_dtk),
        ),
    )


def _load_authority_public(home: str) -> AuthorityPublic:
    state = _read_json(Path(home) / "public.json")
    ctx = context_from_header(state["params"])
    return AuthorityPublic(
        attribute_id=state["attribute_id"],
        apk=wire.dec_elem(ctx, state["apk"], Side.RIGHT),
        apk_dtk=wire.dec_elem(ctx, state["apk_dtk"], Side.RIGHT),
    )


def _consent_to_file(ctx: PairingContext, grant: ConsentGrant, path: Path) -> None:
    _write_json(
        path,
        {
            "format": wire.WIRE_FORMAT_VERSION,
            "kind": "consent",
            "params": ctx.param_header(),
            "search_token": wire.token_to_wire(ctx, grant.search_token),
            "owner_decrypt_token": wire.enc_elem(ctx, grant.owner_decrypt_token),
            "subset": list(grant.subset),
        },
    )


def _consent_from_file(path: Path) -> tuple[PairingContext, ConsentGrant]:
    obj = _read_json(path)
    ctx = context_from_header(obj["params"])
    return ctx, ConsentGrant(
        search_token=wire.token_from_wire(ctx, obj["search_token"]),
        owner_decrypt_token=wire.dec_elem(ctx, obj["owner_decrypt_token"], Side.LEFT),
        subset=tuple(obj["subset"]),
    )


# -- session files -----------------------------------------------------------


def _session_path(home: str) -> Path:
    return Path(home) / "session.json"


def _session_to_file(ctx: PairingContext, session: UserSession, used: bool, home: str) -> None:
    _write_json(
        _session_path(home),
        {
            "format": wire.WIRE_FORMAT_VERSION,
            "kind": "session",
            "params": ctx.param_header(),
            "used": used,
            "blinded": wire.blinded_to_wire(ctx, session.blinded),
            "blinded_r": wire.blinded_to_wire(ctx, session.blinded_r),
            "credentials": {
                a: wire.credential_to_wire(ctx, c)
                for a, c in sorted(session.credentials.items())
            },
            "decrypt_tokens": {
                a: wire.enc_elem(ctx, t) for a, t in sorted(session.decrypt_tokens.items())
            },
        },
    )


def _session_from_file(home: str) -> tuple[PairingContext, UserSession, bool]:
    obj = _read_json(_session_path(home))
    ctx = context_from_header(obj["params"])
    session = UserSession(
        blinded=wire.blinded_from_wire(ctx, obj["blinded"]),
        blinded_r=wire.blinded_from_wire(ctx, obj["blinded_r"]),
        credentials={
            a: wire.credential_from_wire(ctx, c) for a, c in obj["credentials"].items()
        },
        decrypt_tokens={
            a: wire.dec_elem(ctx, t, Side.LEFT) for a, t in obj["decrypt_tokens"].items()
        },
    )
    return ctx, session, obj["used"]


# -- request / response wire files --------------------------------------------


def _response_from_file(path: Path):
    obj = _read_json(path)
    ctx = context_from_header(obj["params"])
    return ctx, search_response_from_wire(ctx, obj)


# -- commands ---------------------------------------------------------------


def _cmd_setup_server(args) -> int:
    rng = _rng(args.seed)
    from .pairing import make_context

    ctx = make_context(args.backend)
    pks = server_setup(ctx, args.sets, rng)
    public_path, store_path = _server_paths(args.home)
    store_path.parent.mkdir(parents=True, exist_ok=True)
    EscrowServer(ctx, pks, store_path=store_path).close()
    _write_json(
        public_path,
        {
            "format": wire.WIRE_FORMAT_VERSION,
            "kind": "server-public",
            "params": ctx.param_header(),
            "pks": wire.pks_to_wire(ctx, pks),
        },
    )
    print(f"server ready: backend={args.backend} sets={args.sets} home={args.home}")
    return EXIT_OK


def _cmd_setup_aa(args) -> int:
    ctx, _ = _load_server_public(args.server)
    rng = _rng(args.seed)
    authority = Authority.create(ctx, args.attr, rng)
    home = Path(args.home)
    _write_json(
        home / "aa.json",
        {
            "format": wire.WIRE_FORMAT_VERSION,
            "kind": "aa-secret",
            "params": ctx.param_header(),
            "attribute_id": authority.attribute_id,
            "ask": format(authority.kp.ask, "x"),
            "ask_dtk": format(authority.kp_dtk.ask_dtk, "x"),
        },
    )
    public = authority.public()
    _write_json(
        home / "public.json",
        {
            "format": wire.WIRE_FORMAT_VERSION,
            "kind": "aa-public",
            "params": ctx.param_header(),
            "attribute_id": public.attribute_id,
            "apk": wire.enc_elem(ctx, public.apk),
            "apk_dtk": wire.enc_elem(ctx, public.apk_dtk),
        },
    )
    print(f"authority ready: attr={args.attr} home={args.home}")
    return EXIT_OK


def _cmd_setup_owner(args) -> int:
    ctx, _ = _load_server_public(args.server)
    rng = _rng(args.seed)
    owner = Owner.create(ctx, args.owner_id, rng)
    _write_json(
        Path(args.home) / "owner.json",
        {
            "format": wire.WIRE_FORMAT_VERSION,
            "kind": "owner-secret",
            "params": ctx.param_header(),
            "owner_id": owner.owner_id,
            "sk": format(owner.sse_key.sk, "x"),
            "sk_dtk": format(owner.recovery_key.sk_dtk, "x"),
            "update_id": owner.update_id,
        },
    )
    print(f"owner ready: id={args.owner_id} home={args.home}")
    return EXIT_OK


def _authority_publics(ctx: PairingContext, homes) -> dict[str, AuthorityPublic]:
    publics = {}
    for home in homes or []:
        public = _load_authority_public(home)
        publics[public.attribute_id] = public
    return publics


def _cmd_publish(args) -> int:
    owner = _load_owner(args.home)
    if args.seed is not None:
        owner.rng = _rng(args.seed)
    server = _open_server(args.server)
    try:
        publics = _authority_publics(owner.ctx, args.aa)
        record = owner.publish(
            plaintext=Path(args.file).read_bytes(),
            keywords=_parse_list(args.keywords),
            policy=_parse_list(args.policy),
            set_index=args.set_index,
            authorities=publics,
        )
        record_id = server.store_record(record)
    finally:
        server.close()
    print(f"record {record_id}")
    return EXIT_OK


def _cmd_consent(args) -> int:
    owner = _load_owner(args.home)
    _ctx, pks = _load_server_public(args.server)
    grant = owner.consent(args.keyword, _parse_subset(args.subset), pks)
    _consent_to_file(owner.ctx, grant, Path(args.out))
    print(f"consent written: {args.out}")
    return EXIT_OK


def _cmd_issue(args) -> int:
    home = Path(args.home)
    user_file = home / "user.json"
    if user_file.exists():
        state = _read_json(user_file)
        gid = state["gid"]
        ctx = context_from_header(state["params"])
    else:
        if args.gid is None:
            raise ProtocolError("first issue for this home needs --gid")
        authority_probe = _load_authority(args.aa)
        ctx, gid = authority_probe.ctx, args.gid
        _write_json(
            user_file,
            {
                "format": wire.WIRE_FORMAT_VERSION,
                "kind": "user",
                "params": ctx.param_header(),
                "gid": gid,
            },
        )
    user = User(ctx, gid, _rng(args.seed))
    session_file = _session_path(args.home)
    if session_file.exists():
        _, session, used = _session_from_file(args.home)
        if used:
            session = user.new_session()
    else:
        session = user.new_session()
    authority = _load_authority(args.aa)
    user.collect(session, authority)
    _session_to_file(ctx, session, used=False, home=args.home)
    print(f"issued {authority.attribute_id} credentials into session")
    return EXIT_OK


def _cmd_search(args) -> int:
    ctx, session, _used = _session_from_file(args.home)
    consent_ctx, grant = _consent_from_file(Path(args.consent))
    if consent_ctx.fingerprint != ctx.fingerprint:
        raise ProtocolError("consent and session use different parameters")
    state = _read_json(Path(args.home) / "user.json")
    user = User(ctx, state["gid"], _rng(args.seed))
    request = user.build_search_request(session, grant)

    outbox = Path(args.home) / "outbox"
    outbox.mkdir(parents=True, exist_ok=True)
    serial = len(list(outbox.glob("request-*.json"))) + 1
    _write_json(outbox / f"request-{serial:04d}.json", search_request_to_wire(ctx, request))

    server = _open_server(args.server)
    try:
        response = server.search(request)
    finally:
        server.close()
    _write_json(Path(args.out), search_response_to_wire(ctx, response))
    _session_to_file(ctx, session, used=True, home=args.home)
    stats = response.stats
    print(
        f"matches {len(response.matches)} "
        f"(candidates={stats.candidates} keyword_hits={stats.sse_matched} "
        f"policy_checks={stats.abe_verified})"
    )
    return EXIT_OK if response.matches else EXIT_NO_MATCH


def _cmd_decrypt(args) -> int:
    ctx, session, _used = _session_from_file(args.home)
    consent_ctx, grant = _consent_from_file(Path(args.consent))
    response_ctx, response = _response_from_file(Path(args.results))
    if len({ctx.fingerprint, consent_ctx.fingerprint, response_ctx.fingerprint}) != 1:
        raise ProtocolError("session, consent, and results use different parameters")
    _, pks = _load_server_public(args.server)
    state = _read_json(Path(args.home) / "user.json")
    user = User(ctx, state["gid"], _rng(args.seed))
    results = user.decrypt_matches(session, grant, response, pks)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for record_id, plaintext in results:
        (out_dir / f"{record_id}.bin").write_bytes(plaintext)
        print(f"decrypted {record_id} ({len(plaintext)} bytes)")
    return EXIT_OK if results else EXIT_NO_MATCH


def _cmd_update(args) -> int:
    owner = _load_owner(args.home)
    if args.seed is not None:
        owner.rng = _rng(args.seed)
    server = _open_server(args.server)
    try:
        publics = _authority_publics(owner.ctx, args.aa) if args.aa else None
        request = owner.update_request(
            record_id=args.record_id,
            subset=_parse_subset(args.subset),
            pks=server.pks,
            keywords=_parse_list(args.keywords) if args.keywords else None,
            policy=_parse_list(args.policy) if args.policy else None,
            plaintext=Path(args.file).read_bytes() if args.file else None,
            authorities=publics,
        )
        record_id = server.reencrypt(request)
    finally:
        server.close()
    print(f"updated {record_id}")
    return EXIT_OK


def _cmd_inspect(args) -> int:
    server = _open_server(args.server)
    try:
        ids = [args.record_id] if args.record_id else sorted(server.record_ids())
        print(f"records: {server.record_count}")
        for record_id in ids:
            rec = server.fetch(record_id)
            obj = record_to_wire(server.ctx, rec)
            print(
                f"  {record_id}: set={rec.set_index} "
                f"policy={','.join(rec.abe.attrs)} "
                f"tags={len(rec.sse.tagged_keywords)} "
                f"payload={len(wire.b64d(obj['payload']))}B"
            )
    finally:
        server.close()
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triseal",
        description="Privacy-preserving data sharing: encrypted search, "
        "anonymous credentials, local key recovery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setup-server", help="create server parameters and store")
    p.add_argument("--home", required=True)
    p.add_argument("--sets", type=int, required=True, help="number of data sets n")
    p.add_argument("--backend", choices=["oracle", "curve"], default="curve")
    p.add_argument("--seed", help="hex seed for reproducible runs")
    p.set_defaults(func=_cmd_setup_server)

    p = sub.add_parser("setup-aa", help="create one attribute authority")
    p.add_argument("--home", required=True)
    p.add_argument("--server", required=True)
    p.add_argument("--attr", required=True)
    p.add_argument("--seed")
    p.set_defaults(func=_cmd_setup_aa)

    p = sub.add_parser("setup-owner", help="create owner key material")
    p.add_argument("--home", required=True)
    p.add_argument("--server", required=True)
    p.add_argument("--owner-id", required=True)
    p.add_argument("--seed")
    p.set_defaults(func=_cmd_setup_owner)

    p = sub.add_parser("publish", help="encrypt, tag, and store one file")
    p.add_argument("--home", required=True, help="owner home")
    p.add_argument("--server", required=True)
    p.add_argument("--file", required=True)
    p.add_argument("--keywords", required=True, help="comma-separated")
    p.add_argument("--policy", required=True, help="comma-separated attribute ids")
    p.add_argument("--set-index", type=int, required=True)
    p.add_argument("--aa", action="append", required=True, help="authority home (repeatable)")
    p.add_argument("--seed")
    p.set_defaults(func=_cmd_publish)

    p = sub.add_parser("consent", help="grant search + decryption tokens")
    p.add_argument("--home", required=True, help="owner home")
    p.add_argument("--server", required=True)
    p.add_argument("--keyword", required=True)
    p.add_argument("--subset", required=True, help="e.g. 1,3,5")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_consent)

    p = sub.add_parser("issue", help="obtain credentials from one authority")
    p.add_argument("--home", required=True, help="user home")
    p.add_argument("--aa", required=True, help="authority home")
    p.add_argument("--gid", help="user identity (first call only)")
    p.add_argument("--seed")
    p.set_defaults(func=_cmd_issue)

    p = sub.add_parser("search", help="submit the session request to the server")
    p.add_argument("--home", required=True, help="user home")
    p.add_argument("--server", required=True)
    p.add_argument("--consent", required=True)
    p.add_argument("--out", required=True, help="results file")
    p.add_argument("--seed")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("decrypt", help="recover keys locally and decrypt results")
    p.add_argument("--home", required=True, help="user home")
    p.add_argument("--server", required=True, help="server home (public keys only)")
    p.add_argument("--consent", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed")
    p.set_defaults(func=_cmd_decrypt)

    p = sub.add_parser("update", help="re-encrypt a record's layers")
    p.add_argument("--home", required=True, help="owner home")
    p.add_argument("--server", required=True)
    p.add_argument("--record-id", required=True)
    p.add_argument("--subset", required=True)
    p.add_argument("--keywords", help="replace the search layer")
    p.add_argument("--policy", help="replace policy + key wrapping + payload")
    p.add_argument("--file", help="plaintext, required with --policy")
    p.add_argument("--aa", action="append", help="authority home (repeatable)")
    p.add_argument("--seed")
    p.set_defaults(func=_cmd_update)

    p = sub.add_parser("inspect", help="print record structure (no secrets)")
    p.add_argument("--server", required=True)
    p.add_argument("--record-id")
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ProtocolError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())
