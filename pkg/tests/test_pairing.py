"""Bilinear-group interface: worked vectors, group laws, serialization."""

import random

import pytest

from exponent_oracle import brute_inverse
from triseal.errors import BackendMismatch, InvalidElement, NonInvertible, SideMismatch
from triseal.pairing import HashDomain, OracleContext, Side
from triseal.pairing.curve import CURVE_H, _pt_mul, _point_from_label


def test_pair_exponent_vector(oracle101):
    ctx = oracle101
    out = ctx.pair(ctx.g_left**2, ctx.g_right**3)
    assert out.data == 2 * 3 % 101
    assert out == ctx.gt_generator**6


def test_pair_zero_exponent_gives_identity(oracle101):
    ctx = oracle101
    for v in (1, 17, 100):
        assert ctx.pair(ctx.g_left**0, ctx.g_right**v).is_identity


def test_oracle_pairing_symmetric_emulation(oracle101):
    ctx = oracle101
    rng = random.Random(5)
    for _ in range(50):
        u, v = rng.randrange(101), rng.randrange(101)
        assert ctx.pair(ctx.g_left**u, ctx.g_right**v) == ctx.pair(
            ctx.g_left**v, ctx.g_right**u
        )


def test_scalar_inverse_vectors(oracle101):
    assert oracle101.scalar_inverse(7) == brute_inverse(7) == 29
    assert oracle101.scalar_inverse(1) == 1
    with pytest.raises(NonInvertible):
        oracle101.scalar_inverse(0)
    with pytest.raises(NonInvertible):
        oracle101.scalar_inverse(101)  # zero mod q


def test_scalar_inverse_random_against_brute(oracle101):
    rng = random.Random(3)
    for _ in range(30):
        s = rng.randrange(1, 101)
        assert oracle101.scalar_inverse(s) == brute_inverse(s)
        assert s * oracle101.scalar_inverse(s) % 101 == 1


def test_group_ops_vectors(oracle101):
    ctx = oracle101
    assert (ctx.g_left**70 * ctx.g_left**35).data == (70 + 35) % 101
    x = ctx.g_left**41
    assert x**1 == x
    gt = ctx.gt_generator
    assert ctx.gt_div(gt**88, gt**80) == gt ** ((88 - 80) % 101)


def test_hash_determinism_and_domains(oracle_big):
    ctx = oracle_big
    a = ctx.hash_to_group(HashDomain.KEYWORD, b"bp")
    b = ctx.hash_to_group(HashDomain.KEYWORD, b"bp")
    assert a == b
    assert a.side is Side.LEFT
    assert ctx.hash_to_group(HashDomain.KEYWORD, b"bp") != ctx.hash_to_group(
        HashDomain.GID, b"bp"
    )
    assert ctx.hash_to_group(HashDomain.KEYWORD, b"bp") != ctx.hash_to_group(
        HashDomain.UPDATE_ID, b"bp"
    )
    assert ctx.hash_to_group(HashDomain.KEYWORD, "bp") == a  # str encodes as UTF-8


def test_hash_injection_hook(oracle101):
    ctx = oracle101
    plain = OracleContext(101)
    ctx.set_hash_override(HashDomain.KEYWORD, b"bp", 5)
    assert ctx.hash_to_group(HashDomain.KEYWORD, b"bp") == ctx.g_left**5
    # other inputs keep the regular hash
    assert (
        ctx.hash_to_group(HashDomain.KEYWORD, b"hr").data
        == plain.hash_to_group(HashDomain.KEYWORD, b"hr").data
    )


def test_side_mismatch_errors(oracle101):
    ctx = oracle101
    with pytest.raises(SideMismatch):
        ctx.group_mul(ctx.g_left, ctx.g_right)
    with pytest.raises(SideMismatch):
        ctx.pair(ctx.g_right, ctx.g_left)
    with pytest.raises(SideMismatch):
        ctx.pair(ctx.g_left, ctx.g_left)


def test_backend_mismatch(oracle101, oracle_big):
    with pytest.raises(BackendMismatch):
        oracle101.group_mul(oracle101.g_left, oracle_big.g_left)
    with pytest.raises(BackendMismatch):
        oracle_big.pair(oracle101.g_left, oracle_big.g_right)


def test_oracle_requires_prime_order():
    with pytest.raises(ValueError):
        OracleContext(100)


@pytest.mark.parametrize("backend", ["oracle", "curve"])
def test_bilinearity_property(backend, oracle_big, curve_ctx):
    ctx = oracle_big if backend == "oracle" else curve_ctx
    trials = 1000 if backend == "oracle" else 200
    rng = random.Random(11)
    g, gr = ctx.g_left, ctx.g_right
    egg = ctx.gt_generator
    for _ in range(trials):
        u = rng.randrange(ctx.order)
        v = rng.randrange(ctx.order)
        assert ctx.pair(g**u, gr**v) == egg ** (u * v % ctx.order)


@pytest.mark.parametrize("backend", ["oracle", "curve"])
def test_multiplicativity_property(backend, oracle_big, curve_ctx):
    ctx = oracle_big if backend == "oracle" else curve_ctx
    rng = random.Random(12)
    gr = ctx.g_right
    for _ in range(20):
        x1 = ctx.g_left ** rng.randrange(ctx.order)
        x2 = ctx.g_left ** rng.randrange(ctx.order)
        y = gr ** rng.randrange(ctx.order)
        assert ctx.pair(x1 * x2, y) == ctx.pair(x1, y) * ctx.pair(x2, y)


@pytest.mark.parametrize("backend", ["oracle", "curve"])
def test_non_degeneracy(backend, oracle_big, curve_ctx):
    ctx = oracle_big if backend == "oracle" else curve_ctx
    assert not ctx.gt_generator.is_identity


@pytest.mark.parametrize("backend", ["oracle", "curve"])
def test_serialization_round_trip(backend, oracle_big, curve_ctx):
    ctx = oracle_big if backend == "oracle" else curve_ctx
    rng = random.Random(13)
    for side in (Side.LEFT, Side.RIGHT):
        e = (ctx.g_left if side is Side.LEFT else ctx.g_right) ** rng.randrange(1, ctx.order)
        assert ctx.element_from_bytes(ctx.element_to_bytes(e), side) == e
        ident = ctx.group_identity(side)
        assert ctx.element_from_bytes(ctx.element_to_bytes(ident), side) == ident
    z = ctx.pair(ctx.g_left ** rng.randrange(1, ctx.order), ctx.g_right)
    assert ctx.gt_from_bytes(ctx.gt_to_bytes(z)) == z


@pytest.mark.parametrize("backend", ["oracle", "curve"])
def test_gt_equality_is_canonical(backend, oracle_big, curve_ctx):
    """Two different computation paths to the same GT value serialize
    byte-identically."""
    ctx = oracle_big if backend == "oracle" else curve_ctx
    rng = random.Random(14)
    u, v = rng.randrange(1, ctx.order), rng.randrange(1, ctx.order)
    a = ctx.pair(ctx.g_left**u, ctx.g_right**v)
    b = ctx.pair(ctx.g_left, ctx.g_right**v) ** u
    c = ctx.pair(ctx.g_left**u, ctx.g_right) ** v
    assert ctx.gt_to_bytes(a) == ctx.gt_to_bytes(b) == ctx.gt_to_bytes(c)


def test_curve_rejects_malformed_points(curve_ctx):
    ctx = curve_ctx
    good = ctx.element_to_bytes(ctx.g_left)
    with pytest.raises(InvalidElement):
        ctx.element_from_bytes(good[:-1], Side.LEFT)
    with pytest.raises(InvalidElement):
        ctx.element_from_bytes(b"\x07" + good[1:], Side.LEFT)
    with pytest.raises(InvalidElement):  # identity tag with nonzero payload
        ctx.element_from_bytes(b"\x00" + good[1:], Side.LEFT)
    with pytest.raises(InvalidElement):  # x not on curve (overwhelmingly likely)
        ctx.element_from_bytes(b"\x02" + bytes(63) + b"\x05", Side.LEFT)
    with pytest.raises(InvalidElement):
        ctx.gt_from_bytes(bytes(128))


def test_curve_rejects_out_of_subgroup_point(curve_ctx):
    ctx = curve_ctx
    # a raw hashed point before cofactor clearing has order != q almost surely
    raw = _point_from_label(b"subgroup-test")  # this one IS in the subgroup
    assert _pt_mul(raw, ctx.order) is None
    import hashlib

    x = int.from_bytes(hashlib.sha256(b"outside").digest() * 2, "big")
    from triseal.pairing.curve import CURVE_P, _SQRT_EXP

    while True:
        x %= CURVE_P
        rhs = (x * x * x + x) % CURVE_P
        y = pow(rhs, int(_SQRT_EXP), CURVE_P)
        if rhs and y * y % CURVE_P == rhs:
            break
        x += 1
    assert _pt_mul((x, y), ctx.order) is not None  # not killed by q: outside subgroup
    encoded = bytes([2 + (y & 1)]) + x.to_bytes(64, "big")
    with pytest.raises(InvalidElement):
        ctx.element_from_bytes(encoded, Side.LEFT)


def test_curve_generators_have_order_q(curve_ctx):
    ctx = curve_ctx
    assert (ctx.g_left ** ctx.order).is_identity
    assert (ctx.g_right ** ctx.order).is_identity
    assert not ctx.g_left.is_identity and not ctx.g_right.is_identity
    assert ctx.g_left != ctx.g_right.ctx.group_identity(Side.LEFT)


def test_param_header_round_trip(oracle101, oracle_big, curve_ctx):
    from triseal.pairing import context_from_header

    for ctx in (oracle101, oracle_big, curve_ctx):
        rebuilt = context_from_header(ctx.param_header())
        assert rebuilt.fingerprint == ctx.fingerprint
        assert rebuilt.order == ctx.order
    with pytest.raises(InvalidElement):
        context_from_header({"format": 99, "backend": "oracle", "q": "65"})


def test_cofactor_structure():
    # group order p + 1 = h*q with q^2 not dividing it; regenerating either
    # generator from its label reproduces the built-in one
    from triseal.pairing.curve import CURVE_P, CURVE_Q

    assert (CURVE_P + 1) == CURVE_H * CURVE_Q
    assert CURVE_H % CURVE_Q != 0
    assert _point_from_label(b"triseal/v1/base/left") == _point_from_label(
        b"triseal/v1/base/left"
    )
