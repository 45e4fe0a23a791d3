"""Supersingular-curve backend with the modified Tate pairing.

Curve: E : y^2 = x^3 + x over F_p with p = 3 (mod 4), so E is supersingular
with #E(F_p) = p + 1 and embedding degree 2.  G is the order-q subgroup of
E(F_p) (q prime, p + 1 = h*q, q^2 does not divide p + 1), GT is the order-q
subgroup of F_{p^2}^*, and the pairing is

    e(P, Q) = f_{q,P}(phi(Q)) ^ ((p^2 - 1) / q),

where phi(x, y) = (-x, i*y) is the distortion map into E(F_{p^2}) and
f_{q,P} is the Miller function.  Vertical-line denominators take values in
F_p and vanish under the final exponentiation, so the Miller loop skips
them.  F_{p^2} is realised as F_p[i] / (i^2 + 1), elements stored as (a, b)
for a + b*i.

Parameters: q is the first prime above a fixed 160-bit hash seed, and
p = 4k*q - 1 is the first 512-bit prime found scanning k upward from a
base derived from a second seed.  This is the same parameter class (and
security level) as the widely deployed 512-bit supersingular pairing
groups.

gmpy2 is used for field arithmetic when importable (roughly 5x faster);
plain Python integers otherwise.
"""

from __future__ import annotations

import hashlib

from ..errors import InvalidElement
from .base import HashDomain, PairingContext, Side

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import invert as _gmpy_invert, mpz, powmod as _powmod

    def _inv(a, m):
        return _gmpy_invert(a, m)

except ImportError:  # pragma: no cover
    def mpz(x):  # type: ignore[misc]
        return x

    def _inv(a, m):
        return pow(a, -1, m)

    _powmod = pow

CURVE_Q = 0xE67713B1616219729B6B8B5F4EFCBAA8DC14B8FF
CURVE_H = 0x8E2E98EF3B25B2EF02D7CE22A0E5D0F3F9E770AEB202CB919778B6478AAE5A0880595CD3DA44207B74FD19D4
CURVE_P = CURVE_H * CURVE_Q - 1

assert CURVE_P % 4 == 3 and CURVE_H % CURVE_Q != 0

_P = mpz(CURVE_P)
_P_BYTES = 64
_SQRT_EXP = mpz((CURVE_P + 1) // 4)
_FINAL_EXP = mpz((CURVE_P + 1) // CURVE_Q)  # applied after the Frobenius step f^(p-1)
_Q_BITS = [int(b) for b in bin(CURVE_Q)[3:]]  # bits below the leading one

_H2G_PREFIX = b"triseal/v1/h2g/"

Point = tuple  # affine (x, y); None is the point at infinity
Fp2 = tuple  # (a, b) meaning a + b*i with i^2 = -1

_ONE = (mpz(1), mpz(0))


# -- F_{p^2} arithmetic ----------------------------------------------------


def _fp2_mul(x, y):
    a, b = x
    c, d = y
    ac = a * c % _P
    bd = b * d % _P
    return (ac - bd) % _P, ((a + b) * (c + d) - ac - bd) % _P


def _fp2_sqr(x):
    a, b = x
    return (a + b) * (a - b) % _P, 2 * a * b % _P


def _fp2_inv(x):
    a, b = x
    norm_inv = _inv(a * a + b * b, _P)
    return a * norm_inv % _P, -b * norm_inv % _P


def _fp2_pow(x, e):
    result = _ONE
    for bit in bin(e)[2:]:
        result = _fp2_sqr(result)
        if bit == "1":
            result = _fp2_mul(result, x)
    return result


# -- E(F_p) arithmetic -------------------------------------------------------


def _pt_add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    x1, y1 = a
    x2, y2 = b
    if x1 == x2:
        if (y1 + y2) % _P == 0:
            return None
        slope = (3 * x1 * x1 + 1) * _inv(2 * y1, _P) % _P
    else:
        slope = (y2 - y1) * _inv(x2 - x1, _P) % _P
    x3 = (slope * slope - x1 - x2) % _P
    return x3, (slope * (x1 - x3) - y1) % _P


def _pt_mul(a, k):
    """Scalar multiplication via Jacobian coordinates (one final inversion)."""
    if a is None or k == 0:
        return None
    x2, y2 = a
    X, Y, Z = None, None, None  # Jacobian accumulator, None Z = infinity
    for bit in bin(k)[2:]:
        if Z is not None:
            # doubling for y^2 = x^3 + a*x with a = 1
            xx = X * X % _P
            yy = Y * Y % _P
            yyyy = yy * yy % _P
            zz = Z * Z % _P
            s = 2 * ((X + yy) * (X + yy) - xx - yyyy) % _P
            m = (3 * xx + zz * zz) % _P
            t = (m * m - 2 * s) % _P
            X, Y, Z = t, (m * (s - t) - 8 * yyyy) % _P, ((Y + Z) * (Y + Z) - yy - zz) % _P
            if Z == 0:
                Z = None
        if bit == "1":
            if Z is None:
                X, Y, Z = mpz(x2), mpz(y2), mpz(1)
            else:
                # mixed addition with the affine base point
                zz = Z * Z % _P
                u2 = x2 * zz % _P
                s2 = y2 * Z * zz % _P
                h = (u2 - X) % _P
                r = 2 * (s2 - Y) % _P
                if h == 0:
                    if r == 0:
                        # accumulator equals the base: rare doubling case
                        aff = _jac_to_affine(X, Y, Z)
                        dbl = _pt_add(aff, aff)
                        if dbl is None:
                            Z = None
                            continue
                        X, Y, Z = mpz(dbl[0]), mpz(dbl[1]), mpz(1)
                        continue
                    Z = None
                    continue
                hh = h * h % _P
                i = 4 * hh % _P
                j = h * i % _P
                v = X * i % _P
                X3 = (r * r - j - 2 * v) % _P
                Y3 = (r * (v - X3) - 2 * Y * j) % _P
                Z3 = ((Z + h) * (Z + h) - zz - hh) % _P
                X, Y, Z = X3, Y3, Z3
                if Z == 0:
                    Z = None
    if Z is None:
        return None
    return _jac_to_affine(X, Y, Z)


def _jac_to_affine(X, Y, Z):
    zi = _inv(Z, _P)
    zi2 = zi * zi % _P
    return X * zi2 % _P, Y * zi2 * zi % _P


def _on_curve(pt) -> bool:
    if pt is None:
        return True
    x, y = pt
    return 0 <= x < CURVE_P and 0 <= y < CURVE_P and (y * y - x * x * x - x) % _P == 0


def _tate_pairing(p_pt, q_pt):
    """Miller loop over the bits of q, lines evaluated at phi(Q); tangent
    and chord slopes are shared with the point update.  Line values always
    have imaginary part y_Q != 0, so they are never zero."""
    if p_pt is None or q_pt is None:
        return _ONE
    xq = -q_pt[0] % _P
    yq = q_pt[1]
    xp, yp = p_pt
    f = _ONE
    tx, ty = mpz(xp), mpz(yp)
    alive = True  # T != infinity
    for bit in _Q_BITS:
        fa, fb = _fp2_sqr(f)
        if alive:
            slope = (3 * tx * tx + 1) * _inv(2 * ty, _P) % _P
            la = (-(ty + slope * (xq - tx))) % _P
            # f = f^2 * (la + yq*i)
            f = (fa * la - fb * yq) % _P, (fa * yq + fb * la) % _P
            x3 = (slope * slope - 2 * tx) % _P
            ty = (slope * (tx - x3) - ty) % _P
            tx = x3
        else:
            f = fa, fb
        if bit and alive:
            if tx == xp:
                if (ty + yp) % _P == 0:
                    alive = False  # vertical chord: F_p factor, eliminated
                    continue
                slope = (3 * tx * tx + 1) * _inv(2 * ty, _P) % _P
            else:
                slope = (yp - ty) * _inv(xp - tx, _P) % _P
            la = (-(ty + slope * (xq - tx))) % _P
            fa, fb = f
            f = (fa * la - fb * yq) % _P, (fa * yq + fb * la) % _P
            x3 = (slope * slope - tx - xp) % _P
            ty = (slope * (tx - x3) - ty) % _P
            tx = x3
    # final exponentiation (p^2 - 1)/q as (p - 1) then (p + 1)/q; the
    # Frobenius on F_{p^2} is conjugation since p = 3 (mod 4)
    f = _fp2_mul((f[0], -f[1] % _P), _fp2_inv(f))
    return _fp2_pow(f, _FINAL_EXP)


def _point_from_label(label: bytes):
    """Deterministic try-and-increment hash onto the order-q subgroup."""
    for counter in range(512):
        seed = label + counter.to_bytes(4, "big")
        wide = hashlib.sha256(seed + b"\x00").digest() + hashlib.sha256(seed + b"\x01").digest()
        x = mpz(int.from_bytes(wide, "big")) % _P
        rhs = (x * x * x + x) % _P
        if rhs == 0:
            continue
        y = _powmod(rhs, _SQRT_EXP, _P)
        if y * y % _P != rhs:
            continue
        if y % 2 == 1:
            y = _P - y
        pt = _pt_mul((x, y), CURVE_H)
        if pt is not None:
            return pt
    raise RuntimeError("hash-to-curve failed to find a point")  # pragma: no cover


class CurveContext(PairingContext):
    """Production backend over the fixed supersingular parameters above."""

    backend_id = "curve"

    def __init__(self):
        super().__init__(CURVE_Q)
        self._gen_left = _point_from_label(b"triseal/v1/base/left")
        self._gen_right = _point_from_label(b"triseal/v1/base/right")

    def param_header(self) -> dict:
        from .base import WIRE_FORMAT

        return {
            "format": WIRE_FORMAT,
            "backend": "curve",
            "q": format(CURVE_Q, "x"),
            "p": format(CURVE_P, "x"),
        }

    # -- backend hooks --------------------------------------------------------

    def _g_generator_data(self, side: Side):
        return self._gen_left if side is Side.LEFT else self._gen_right

    def _g_identity_data(self):
        return None

    def _g_mul(self, a, b):
        return _pt_add(a, b)

    def _g_exp(self, a, k: int):
        return _pt_mul(a, k)

    def _pair(self, x, y):
        return _tate_pairing(x, y)

    def _hash(self, domain: HashDomain, data: bytes):
        return _point_from_label(_H2G_PREFIX + domain.value + b":" + data)

    def _gt_identity_data(self):
        return _ONE

    def _gt_mul(self, a, b):
        return _fp2_mul(a, b)

    def _gt_inv(self, a):
        # GT elements are unitary (norm 1), so the inverse is the conjugate
        return a[0], -a[1] % _P

    def _gt_exp(self, a, k: int):
        return _fp2_pow(a, k)

    def _g_to_bytes(self, a) -> bytes:
        if a is None:
            return b"\x00" + bytes(_P_BYTES)
        x, y = a
        return bytes([2 + int(y & 1)]) + int(x).to_bytes(_P_BYTES, "big")

    def _g_from_bytes(self, raw: bytes):
        if len(raw) != 1 + _P_BYTES:
            raise InvalidElement(f"expected {1 + _P_BYTES} bytes, got {len(raw)}")
        tag, xb = raw[0], raw[1:]
        if tag == 0:
            if any(xb):
                raise InvalidElement("nonzero payload on identity encoding")
            return None
        if tag not in (2, 3):
            raise InvalidElement(f"bad point compression tag {tag}")
        x = mpz(int.from_bytes(xb, "big"))
        if x >= _P:
            raise InvalidElement("x coordinate out of range")
        rhs = (x * x * x + x) % _P
        y = _powmod(rhs, _SQRT_EXP, _P)
        if y * y % _P != rhs:
            raise InvalidElement("x is not on the curve")
        if int(y & 1) != tag - 2:
            y = _P - y
        pt = (x, y)
        if _pt_mul(pt, CURVE_Q) is not None:
            raise InvalidElement("point is not in the order-q subgroup")
        return pt

    def _gt_to_bytes(self, a) -> bytes:
        return int(a[0]).to_bytes(_P_BYTES, "big") + int(a[1]).to_bytes(_P_BYTES, "big")

    def _gt_from_bytes(self, raw: bytes):
        if len(raw) != 2 * _P_BYTES:
            raise InvalidElement(f"expected {2 * _P_BYTES} bytes, got {len(raw)}")
        a = mpz(int.from_bytes(raw[:_P_BYTES], "big"))
        b = mpz(int.from_bytes(raw[_P_BYTES:], "big"))
        if a >= _P or b >= _P:
            raise InvalidElement("coordinate out of range")
        value = (a, b)
        if value == (0, 0) or _fp2_pow(value, CURVE_Q) != _ONE:
            raise InvalidElement("value is not in the order-q subgroup of GT")
        return value
