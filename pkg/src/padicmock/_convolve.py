"""Exact integer convolution by Kronecker substitution.

Coefficient sequences are packed into fixed-width slots of one big integer,
multiplied with CPython's subquadratic big-int multiply, and unpacked.  The
result is the exact convolution, so the fast path is bit-identical to the
schoolbook one; signed inputs are handled with a bias at unpack time.
"""

from __future__ import annotations


def _pack(vals, nbytes):
    pos = bytearray(nbytes * len(vals))
    neg = bytearray(nbytes * len(vals))
    any_neg = False
    for i, v in enumerate(vals):
        if v > 0:
            pos[i * nbytes : i * nbytes + (v.bit_length() + 7) // 8] = v.to_bytes(
                (v.bit_length() + 7) // 8, "little"
            )
        elif v < 0:
            any_neg = True
            w = -v
            neg[i * nbytes : i * nbytes + (w.bit_length() + 7) // 8] = w.to_bytes(
                (w.bit_length() + 7) // 8, "little"
            )
    packed = int.from_bytes(bytes(pos), "little")
    if any_neg:
        packed -= int.from_bytes(bytes(neg), "little")
    return packed


def _unpack_signed(m, nbytes, count):
    # digits of m lie in (-2^(8n-1), 2^(8n-1)); bias each slot into [0, 2^8n)
    # and mask away higher slots (they cannot disturb the low ones mod 2^(8nk))
    half_byte = bytes(nbytes - 1) + b"\x80"
    bias = int.from_bytes(half_byte * count, "little")
    nbits = 8 * nbytes * count
    masked = (m + bias) & ((1 << nbits) - 1)
    raw = masked.to_bytes(nbytes * count, "little")
    half = 1 << (8 * nbytes - 1)
    out = []
    for i in range(count):
        out.append(int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") - half)
    return out


def conv_int(a, b, limit=None):
    """Exact convolution of signed integer sequences.

    ``limit`` keeps only the first ``limit`` entries (and lets the inputs be
    trimmed to that length before packing).
    """
    if not a or not b or (limit is not None and limit <= 0):
        return []
    n_out = len(a) + len(b) - 1
    if limit is not None and limit < n_out:
        n_out = limit
        a = a[:n_out]
        b = b[:n_out]
    ma = max(map(abs, a))
    mb = max(map(abs, b))
    if ma == 0 or mb == 0:
        return [0] * n_out
    bound = ma * mb * min(len(a), len(b))
    nbytes = (bound.bit_length() + 2 + 7) // 8 + 1
    if min(len(a), len(b)) < 16:
        return _schoolbook(a, b, n_out)
    prod = _pack(a, nbytes) * _pack(b, nbytes)
    return _unpack_signed(prod, nbytes, n_out)


def _schoolbook(a, b, n_out):
    out = [0] * n_out
    for i, ai in enumerate(a):
        if not ai:
            continue
        jmax = min(len(b), n_out - i)
        for j in range(jmax):
            if b[j]:
                out[i + j] += ai * b[j]
    return out


def conv_mod(a, b, modulus, limit=None):
    """Convolution of residue sequences, reduced into [0, modulus)."""
    return [c % modulus for c in conv_int(a, b, limit)]
