#!/usr/bin/env python3
"""Independent reference for the partially blind RSA chain.

Recomputes, using nothing but hashlib and Python integers, the values the
C++ tests pin: the classroom-sized worked chain and the 64-bit pipeline
vector. Prints key=value lines; the acceptance runner compares them bit for
bit against the library's own output. Keep this file free of any imports
from the repository so it stays an independent cross-check.
"""

import hashlib
import math

SHA384_LEN = 48


def sha384(data: bytes) -> bytes:
    return hashlib.sha384(data).digest()


def expand(seed: bytes, out_len: int, first_block: int = 0) -> bytes:
    """Counter-mode expansion: block i is SHA384(BE32(first_block+i) || seed)."""
    out = b""
    counter = first_block
    while len(out) < out_len:
        out += sha384(counter.to_bytes(4, "big") + seed)
        counter += 1
    return out[:out_len]


def wire_width(bits: int) -> int:
    return (bits + 7) // 8


def hash_to_group(message: bytes, n: int, bits: int) -> int:
    out_len = wire_width(bits) + 16
    blocks = (out_len + SHA384_LEN - 1) // SHA384_LEN
    attempt = 0
    while True:
        x = int.from_bytes(expand(message, out_len, attempt * blocks), "big") % n
        if x != 0:
            return x
        attempt += 1


def derive_info_exponent(canonical: str, n: int, bits: int) -> int:
    k = bits // 2 - 2
    seed = n.to_bytes(wire_width(bits), "big") + sha384(canonical.encode())
    length = (k + 7) // 8
    e = int.from_bytes(expand(seed, length), "big")
    e &= (1 << k) - 1  # keep the low k bits
    e &= ~(1 << (k - 1))  # clear the top retained bit
    e |= 1  # force odd
    return e


def canonical_message(canonical: str, ticket: bytes) -> bytes:
    c = canonical.encode()
    return len(c).to_bytes(4, "big") + c + ticket


def emit(name, value):
    print(f"{name}={value}")


def main():
    # Classroom chain with forced small values: n = 61 * 53.
    p, q = 61, 53
    n = p * q
    lam = math.lcm(p - 1, q - 1)
    e = 7
    d = pow(e, -1, lam)
    m_h, r = 1234, 5
    blinded = m_h * pow(r, e, n) % n
    blind_sig = pow(blinded, d, n)
    r_inv = pow(r, -1, n)
    sig = blind_sig * r_inv % n
    emit("toy_d", d)
    emit("toy_blinded", blinded)
    emit("toy_blind_sig", blind_sig)
    emit("toy_r_inv", r_inv)
    emit("toy_sig", sig)
    emit("toy_verifies", int(pow(sig, e, n) == m_h))

    # 64-bit pipeline with the real hash derivations and a forced blinding
    # factor, so every intermediate is reproducible.
    p, q = 3037001309, 3500000011
    n = p * q
    bits = 64
    lam = math.lcm(p - 1, q - 1)
    canonical = "v1|mode=api|model=gpt2|maxtok=64"
    ticket = bytes(range(32))

    m_h = hash_to_group(canonical_message(canonical, ticket), n, bits)
    e_info = derive_info_exponent(canonical, n, bits)
    d_info = pow(e_info, -1, lam)
    r = 0x123456789ABCDEF5
    blinded = m_h * pow(r, e_info, n) % n
    blind_sig = pow(blinded, d_info, n)
    sig = blind_sig * pow(r, -1, n) % n
    emit("pipe_m_h", m_h)
    emit("pipe_e_info", e_info)
    emit("pipe_d_info", d_info)
    emit("pipe_blinded", blinded)
    emit("pipe_blind_sig", blind_sig)
    emit("pipe_sig", sig)
    emit("pipe_verifies", int(pow(sig, e_info, n) == m_h))


if __name__ == "__main__":
    main()
