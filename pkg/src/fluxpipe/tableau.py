"""Stabilizer tableau (Aaronson-Gottesman) with destabilizers and sign bits.

Rows ``0..n-1`` are destabilizers, rows ``n..2n-1`` stabilizers. Each row is a
Pauli operator ``(-1)^r * prod X^x Z^z`` (with ``Y = iXZ`` absorbed into the
phase convention of the CHP simulator).
"""

from __future__ import annotations

import numpy as np

from .errors import OutOfRange


def _g(x1, z1, x2, z2):
    """Exponent of i picked up when multiplying single-qubit Paulis (vectorized)."""
    x1 = x1.astype(np.int8)
    z1 = z1.astype(np.int8)
    x2 = x2.astype(np.int8)
    z2 = z2.astype(np.int8)
    return np.where(
        (x1 == 1) & (z1 == 1), z2 - x2,
        np.where((x1 == 1) & (z1 == 0), z2 * (2 * x2 - 1),
                 np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0)))


def pauli_product(x1, z1, r1, x2, z2, r2):
    """Multiply ``P1 * P2`` for Hermitian Paulis; the result must be Hermitian."""
    phase = 2 * int(r1) + 2 * int(r2) + int(_g(x1, z1, x2, z2).sum())
    phase %= 4
    if phase not in (0, 2):
        raise ValueError("product of Paulis is not Hermitian (they anticommute)")
    return x1 ^ x2, z1 ^ z2, phase == 2


class Tableau:
    """Stabilizer state on ``n`` qubits, initialized to ``|0...0>``."""

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=bool)
        self.z = np.zeros((2 * n, n), dtype=bool)
        self.r = np.zeros(2 * n, dtype=bool)
        idx = np.arange(n)
        self.x[idx, idx] = True
        self.z[n + idx, idx] = True

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n = self.n
        t.x, t.z, t.r = self.x.copy(), self.z.copy(), self.r.copy()
        return t

    def _check(self, *qs: int):
        for q in qs:
            if not 0 <= q < self.n:
                raise OutOfRange(f"qubit {q} outside 0..{self.n - 1}")

    # -- Clifford gates ----------------------------------------------------

    def h(self, q: int):
        self._check(q)
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int):
        self._check(q)
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def cnot(self, c: int, t: int):
        self._check(c, t)
        if c == t:
            raise OutOfRange("CNOT needs two distinct qubits")
        self.r ^= self.x[:, c] & self.z[:, t] & ~(self.x[:, t] ^ self.z[:, c])
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def cz(self, a: int, b: int):
        self.h(b)
        self.cnot(a, b)
        self.h(b)

    def pauli_x(self, q: int):
        self._check(q)
        self.r ^= self.z[:, q]

    def pauli_z(self, q: int):
        self._check(q)
        self.r ^= self.x[:, q]

    def pauli_y(self, q: int):
        self._check(q)
        self.r ^= self.x[:, q] ^ self.z[:, q]

    def y_plus_90(self, q: int):
        # R_y(+pi/2) = H Z: Z -> X, X -> -Z
        self.pauli_z(q)
        self.h(q)

    def y_minus_90(self, q: int):
        # R_y(-pi/2) = Z H: Z -> -X, X -> Z
        self.h(q)
        self.pauli_z(q)

    # -- measurement -------------------------------------------------------

    def _rowsum(self, h: int, i: int):
        phase = 2 * int(self.r[h]) + 2 * int(self.r[i]) + int(
            _g(self.x[i], self.z[i], self.x[h], self.z[h]).sum())
        self.r[h] = (phase % 4) == 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def _anticommutes(self, px: np.ndarray, pz: np.ndarray) -> np.ndarray:
        return ((self.x & pz).sum(axis=1) + (self.z & px).sum(axis=1)) % 2 == 1

    def peek_pauli(self, px, pz, pr: bool = False) -> int:
        """Expectation of ``(-1)^pr X^px Z^pz``: +1, -1 or 0 if random."""
        px = np.asarray(px, dtype=bool)
        pz = np.asarray(pz, dtype=bool)
        n = self.n
        anti = self._anticommutes(px, pz)
        if anti[n:].any():
            return 0
        # P = +- product of stabilizers whose destabilizer anticommutes with P
        x = np.zeros(n, dtype=bool)
        z = np.zeros(n, dtype=bool)
        r = False
        for i in np.flatnonzero(anti[:n]):
            x, z, r = pauli_product(x, z, r, self.x[n + i], self.z[n + i], self.r[n + i])
        assert (x == px).all() and (z == pz).all()
        return 1 if r == pr else -1

    def measure_pauli(self, px, pz, rng: np.random.Generator, pr: bool = False,
                      forced: int | None = None) -> tuple[int, bool]:
        """Projectively measure ``(-1)^pr X^px Z^pz``; returns ``(bit, was_random)``."""
        px = np.asarray(px, dtype=bool)
        pz = np.asarray(pz, dtype=bool)
        n = self.n
        anti = self._anticommutes(px, pz)
        stab = np.flatnonzero(anti[n:])
        if stab.size == 0:
            return (0 if self.peek_pauli(px, pz, pr) == 1 else 1), False
        p = n + int(stab[0])
        for i in np.flatnonzero(anti):
            if i != p:
                self._rowsum(int(i), p)
        self.x[p - n], self.z[p - n], self.r[p - n] = self.x[p], self.z[p], self.r[p]
        bit = int(rng.integers(2)) if forced is None else int(forced)
        self.x[p] = px
        self.z[p] = pz
        self.r[p] = bool(bit) ^ bool(pr)
        return bit, True

    def measure(self, q: int, rng: np.random.Generator, forced: int | None = None) -> tuple[int, bool]:
        self._check(q)
        pz = np.zeros(self.n, dtype=bool)
        pz[q] = True
        return self.measure_pauli(np.zeros(self.n, dtype=bool), pz, rng, forced=forced)

    # -- comparison --------------------------------------------------------

    def stabilizers(self) -> list[tuple[np.ndarray, np.ndarray, bool]]:
        n = self.n
        return [(self.x[n + i].copy(), self.z[n + i].copy(), bool(self.r[n + i]))
                for i in range(n)]

    def same_state(self, other: "Tableau") -> bool:
        """True iff both tableaux describe the same pure state."""
        if other.n != self.n:
            return False
        return all(self.peek_pauli(x, z, r) == 1 for x, z, r in other.stabilizers())

    def is_consistent(self) -> bool:
        """Symplectic check: stabilizers commute, destabilizer i pairs with stabilizer i."""
        n = self.n
        gram = ((self.x.astype(int) @ self.z.T.astype(int))
                + (self.z.astype(int) @ self.x.T.astype(int))) % 2
        want = np.zeros((2 * n, 2 * n), dtype=int)
        want[np.arange(n), n + np.arange(n)] = 1
        want[n + np.arange(n), np.arange(n)] = 1
        stab_ok = not gram[n:, n:].any()
        return stab_ok and (gram[:n, n:] == want[:n, n:]).all()
