"""Exact symbolic algebra of spin-1/2 Pauli strings on a chain of L sites.

A :class:`PauliString` is a site-by-site product of single-site spin
operators.  Non-identity letters stand for the spin-1/2 operators
``S_x, S_y, S_z`` (one half of the corresponding Pauli matrix), so the
algebra's structure constants carry the 1/2 normalization, e.g.
``S_x S_y = (i/2) S_z`` and ``S_x S_x = 1/4``.

An :class:`OperatorSum` is a finite complex-weighted sum of Pauli strings.
Instances are immutable after construction and every operation returns a
new pruned instance, so values can be shared freely between threads.

Internally a string over L sites is packed into two bitmasks ``(x, z)``
with per-site encoding I=(0,0), X=(1,0), Y=(1,1), Z=(0,1); bit ``j``
corresponds to site ``j``.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Mapping

__all__ = [
    "PRUNE_THRESHOLD",
    "PauliString",
    "OperatorSum",
    "multiply",
    "commutator",
    "trace_inner",
    "norm",
    "intensive_norm",
    "inner_product",
    "coherence_decompose",
    "to_text",
    "from_text",
]

# Coefficients below this magnitude are dropped after every operation.
# Acceptance tolerances are >= 1e-12, so double precision with this prune
# level is exact for all practical purposes.
PRUNE_THRESHOLD = 1e-14

_LETTERS = "IXYZ"
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_I_POWERS = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


class PauliString:
    """A product of single-site spin-1/2 operators with one letter per site."""

    __slots__ = ("length", "x", "z")

    def __init__(self, length: int, x: int = 0, z: int = 0):
        if length < 1:
            raise ValueError("PauliString length must be positive")
        mask = (1 << length) - 1
        if (x | z) & ~mask:
            raise ValueError("site mask exceeds string length")
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("PauliString is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, length: int) -> "PauliString":
        return cls(length, 0, 0)

    @classmethod
    def from_letters(cls, letters: str) -> "PauliString":
        """Build from a string like ``"IXZY"`` (site 0 first)."""
        x = z = 0
        for j, letter in enumerate(letters):
            try:
                bx, bz = _LETTER_BITS[letter]
            except KeyError:
                raise ValueError(f"unknown letter {letter!r}") from None
            x |= bx << j
            z |= bz << j
        return cls(len(letters), x, z)

    @classmethod
    def single(cls, length: int, site: int, letter: str) -> "PauliString":
        """S_letter acting on one site (0-based) of a length-L chain."""
        if not 0 <= site < length:
            raise ValueError("site out of range")
        bx, bz = _LETTER_BITS[letter]
        return cls(length, bx << site, bz << site)

    @classmethod
    def from_sites(cls, length: int, sites: Mapping[int, str]) -> "PauliString":
        x = z = 0
        for site, letter in sites.items():
            if not 0 <= site < length:
                raise ValueError("site out of range")
            bx, bz = _LETTER_BITS[letter]
            x |= bx << site
            z |= bz << site
        return cls(length, x, z)

    # -- views ---------------------------------------------------------

    @property
    def letters(self) -> str:
        return "".join(
            _LETTERS[(((self.z >> j) & 1) << 1) | (((self.x >> j) ^ (self.z >> j)) & 1)]
            if ((self.x | self.z) >> j) & 1
            else "I"
            for j in range(self.length)
        )

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x | self.z
        return tuple(j for j in range(self.length) if (m >> j) & 1)

    @property
    def weight(self) -> int:
        """Number of non-identity sites."""
        return (self.x | self.z).bit_count()

    @property
    def range(self) -> int:
        """max support index - min support index + 1; 0 for the identity."""
        m = self.x | self.z
        if m == 0:
            return 0
        return m.bit_length() - _lowest_bit(m)

    def is_identity(self) -> bool:
        return (self.x | self.z) == 0

    # -- protocol ------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and self.length == other.length
            and self.x == other.x
            and self.z == other.z
        )

    def __hash__(self) -> int:
        return hash((self.length, self.x, self.z))

    def __lt__(self, other: "PauliString") -> bool:
        # canonical order: site-major, letters I < X < Y < Z
        return self.letters < other.letters

    def __repr__(self) -> str:
        return f"PauliString({self.letters!r})"


def _lowest_bit(m: int) -> int:
    return (m & -m).bit_length() - 1


def _decode_letters(length: int, x: int, z: int) -> str:
    return PauliString(length, x, z).letters


def _mul_keys(x1: int, z1: int, x2: int, z2: int) -> tuple[complex, int, int]:
    """Product of two packed spin strings: returns (scalar, x3, z3)."""
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    ip = ((x1 & z1).bit_count() + (x2 & z2).bit_count() - (x3 & z3).bit_count()) & 3
    scalar = _I_POWERS[ip]
    if (z1 & x2).bit_count() & 1:
        scalar = -scalar
    w = (x3 | z3).bit_count() - (x1 | z1).bit_count() - (x2 | z2).bit_count()
    return scalar * 2.0**w, x3, z3


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Exact product ``a * b = scalar * c`` in the spin-1/2 string algebra.

    The returned scalar absorbs every factor (phases and powers of 1/2
    from the ``S = sigma/2`` normalization); ``c`` is the unique product
    string.
    """
    if a.length != b.length:
        raise ValueError("length mismatch")
    scalar, x3, z3 = _mul_keys(a.x, a.z, b.x, b.z)
    return scalar, PauliString(a.length, x3, z3)


class OperatorSum:
    """Immutable complex-weighted sum of Pauli strings of one common length."""

    __slots__ = ("length", "_terms")

    def __init__(self, length: int, terms: Mapping | Iterable | None = None):
        if length < 1:
            raise ValueError("OperatorSum length must be positive")
        raw: dict[tuple[int, int], complex] = {}
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for key, coeff in items:
                if isinstance(key, PauliString):
                    if key.length != length:
                        raise ValueError("term length mismatch")
                    k = (key.x, key.z)
                elif isinstance(key, str):
                    p = PauliString.from_letters(key)
                    if p.length != length:
                        raise ValueError("term length mismatch")
                    k = (p.x, p.z)
                else:
                    k = key
                c = raw.get(k, 0j) + complex(coeff)
                raw[k] = c
        raw = {k: c for k, c in raw.items() if abs(c) > PRUNE_THRESHOLD}
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "_terms", raw)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("OperatorSum is immutable")

    @classmethod
    def _from_raw(cls, length: int, raw: dict) -> "OperatorSum":
        """Trusted constructor: takes ownership of a pruned packed dict."""
        out = object.__new__(cls)
        object.__setattr__(out, "length", length)
        object.__setattr__(out, "_terms", raw)
        return out

    @classmethod
    def zero(cls, length: int) -> "OperatorSum":
        return cls._from_raw(length, {})

    @classmethod
    def from_string(cls, p: PauliString, coeff: complex = 1.0) -> "OperatorSum":
        return cls(p.length, {p: coeff})

    # -- inspection -----------------------------------------------------

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __iter__(self) -> Iterator[tuple[PauliString, complex]]:
        """Terms in canonical order (site-major, I < X < Y < Z)."""
        n = self.length
        decorated = sorted(
            (_decode_letters(n, x, z), x, z) for (x, z) in self._terms
        )
        for _, x, z in decorated:
            yield PauliString(n, x, z), self._terms[(x, z)]

    def coefficient(self, p: PauliString | str) -> complex:
        if isinstance(p, str):
            p = PauliString.from_letters(p)
        return self._terms.get((p.x, p.z), 0j)

    @property
    def range(self) -> int:
        return max((PauliString(self.length, x, z).range for (x, z) in self._terms), default=0)

    # -- linear structure -------------------------------------------------

    def _check(self, other: "OperatorSum"):
        if not isinstance(other, OperatorSum):
            raise TypeError("expected OperatorSum")
        if self.length != other.length:
            raise ValueError("length mismatch")

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        self._check(other)
        raw = dict(self._terms)
        for k, c in other._terms.items():
            v = raw.get(k, 0j) + c
            if abs(v) > PRUNE_THRESHOLD:
                raw[k] = v
            elif k in raw:
                del raw[k]
        return OperatorSum._from_raw(self.length, raw)

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        self._check(other)
        raw = dict(self._terms)
        for k, c in other._terms.items():
            v = raw.get(k, 0j) - c
            if abs(v) > PRUNE_THRESHOLD:
                raw[k] = v
            elif k in raw:
                del raw[k]
        return OperatorSum._from_raw(self.length, raw)

    def __neg__(self) -> "OperatorSum":
        return OperatorSum._from_raw(self.length, {k: -c for k, c in self._terms.items()})

    def __mul__(self, scalar) -> "OperatorSum":
        s = complex(scalar)
        if abs(s) < PRUNE_THRESHOLD:
            return OperatorSum.zero(self.length)
        return OperatorSum._from_raw(self.length, {k: s * c for k, c in self._terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorSum") -> "OperatorSum":
        """Operator product, expanded term by term."""
        self._check(other)
        out: dict[tuple[int, int], complex] = {}
        for (x1, z1), c1 in self._terms.items():
            for (x2, z2), c2 in other._terms.items():
                scalar, x3, z3 = _mul_keys(x1, z1, x2, z2)
                k = (x3, z3)
                out[k] = out.get(k, 0j) + scalar * c1 * c2
        return OperatorSum._from_raw(
            self.length, {k: c for k, c in out.items() if abs(c) > PRUNE_THRESHOLD}
        )

    # -- structure maps ---------------------------------------------------

    def adjoint(self) -> "OperatorSum":
        return OperatorSum._from_raw(
            self.length, {k: c.conjugate() for k, c in self._terms.items()}
        )

    def hermitian_defect(self) -> float:
        """Norm of (A - A^dag)/2; zero iff all coefficients are real."""
        if not self._terms:
            return 0.0
        s = sum(c.imag**2 * 0.25 ** (x | z).bit_count() for (x, z), c in self._terms.items())
        return math.sqrt(2.0**self.length * s)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return self.hermitian_defect() <= tol

    def real_part(self) -> "OperatorSum":
        """Hermitian part (A + A^dag)/2: keeps the real coefficient parts."""
        raw = {k: complex(c.real) for k, c in self._terms.items() if abs(c.real) > PRUNE_THRESHOLD}
        return OperatorSum._from_raw(self.length, raw)

    def shifted(self, d: int) -> "OperatorSum":
        """Cyclic shift of all sites by d (site j -> j + d mod L)."""
        n = self.length
        d %= n
        if d == 0:
            return self
        mask = (1 << n) - 1
        raw = {}
        for (x, z), c in self._terms.items():
            x2 = ((x << d) | (x >> (n - d))) & mask
            z2 = ((z << d) | (z >> (n - d))) & mask
            raw[(x2, z2)] = c
        return OperatorSum._from_raw(n, raw)

    def __repr__(self) -> str:
        parts = [f"{c:+.6g} {p.letters}" for p, c in list(self)[:6]]
        if len(self) > 6:
            parts.append("...")
        body = ", ".join(parts) if parts else "0"
        return f"OperatorSum(L={self.length}: {body})"


def commutator(a: OperatorSum, b: OperatorSum) -> OperatorSum:
    """AB - BA, using the anticommutation structure to skip vanishing pairs."""
    if a.length != b.length:
        raise ValueError("length mismatch")
    out: dict[tuple[int, int], complex] = {}
    for (x1, z1), c1 in a._terms.items():
        for (x2, z2), c2 in b._terms.items():
            # strings commute unless the symplectic form is odd
            if ((z1 & x2).bit_count() + (x1 & z2).bit_count()) & 1:
                scalar, x3, z3 = _mul_keys(x1, z1, x2, z2)
                k = (x3, z3)
                out[k] = out.get(k, 0j) + 2.0 * scalar * c1 * c2
    return OperatorSum._from_raw(
        a.length, {k: c for k, c in out.items() if abs(c) > PRUNE_THRESHOLD}
    )


def trace_inner(a: OperatorSum, b: OperatorSum) -> complex:
    """Unnormalized Hilbert-Schmidt product Tr(A^dag B).

    Distinct canonical strings are trace-orthogonal and
    Tr(P^dag P) = 2^L (1/4)^weight(P).
    """
    if a.length != b.length:
        raise ValueError("length mismatch")
    small, big = (a._terms, b._terms) if len(a) <= len(b) else (b._terms, a._terms)
    swapped = len(a) > len(b)
    s = 0j
    for k, c in small.items():
        other = big.get(k)
        if other is not None:
            x, z = k
            w = (x | z).bit_count()
            if swapped:
                s += other.conjugate() * c * 0.25**w
            else:
                s += c.conjugate() * other * 0.25**w
    return 2.0**a.length * s


def norm(a: OperatorSum) -> float:
    """Frobenius norm sqrt(Tr A^dag A); equals sqrt(Tr A^2) for Hermitian A."""
    s = sum(abs(c) ** 2 * 0.25 ** (x | z).bit_count() for (x, z), c in a._terms.items())
    return math.sqrt(2.0**a.length * s)


def intensive_norm(a: OperatorSum) -> float:
    """||A|| / sqrt(L 2^L), the size-independent diagnostic normalization."""
    return norm(a) / math.sqrt(a.length * 2.0**a.length)


def inner_product(a: OperatorSum, b: OperatorSum) -> complex:
    """Normalized infinite-temperature overlap Tr(A^dag B) / (||A|| ||B||)."""
    na, nb = norm(a), norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("inner_product undefined for the zero operator")
    return trace_inner(a, b) / (na * nb)


# ---------------------------------------------------------------------------
# quantum coherence orders with respect to the collective z magnetization
# ---------------------------------------------------------------------------

_XY_CACHE: dict[tuple[str, ...], dict[int, list[tuple[complex, tuple[str, ...]]]]] = {}


def _xy_pattern_components(letters: tuple[str, ...]):
    """Coherence split of an X/Y-only pattern, via the ladder basis.

    Expands each site as S_x = (S_+ + S_-)/2, S_y = (S_+ - S_-)/2i, groups
    the ladder monomials by q = #(+) - #(-), and converts back with
    S_+- = S_x +- i S_y.  Coefficients are exact dyadic multiples of i^k.
    The result depends only on the letter pattern, hence the cache.
    """
    cached = _XY_CACHE.get(letters)
    if cached is not None:
        return cached
    k = len(letters)
    acc: dict[tuple[int, tuple[str, ...]], complex] = {}
    for sigma in range(1 << k):
        w = 1.0 + 0j
        q = 0
        for j, letter in enumerate(letters):
            if (sigma >> j) & 1:  # S_+
                q += 1
                w *= 0.5 if letter == "X" else -0.5j
            else:  # S_-
                q -= 1
                w *= 0.5 if letter == "X" else 0.5j
        for back in range(1 << k):
            w2 = w
            repl = []
            for j in range(k):
                if (back >> j) & 1:
                    repl.append("Y")
                    w2 *= 1j if (sigma >> j) & 1 else -1j
                else:
                    repl.append("X")
            key = (q, tuple(repl))
            acc[key] = acc.get(key, 0j) + w2
    out: dict[int, list[tuple[complex, tuple[str, ...]]]] = {}
    for (q, repl), c in acc.items():
        if abs(c) > 1e-15:
            out.setdefault(q, []).append((c, repl))
    _XY_CACHE[letters] = out
    return out


def coherence_decompose(a: OperatorSum) -> dict[int, OperatorSum]:
    """Split A = sum_q A_q with [Z, A_q] = q A_q (Z = collective z spin).

    Only X/Y letters carry coherence; Z and I sites are spectators.  The
    components sum back to A exactly and each is returned in the Pauli
    letter basis.
    """
    n = a.length
    comps: dict[int, dict[tuple[int, int], complex]] = {}
    for (x, z), c in a._terms.items():
        xy_sites = [j for j in range(n) if (x >> j) & 1]
        if not xy_sites:
            comps.setdefault(0, {})
            comps[0][(x, z)] = comps[0].get((x, z), 0j) + c
            continue
        letters = tuple("Y" if (z >> j) & 1 else "X" for j in xy_sites)
        for q, entries in _xy_pattern_components(letters).items():
            tgt = comps.setdefault(q, {})
            for w, repl in entries:
                z2 = z
                for j, letter in zip(xy_sites, repl):
                    if letter == "Y":
                        z2 |= 1 << j
                    else:
                        z2 &= ~(1 << j)
                key = (x, z2)
                tgt[key] = tgt.get(key, 0j) + w * c
    return {
        q: OperatorSum._from_raw(
            n, {k: c for k, c in d.items() if abs(c) > PRUNE_THRESHOLD}
        )
        for q, d in sorted(comps.items())
        if any(abs(c) > PRUNE_THRESHOLD for c in d.values())
    }


# ---------------------------------------------------------------------------
# canonical text serialization
# ---------------------------------------------------------------------------


def to_text(a: OperatorSum) -> str:
    """One term per line: ``<coeff_re> <coeff_im> <letters>``, canonical order."""
    lines = [f"{repr(c.real)} {repr(c.imag)} {p.letters}" for p, c in a]
    return "\n".join(lines) + ("\n" if lines else "")


def from_text(text: str, length: int | None = None) -> OperatorSum:
    """Parse the :func:`to_text` format; length inferred from the first term."""
    terms = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        re_s, im_s, letters = line.split()
        if length is None:
            length = len(letters)
        elif len(letters) != length:
            raise ValueError("inconsistent term length")
        terms[PauliString.from_letters(letters)] = float(re_s) + 1j * float(im_s)
    if length is None:
        raise ValueError("cannot infer length from empty text")
    return OperatorSum(length, terms)
