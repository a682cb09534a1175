"""Pauli-string algebra: tensor products of X/Y/Z and weighted sums of them.

A :class:`PauliString` is a sparse product of single-qubit Pauli matrices;
a :class:`QubitOperator` is a linear combination of Pauli strings.  Both are
immutable values, so they are safe to share between threads and to use as
dictionary keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

_OPS = ("X", "Y", "Z")

# single-qubit products: (a, b) -> (phase, result or "" for identity)
_PRODUCT_TABLE = {
    ("X", "X"): (1, ""),
    ("Y", "Y"): (1, ""),
    ("Z", "Z"): (1, ""),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


@dataclass(frozen=True)
class PauliString:
    """A product of Pauli operators on distinct qubits.

    Attributes:
        ops: Tuple of (qubit index, operator) pairs with strictly ascending
            qubit indices and operator in {"X", "Y", "Z"}.  The empty tuple
            is the identity.
    """

    ops: tuple[tuple[int, str], ...] = ()

    def __post_init__(self) -> None:
        last = -1
        for qubit, op in self.ops:
            if qubit <= last:
                raise ValueError(f"qubit indices must be strictly ascending: {self.ops}")
            if op not in _OPS:
                raise ValueError(f"unknown Pauli operator {op!r}")
            last = qubit

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, str]]) -> "PauliString":
        """Build a string from unsorted (qubit, op) pairs on distinct qubits."""
        return cls(tuple(sorted(pairs)))

    @property
    def is_identity(self) -> bool:
        return not self.ops

    @property
    def weight(self) -> int:
        return len(self.ops)

    @property
    def max_qubit(self) -> int:
        """Highest qubit index touched, -1 for the identity."""
        return self.ops[-1][0] if self.ops else -1

    def masks(self) -> tuple[int, int, int]:
        """Bit masks for fast statevector application.

        Returns:
            (x_mask, zy_mask, n_y): bits flipped by the string, bits picking
            up an occupation sign (Y or Z factors), and the number of Y
            factors.  On a basis state with bits b the string acts as
            ``i**n_y * (-1)**popcount(b & zy_mask) |b XOR x_mask>``.
        """
        x_mask = zy_mask = n_y = 0
        for qubit, op in self.ops:
            bit = 1 << qubit
            if op != "Z":
                x_mask |= bit
            if op != "X":
                zy_mask |= bit
            if op == "Y":
                n_y += 1
        return x_mask, zy_mask, n_y

    def commutes_with(self, other: "PauliString") -> bool:
        """True if the two strings commute as operators.

        Two Pauli strings commute iff they anticommute on an even number
        of shared qubits.
        """
        clashes = 0
        mine = dict(self.ops)
        for qubit, op in other.ops:
            if qubit in mine and mine[qubit] != op:
                clashes += 1
        return clashes % 2 == 0

    def __str__(self) -> str:
        if not self.ops:
            return "I"
        return " ".join(f"{op}{qubit}" for qubit, op in self.ops)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Inverse of ``str``: parse e.g. ``"X0 Z1 Y3"`` or ``"I"``."""
        text = text.strip()
        if not text or text == "I":
            return cls()
        pairs = []
        for token in text.split():
            op, qubit = token[0].upper(), token[1:]
            if op not in _OPS or not qubit.isdigit():
                raise ValueError(f"bad Pauli token {token!r}")
            pairs.append((int(qubit), op))
        return cls.from_pairs(pairs)


def pauli_product(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Multiply two Pauli strings.

    Returns:
        (phase, string) with phase in {1, -1, 1j, -1j} such that
        ``a @ b == phase * string``.
    """
    phase: complex = 1
    result: list[tuple[int, str]] = []
    ia, ib = 0, 0
    ops_a, ops_b = a.ops, b.ops
    while ia < len(ops_a) and ib < len(ops_b):
        qa, oa = ops_a[ia]
        qb, ob = ops_b[ib]
        if qa < qb:
            result.append((qa, oa))
            ia += 1
        elif qb < qa:
            result.append((qb, ob))
            ib += 1
        else:
            p, op = _PRODUCT_TABLE[(oa, ob)]
            phase *= p
            if op:
                result.append((qa, op))
            ia += 1
            ib += 1
    result.extend(ops_a[ia:])
    result.extend(ops_b[ib:])
    return phase, PauliString(tuple(result))


class QubitOperator:
    """A weighted sum of Pauli strings.

    Terms are stored as a mapping from :class:`PauliString` to a complex
    coefficient.  Instances are treated as immutable: arithmetic returns new
    operators, and :meth:`simplify` prunes numerically zero terms.
    """

    __slots__ = ("_terms",)

    PRUNE_THRESHOLD = 1e-12

    def __init__(self, terms: Mapping[PauliString, complex] | None = None):
        self._terms: dict[PauliString, complex] = dict(terms) if terms else {}

    @classmethod
    def from_term(cls, string: PauliString, coefficient: complex = 1.0) -> "QubitOperator":
        return cls({string: coefficient})

    @classmethod
    def identity(cls, coefficient: complex = 1.0) -> "QubitOperator":
        return cls({PauliString(): coefficient})

    @classmethod
    def zero(cls) -> "QubitOperator":
        return cls()

    @property
    def terms(self) -> dict[PauliString, complex]:
        """The term mapping (a copy, to preserve value semantics)."""
        return dict(self._terms)

    def items(self) -> Iterator[tuple[PauliString, complex]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def n_qubits(self) -> int:
        """Smallest register size that supports every term."""
        return max((s.max_qubit for s in self._terms), default=-1) + 1

    def coefficient(self, string: PauliString) -> complex:
        return self._terms.get(string, 0.0)

    def __add__(self, other: "QubitOperator") -> "QubitOperator":
        terms = dict(self._terms)
        for string, coeff in other._terms.items():
            terms[string] = terms.get(string, 0.0) + coeff
        return QubitOperator(terms)

    def __sub__(self, other: "QubitOperator") -> "QubitOperator":
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, QubitOperator):
            terms: dict[PauliString, complex] = {}
            for sa, ca in self._terms.items():
                for sb, cb in other._terms.items():
                    phase, string = pauli_product(sa, sb)
                    terms[string] = terms.get(string, 0.0) + ca * cb * phase
            return QubitOperator(terms)
        return QubitOperator({s: c * other for s, c in self._terms.items()})

    def __rmul__(self, scalar) -> "QubitOperator":
        return self * scalar

    def simplify(self, threshold: float | None = None) -> "QubitOperator":
        """Drop terms with |coefficient| below the pruning threshold."""
        if threshold is None:
            threshold = self.PRUNE_THRESHOLD
        return QubitOperator(
            {s: c for s, c in self._terms.items() if abs(c) > threshold}
        )

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in map(complex, self._terms.values()))

    def real_coefficients(self, tol: float = 1e-12) -> "QubitOperator":
        """Cast coefficients to real, checking Hermiticity first."""
        if not self.is_hermitian(tol):
            raise ValueError("operator has non-real coefficients")
        return QubitOperator({s: complex(c).real for s, c in self._terms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, QubitOperator):
            return NotImplemented
        keys = set(self._terms) | set(other._terms)
        return all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= 1e-12
            for k in keys
        )

    def isclose(self, other: "QubitOperator", tol: float = 1e-10) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= tol
            for k in keys
        )

    def __str__(self) -> str:
        return self.to_text()

    def to_text(self) -> str:
        """Serialize one term per line as ``coeff  X0 Z1 Y3`` (identity: ``I``).

        Terms are emitted in a deterministic order so that serialized
        operators can be compared as text.
        """
        lines = []
        for string in sorted(self._terms, key=lambda s: (s.weight, s.ops)):
            coeff = complex(self._terms[string])
            value = repr(coeff.real) if coeff.imag == 0.0 else repr(coeff)
            lines.append(f"{value}  {string}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "QubitOperator":
        terms: dict[PauliString, complex] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                value, _, rest = line.partition("  ")
                coeff = complex(value)
                string = PauliString.parse(rest)
            except ValueError as exc:
                raise ValueError(f"bad operator term on line {lineno}: {line!r}") from exc
            terms[string] = terms.get(string, 0.0) + coeff
        return cls(terms)


def one_norm(operator: QubitOperator) -> float:
    """Sum of absolute term coefficients, excluding the identity term.

    The identity contributes a constant to every expectation value and
    costs no measurements, so it is left out of sampling-cost estimates.
    """
    return float(
        sum(abs(c) for s, c in operator.items() if not s.is_identity)
    )
