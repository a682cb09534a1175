"""FCIDUMP text I/O for molecular-orbital integrals.

The format is the usual one: a namelist header carrying NORB and NELEC,
then one record ``value i j k l`` per line with 1-based orbital indices in
chemist notation (ij|kl).  Records with ``k = l = 0`` carry the core
Hamiltonian h_ij, and the all-zero index record carries the scalar
(nuclear repulsion) energy.  This is the ingestion route for systems whose
integrals were produced elsewhere.
"""

from __future__ import annotations

import re

import numpy as np

from .chem import MoIntegrals


class FcidumpError(ValueError):
    """Malformed FCIDUMP content; the message carries the line number."""


_HEADER_FIELD = re.compile(r"([A-Za-z0-9]+)\s*=\s*([^,\s]+)")


def read_fcidump(path) -> MoIntegrals:
    """Parse an FCIDUMP file into MO integrals.

    Every 4-index record is spread over its 8 permutational images, so
    files that store only the canonical triangle round-trip exactly.
    """
    with open(path) as handle:
        lines = handle.readlines()

    norb = nelec = None
    body_start = None
    header_text = []
    for lineno, raw in enumerate(lines, start=1):
        header_text.append(raw)
        if "&END" in raw.upper() or raw.strip() == "/":
            body_start = lineno
            break
    if body_start is None:
        raise FcidumpError("missing &END terminator in FCIDUMP header")
    joined = " ".join(header_text)
    fields = {key.upper(): value for key, value in _HEADER_FIELD.findall(joined)}
    try:
        norb = int(fields["NORB"])
        nelec = int(fields["NELEC"])
    except (KeyError, ValueError) as exc:
        raise FcidumpError(f"header must define integer NORB and NELEC: {exc}") from exc
    if norb <= 0:
        raise FcidumpError(f"NORB must be positive, got {norb}")

    h_nuc = 0.0
    h = np.zeros((norb, norb))
    eri = np.zeros((norb, norb, norb, norb))
    for lineno, raw in enumerate(lines[body_start:], start=body_start + 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FcidumpError(f"line {lineno}: expected 'value i j k l', got {line!r}")
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError:
            raise FcidumpError(f"line {lineno}: cannot parse record {line!r}") from None
        if min(i, j, k, l) < 0 or max(i, j, k, l) > norb:
            raise FcidumpError(f"line {lineno}: orbital index out of range in {line!r}")
        if i == j == k == l == 0:
            h_nuc = value
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FcidumpError(f"line {lineno}: bad one-electron record {line!r}")
            h[i - 1, j - 1] = value
            h[j - 1, i - 1] = value
        elif min(i, j, k, l) == 0:
            raise FcidumpError(f"line {lineno}: bad index pattern in {line!r}")
        else:
            a, b, c, d = i - 1, j - 1, k - 1, l - 1
            for p, q in ((a, b), (b, a)):
                for r, s in ((c, d), (d, c)):
                    eri[p, q, r, s] = value
                    eri[r, s, p, q] = value

    return MoIntegrals(
        h_spatial=h, eri_mo=eri, h_nuc=h_nuc, n_orbitals=norb, n_electrons=nelec
    )


def write_fcidump(mo: MoIntegrals, path, threshold: float = 0.0) -> None:
    """Write MO integrals, emitting the canonical triangle of the ERI tensor.

    Values are printed with enough digits to round-trip within 1e-12.
    """
    n = mo.n_orbitals
    lines = [
        f"&FCI NORB={n},NELEC={mo.n_electrons},MS2=0,",
        " ORBSYM=" + "1," * n,
        " ISYM=1,",
        "&END",
    ]

    def record(value: float, i: int, j: int, k: int, l: int) -> str:
        return f"{value: .16E} {i:4d} {j:4d} {k:4d} {l:4d}"

    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                for l in range((j if k == i else k) + 1):
                    value = mo.eri_mo[i, j, k, l]
                    if abs(value) > threshold:
                        lines.append(record(value, i + 1, j + 1, k + 1, l + 1))
    for i in range(n):
        for j in range(i + 1):
            value = mo.h_spatial[i, j]
            if abs(value) > threshold:
                lines.append(record(value, i + 1, j + 1, 0, 0))
    lines.append(record(mo.h_nuc, 0, 0, 0, 0))

    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
