"""Coupling profiles and operators for nearest-neighbour XX spin chains.

The chain Hamiltonian is H = sum_i J_i (X_i X_{i+1} + Y_i Y_{i+1}) with
site 1 mapped to the most significant bit of computational basis indices.
Units are fixed by the uniform-coupling scale, so times are dimensionless.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "CouplingProfile",
    "Generator",
    "perfect_profile",
    "boundary_profile",
    "build_generator",
    "build_hamiltonian_action",
    "dense_hamiltonian",
]


@dataclass(frozen=True)
class CouplingProfile:
    """Couplings J_1..J_{N-1} of an open chain with n_sites spins."""

    n_sites: int
    couplings: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError(f"n_sites must be >= 2, got {self.n_sites}")
        couplings = tuple(float(c) for c in self.couplings)
        if len(couplings) != self.n_sites - 1:
            raise ValueError(
                f"expected {self.n_sites - 1} couplings, got {len(couplings)}"
            )
        if any(not np.isfinite(c) for c in couplings):
            raise ValueError("couplings must be finite reals")
        object.__setattr__(self, "couplings", couplings)

    def is_centrosymmetric(self, tol: float = 1e-12) -> bool:
        """True when J_i = J_{N-i} within tol, i.e. the chain looks the same
        from either end."""
        c = np.asarray(self.couplings)
        return bool(np.max(np.abs(c - c[::-1])) <= tol)

    def reversed(self) -> "CouplingProfile":
        return CouplingProfile(self.n_sites, self.couplings[::-1], self.label)

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n_sites, "couplings": list(self.couplings), "label": self.label}
        )

    @classmethod
    def from_json(cls, text: str) -> "CouplingProfile":
        data = json.loads(text)
        return cls(data["n"], tuple(data["couplings"]), data.get("label", ""))


def perfect_profile(n: int) -> CouplingProfile:
    """Profile J_i = sqrt(i (n - i)) that revives an end-site excitation
    exactly at t = pi/4."""
    if n < 2:
        raise ValueError(f"perfect profile needs n >= 2, got {n}")
    couplings = tuple(float(np.sqrt(i * (n - i))) for i in range(1, n))
    return CouplingProfile(n, couplings, "perfect")


def boundary_profile(n: int, eta: float) -> CouplingProfile:
    """Uniform interior couplings with both boundary bonds scaled to eta.

    Needs n >= 4 so that at least one interior bond exists.
    """
    if n < 4:
        raise ValueError(f"boundary profile needs n >= 4, got {n}")
    eta = float(eta)
    if not np.isfinite(eta) or eta <= 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    couplings = (eta,) + (1.0,) * (n - 3) + (eta,)
    return CouplingProfile(n, couplings, f"boundary(eta={eta:g})")


@dataclass(frozen=True)
class Generator:
    """Real antisymmetric generator of the end-site operator coefficients.

    ``subdiagonal`` stores the coupling rates g_i = 2 J_i.  The matrix
    realisation staggers their signs (+g_1, -g_2, +g_3, ...) below the
    diagonal: that staggering is what conjugation by the chain Hamiltonian
    actually produces in the alternating X/Y string basis, and the
    cross-engine tests pin it.
    """

    dimension: int
    subdiagonal: tuple[float, ...]

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError(f"dimension must be >= 2, got {self.dimension}")
        sub = tuple(float(g) for g in self.subdiagonal)
        if len(sub) != self.dimension - 1:
            raise ValueError(
                f"expected {self.dimension - 1} subdiagonal entries, got {len(sub)}"
            )
        object.__setattr__(self, "subdiagonal", sub)

    def matrix(self) -> np.ndarray:
        """Dense antisymmetric matrix with the staggered sign convention."""
        n = self.dimension
        m = np.zeros((n, n))
        for i, g in enumerate(self.subdiagonal):
            signed = g if i % 2 == 0 else -g
            m[i + 1, i] = signed
            m[i, i + 1] = -signed
        return m

    def reversed(self) -> "Generator":
        return Generator(self.dimension, self.subdiagonal[::-1])


def build_generator(profile: CouplingProfile) -> Generator:
    return Generator(profile.n_sites, tuple(2.0 * c for c in profile.couplings))


def _bond_indices(n: int, bond: int) -> tuple[np.ndarray, np.ndarray]:
    """Basis indices coupled by bond `bond` (1-based): states whose bits at
    sites bond, bond+1 differ, and their partners with the pair flipped."""
    hi = n - bond          # bit position of site `bond`
    lo = n - bond - 1      # bit position of site `bond + 1`
    idx = np.arange(2**n, dtype=np.int64)
    differs = ((idx >> hi) ^ (idx >> lo)) & 1 == 1
    src = idx[differs]
    dst = src ^ ((1 << hi) | (1 << lo))
    return src, dst


def build_hamiltonian_action(profile: CouplingProfile) -> Callable[[np.ndarray], np.ndarray]:
    """Return a function applying H to a state vector of 2**n amplitudes.

    Each bond contributes amplitude 2 J_i between basis states that differ
    by swapping an anti-aligned neighbouring pair; total magnetization is
    conserved.
    """
    n = profile.n_sites
    bonds = [(_bond_indices(n, b), 2.0 * profile.couplings[b - 1]) for b in range(1, n)]

    def action(psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi)
        if psi.shape != (2**n,):
            raise ValueError(f"state must have length {2**n}, got {psi.shape}")
        out = np.zeros_like(psi, dtype=complex)
        for (src, dst), rate in bonds:
            out[dst] += rate * psi[src]
        return out

    return action


def dense_hamiltonian(profile: CouplingProfile) -> np.ndarray:
    """Dense 2**n x 2**n Hamiltonian matrix; intended for small n."""
    n = profile.n_sites
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for b in range(1, n):
        (src, dst) = _bond_indices(n, b)
        h[dst, src] += 2.0 * profile.couplings[b - 1]
    return h
