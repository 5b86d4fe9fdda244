"""Independent dense reference implementation used by the tests.

Everything here is built from first principles with Kronecker products and
scipy's dense matrix exponential, without importing the package, so that
agreement between the two is evidence and not circularity.  Site 1 is the
leftmost tensor factor (most significant bit).
"""
import numpy as np
from scipy.linalg import expm

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_I_POWERS = (1 + 0j, 1j, -1 + 0j, -1j)


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def site_operator(n, site, letter):
    """Single-site Pauli embedded in an n-site chain (1-based site)."""
    mats = [PAULI["I"]] * n
    mats[site - 1] = PAULI[letter]
    return kron_all(mats)


def string_operator(n, letters):
    return kron_all([PAULI[l] for l in letters])


def chain_hamiltonian(couplings):
    """Sum of J_i (X_i X_{i+1} + Y_i Y_{i+1}) assembled term by term."""
    n = len(couplings) + 1
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for i, j_val in enumerate(couplings, start=1):
        for letter in ("X", "Y"):
            h += j_val * (site_operator(n, i, letter) @ site_operator(n, i + 1, letter))
    return h


def evolution_operator(couplings, t):
    return expm(-1j * t * chain_hamiltonian(couplings))


def heisenberg_conjugate(op, couplings, t):
    u = evolution_operator(couplings, t)
    return u.conj().T @ op @ u


def alternating_string(n, k, origin="site1"):
    """k-th member of the operator family an evolved end-site X spans."""
    end = "X" if k % 2 == 1 else "Y"
    letters = ["I"] * n
    if origin == "site1":
        for j in range(k - 1):
            letters[j] = "Z"
        letters[k - 1] = end
    else:
        for j in range(n - k + 1, n):
            letters[j] = "Z"
        letters[n - k] = end
    return string_operator(n, letters)


def string_coefficients(couplings, t, origin="site1"):
    """Project the conjugated end-site X onto the alternating family."""
    n = len(couplings) + 1
    site = 1 if origin == "site1" else n
    evolved = heisenberg_conjugate(site_operator(n, site, "X"), couplings, t)
    coeffs = []
    for k in range(1, n + 1):
        s = alternating_string(n, k, origin)
        coeffs.append(np.real(np.trace(s @ evolved)) / 2**n)
    return np.array(coeffs)


def reduce_to_last_site(rho, n):
    """Partial trace onto site n by explicit block summation."""
    half = 2 ** (n - 1)
    shaped = rho.reshape(half, 2, half, 2)
    out = np.zeros((2, 2), dtype=complex)
    for a in range(half):
        out += shaped[a, :, a, :]
    return out


def gibbs_state(hamiltonian, beta):
    shifted = expm(-beta * (hamiltonian - np.min(np.linalg.eigvalsh(hamiltonian)) * np.eye(len(hamiltonian))))
    return shifted / np.trace(shifted)


def random_pure(rng, n):
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


def random_mixed(rng, n, terms=3):
    dim = 2**n
    rho = np.zeros((dim, dim), dtype=complex)
    weights = rng.random(terms)
    weights /= weights.sum()
    for w in weights:
        psi = random_pure(rng, n)
        rho += w * np.outer(psi, psi.conj())
    return rho


def protocol_branches(couplings, t, rho_in, medium, apply_correction=True):
    """Brute-force the full measurement protocol with explicit projectors.

    Returns a list of (outcome_pre, outcome_post, weight, output_2x2)
    over all branches with nonvanishing probability.  The site-N starting
    state is |0><0|.
    """
    n = len(couplings) + 1
    u = evolution_operator(couplings, t)
    i_n = _I_POWERS[n % 4]
    eye_front = np.eye(2 ** (n - 1), dtype=complex)
    ket0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    branches = []
    for o_pre in (1, -1):
        v = np.array([1.0, o_pre * i_n]) / np.sqrt(2.0)
        proj_pre = np.kron(eye_front, np.outer(v, v.conj()))
        rho0 = np.kron(np.kron(rho_in, medium), ket0)
        rho1 = proj_pre @ rho0 @ proj_pre
        p_pre = float(np.real(np.trace(rho1)))
        if p_pre < 1e-14:
            continue
        rho1 = u @ (rho1 / p_pre) @ u.conj().T
        for o_post in (1, -1):
            w_vec = np.array([1.0, o_post]) / np.sqrt(2.0)
            proj_post = np.kron(np.outer(w_vec, w_vec.conj()), eye_front)
            rho2 = proj_post @ rho1 @ proj_post
            p_post = float(np.real(np.trace(rho2)))
            if p_post < 1e-14:
                continue
            out = reduce_to_last_site(rho2 / p_post, n)
            if apply_correction:
                phase = i_n if o_pre * o_post > 0 else -i_n
                corr = np.diag([1.0, phase])
                out = corr @ out @ corr.conj().T
            branches.append((o_pre, o_post, p_pre * p_post, out))
    return branches


def qubit_fidelity(rho, sigma):
    """Two-by-two closed form, clipping tiny negative determinants."""
    det_r = max(float(np.real(np.linalg.det(rho))), 0.0)
    det_s = max(float(np.real(np.linalg.det(sigma))), 0.0)
    return float(np.real(np.trace(rho @ sigma)) + 2.0 * np.sqrt(det_r * det_s))
