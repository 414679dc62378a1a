"""Exact 2x2 operator algebra in the dressed basis.

The basis order is ``(|psi_+>, |psi_->)`` so that ``sigma_z`` has the upper
dressed state at +1 and ``sigma_plus = |psi_+><psi_-|`` raises.
"""

import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SP = np.array([[0, 1], [0, 0]], dtype=complex)
SM = np.array([[0, 0], [1, 0]], dtype=complex)
PAULI = (I2, SX, SY, SZ)

# TRACE4[j, a, i, b] = Tr[s_j s_a s_i s_b]
TRACE4 = np.einsum("jpq,aqr,irs,bsp->jaib", PAULI, PAULI, PAULI, PAULI)


def density_matrix(r) -> np.ndarray:
    """``rho = (I + r . sigma) / 2``."""
    x, y, z = np.asarray(r, dtype=float)
    return 0.5 * (I2 + x * SX + y * SY + z * SZ)


def bloch_vector(rho) -> np.ndarray:
    """``R_i = Tr[rho sigma_i]``."""
    return np.array([np.trace(rho @ s).real for s in (SX, SY, SZ)])


def transfer_matrix(superop) -> np.ndarray:
    """Pauli transfer matrix ``L_ij = Tr[s_i superop(s_j)] / 2`` of a linear map on 2x2 matrices."""
    out = np.empty((4, 4))
    for j, sj in enumerate(PAULI):
        img = superop(sj)
        for i, si in enumerate(PAULI):
            out[i, j] = 0.5 * np.trace(si @ img).real
    return out


def choi_from_transfer(F) -> np.ndarray:
    """``S_ab = 1/4 sum_ij F_ij Tr[s_j s_a s_i s_b]``; trace 2 for the identity map."""
    return 0.25 * np.einsum("ij,jaib->ab", np.asarray(F, dtype=float), TRACE4)


def commutator(h):
    return lambda rho: -1j * (h @ rho - rho @ h)


def lindblad(a, rate=1.0):
    ad = a.conj().T
    ada = ad @ a
    return lambda rho: rate * (a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada))
