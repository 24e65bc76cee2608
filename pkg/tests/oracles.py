"""Independent reference values shared by the test modules."""

import numpy as np
from scipy import special


def circle_symbol(kind, m, s, R=1.0):
    """Fourier symbols of the boundary operators on the circle of radius ``R``.

    Derived from the addition theorem ``K0(s|x - y|) = sum_m I_m(s r<) K_m(s r>) e^{i m (t - t')}``
    and its normal derivatives at ``r = R``.
    """
    z = s * R
    I, K = special.iv(m, z), special.kv(m, z)
    Ip, Kp = special.ivp(m, z), special.kvp(m, z)
    if kind == "V":
        return R * I * K
    if kind == "K":
        return 0.5 * z * (I * Kp + Ip * K)
    if kind == "W":
        return -R * s * s * Ip * Kp
    raise ValueError(kind)


def circle_rayleigh(spaces, asm, s, m):
    """Galerkin Rayleigh quotients of ``cos(m theta)`` for V, K and W."""
    t = asm.tensors(s)
    V = asm.single_layer(s, t)
    K = asm.double_layer(s, t)
    W = asm.hypersingular(s, t)
    th_mid = np.arctan2(spaces.midpoints[:, 1], spaces.midpoints[:, 0])
    th_node = np.arctan2(spaces.nodes[:, 1], spaces.nodes[:, 0])
    f0, f1 = np.cos(m * th_mid), np.cos(m * th_node)
    return {
        "V": (f0 @ V @ f0) / (f0 @ spaces.mass_p0() @ f0),
        "K": (f0 @ K @ f1) / (f0 @ spaces.mass_p0p1() @ f1),
        "W": (f1 @ W @ f1) / (f1 @ spaces.mass_p1() @ f1),
    }


def projector_residual(spaces, asm, s, n_modes=4):
    """Relative residual of ``P^2 - P`` on smooth Fourier modes for the interior Calderon projector."""
    t = asm.tensors(s)
    V = asm.single_layer(s, t, p1=True)
    K = asm.double_layer(s, t, test_p1=True)
    Kt = asm.adjoint_double_layer(s, t, trial_p1=True)
    W = asm.hypersingular(s, t)
    M = spaces.mass_p1()
    Mi = np.linalg.inv(M)
    n = spaces.M3
    eye = np.eye(n)
    P = np.block([[0.5 * eye - Mi @ K, Mi @ V], [Mi @ W, 0.5 * eye + Mi @ Kt]])
    Mb = np.block([[M, 0 * M], [0 * M, M]])
    th = np.arctan2(spaces.nodes[:, 1], spaces.nodes[:, 0])
    modes = [np.cos(m * th) for m in range(n_modes + 1)] + [np.sin(m * th) for m in range(1, n_modes + 1)]
    X = np.array([np.r_[f, 0 * f] for f in modes] + [np.r_[0 * f, f] for f in modes]).T
    Rm = (P @ P - P) @ X

    def norm(Y):
        return np.sqrt(np.real(np.einsum("ik,ij,jk->k", Y.conj(), Mb, Y)))

    return float((norm(Rm) / norm(X)).max())
