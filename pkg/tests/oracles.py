"""Reference computations written independently of the package internals.

None of these call into bec_gwsim's integrators; they re-derive the physics
from the field equation or from closed forms so that tests compare two
separate codes.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dst
from scipy.integrate import quad, solve_ivp


def mol_pde_modes(n_modes, box_length, cs0, a_plus, omega, t_end, n_points=200, rtol=1e-11):
    """Method-of-lines solve of d_t(P phi_t) = cs0^2 R phi_xx with Dirichlet walls.

    P = sqrt(1 - h^2), R = sqrt(1 - h^2)/(1 + h), h = a_plus sin(omega t).
    The field is written in first-order form (phi, pi = P phi_t), so no h-dot
    appears.  phi_xx uses the fourth-order five-point stencil with odd
    reflection across the walls.  Each in-mode m starts as sin(k_m x) with
    the positive-frequency data of the continuum frequency w_m; at t_end the
    field is projected back onto sine modes with a type-I discrete sine
    transform.

    Returns dict with q, qdot, alpha, beta (rows: in-mode, columns: out-mode)
    and the stencil frequencies ``omega_stencil``.
    """
    m = n_points
    dx = box_length / (m + 1)
    x = dx * np.arange(1, m + 1)
    k = np.arange(1, n_modes + 1) * np.pi / box_length
    w = cs0 * k
    theta = k * dx
    w_stencil = cs0 * np.sqrt((30.0 - 32.0 * np.cos(theta) + 2.0 * np.cos(2.0 * theta)) / 12.0) / dx
    shapes = np.sin(np.outer(k, x))

    def lap(f):
        # f has shape (m, cols); ghosts f[-1] = -f[1], f[0] = 0 at the walls.
        g = np.zeros((m + 4, f.shape[1]))
        g[2:-2] = f
        g[0] = -f[0]
        g[-1] = -f[-1]
        return (-g[4:] + 16.0 * g[3:-1] - 30.0 * g[2:-2] + 16.0 * g[1:-3] - g[:-4]) / (12.0 * dx**2)

    n_cols = 2 * n_modes

    def rhs(t, y):
        ht = a_plus * np.sin(omega * t)
        p = np.sqrt(1.0 - ht * ht)
        r = p / (1.0 + ht)
        state = y.reshape(2 * m, n_cols)
        phi, pi = state[:m], state[m:]
        return np.vstack([pi / p, cs0**2 * r * lap(phi)]).ravel()

    # Real and imaginary parts of each complex initial condition are separate
    # columns of one real system.
    y0 = np.zeros((2 * m, n_cols))
    q0 = 1.0 / np.sqrt(2.0 * w)
    for i in range(n_modes):
        y0[:m, 2 * i] = q0[i] * shapes[i]
        y0[m:, 2 * i + 1] = -w[i] * q0[i] * shapes[i]
    sol = solve_ivp(rhs, (0.0, t_end), y0.ravel(), method="DOP853", rtol=rtol, atol=rtol * np.min(q0))
    end = sol.y[:, -1].reshape(2 * m, n_cols)
    field = end[:, 0::2] + 1j * end[:, 1::2]  # (2m, n_modes)
    ht = a_plus * np.sin(omega * t_end)
    phi = field[:m]
    phit = field[m:] / np.sqrt(1.0 - ht * ht)

    def project(f):
        return (dst(f.real, type=1, axis=0) + 1j * dst(f.imag, type=1, axis=0))[:n_modes] / (m + 1)

    q = project(phi).T
    qd = project(phit).T
    s = np.sqrt(0.5 * w)
    alpha = s * (q + 1j * qd / w) * np.exp(1j * w * t_end)
    beta = np.conj(s * (q - 1j * qd / w) * np.exp(-1j * w * t_end))
    return {"q": q, "qdot": qd, "alpha": alpha, "beta": beta, "omega_stencil": w_stencil}


def first_order_beta(a_plus, omega_drive, omega_n, t):
    """|beta| from beta* = int_0^t (-i w h(s) / 2) exp(-2 i w s) ds, by quadrature."""

    def integrand(s, part):
        val = -0.5j * omega_n * a_plus * np.sin(omega_drive * s) * np.exp(-2j * omega_n * s)
        return val.real if part == 0 else val.imag

    limit = max(200, int(40 * t * max(omega_drive, omega_n)))
    re = quad(integrand, 0.0, t, args=(0,), limit=limit, epsabs=1e-14, epsrel=1e-12)[0]
    im = quad(integrand, 0.0, t, args=(1,), limit=limit, epsabs=1e-14, epsrel=1e-12)[0]
    return abs(re + 1j * im)


def monodromy(omega_n, a_plus, omega_drive, rtol=1e-12):
    """One-period transfer matrix of (q, pi = P qdot) for the quasi-1D mode equation."""
    period = 2.0 * np.pi / omega_drive

    def rhs(t, y):
        h = a_plus * np.sin(omega_drive * t)
        p = np.sqrt(1.0 - h * h)
        r = p / (1.0 + h)
        return [y[1] / p, -(omega_n**2) * r * y[0]]

    cols = []
    for y0 in ([1.0, 0.0], [0.0, 1.0]):
        sol = solve_ivp(rhs, (0.0, period), y0, method="DOP853", rtol=rtol, atol=1e-14)
        cols.append(sol.y[:, -1])
    return np.array(cols).T


def floquet_exponent(mono, period):
    """Growth rate mu of the unstable Floquet solution (0 inside a stability band)."""
    half_trace = 0.5 * abs(np.trace(mono))
    return float(np.arccosh(half_trace) / period) if half_trace > 1.0 else 0.0


def conformal_closed_form(omega_n, a_plus, omega_drive, t):
    """q(t), qdot(t) for the 1+1 reduction: free oscillation in T = int dt / sqrt(1+h)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    stretched = np.array(
        [quad(lambda s: 1.0 / np.sqrt(1.0 + a_plus * np.sin(omega_drive * s)), 0.0, ti, limit=400,
              epsabs=1e-13, epsrel=1e-13)[0] for ti in t]
    )
    q = np.exp(-1j * omega_n * stretched) / np.sqrt(2.0 * omega_n)
    qdot = -1j * omega_n * q / np.sqrt(1.0 + a_plus * np.sin(omega_drive * t))
    return q, qdot


def milne_velocity_fd(zeta, c=1.0, chi=1.7, step=1e-6):
    """d(ct, x)/d chi at fixed zeta, by central differences of the explicit chart map."""

    def event(ch):
        return np.array([ch * np.sqrt(1.0 + zeta * zeta), ch * zeta])

    return c * (event(chi + step) - event(chi - step)) / (2.0 * step)


def binary_oracle(m, big_m, r, big_r, c=299792458.0, g=6.67430e-11):
    """Strain amplitude and angular frequency by plain arithmetic."""
    a = 4.0 * g * g * m * big_m / (c**4 * big_r * r)
    om = 2.0 * np.sqrt(g * (m + big_m) / r**3)
    return a, om
