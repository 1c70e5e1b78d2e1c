"""Independent reference computations used to freeze expected values."""
import mpmath as mp
import numpy as np

mp.mp.dps = 40

SIGMA = (np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1]))


def charpoly_eigenvalues(m):
    """Eigenvalues via Faddeev-LeVerrier coefficients and polynomial root finding."""
    a = mp.matrix([[mp.mpc(complex(v)) for v in row] for row in np.asarray(m)])
    n = a.rows
    coeffs = [mp.mpf(1)]
    mk = mp.zeros(n, n)
    c = mp.mpf(1)
    for k in range(1, n + 1):
        mk = a * mk + c * mp.eye(n)
        c = -sum((a * mk)[i, i] for i in range(n)) / k
        coeffs.append(c)
    roots = mp.polyroots(coeffs, maxsteps=200, extraprec=200)
    return np.sort(np.array([float(mp.re(r)) for r in roots]))


def kraus_apply(probs, rho):
    return sum(p * s @ rho @ s for p, s in zip(probs, SIGMA))


def choi_direct(channel):
    """(id x L)|b00><b00| built from the action on matrix units."""
    w = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2))
            e[i, j] = 1
            w += 0.5 * np.kron(e, channel(e))
    return w


def bell_projector():
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return np.outer(v, v)


def mm_total_min_eig(s, t):
    m = (1 + mp.e ** (-t)) / (1 + mp.e ** (-s))
    u = mp.e ** (-(t - s))
    return float((1 - 2 * m + u) / 4)


def replica_probs(t):
    t = mp.mpf(t)
    return float(1.5 * ((1 + mp.e ** (-t)) / 2 - mp.cos(t) ** 2 / 3)), float(mp.cos(t) ** 2)


def design(t):
    t = mp.mpf(t)
    sig = lambda x: 1 / (1 + mp.e ** (-x))
    a = 0.5 * sig(4 * (t - 2)) + 0.48 * sig(4.5 * (t - 6))
    b = 0.49 * mp.e ** (-(t - 4) ** 6)
    return float(a), float(b)


HADAMARD = [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]]


def _mp_probs(name, t):
    p = lambda t: (1 + mp.e ** (-t)) / 2
    p1 = lambda t: 1.5 * ((1 + mp.e ** (-t)) / 2 - mp.cos(t) ** 2 / 3)
    p2 = lambda t: mp.cos(t) ** 2
    sig = lambda x: 1 / (1 + mp.e ** (-x))
    a = lambda t: 0.5 * sig(4 * (t - 2)) + 0.48 * sig(mp.mpf(4.5) * (t - 6))
    b = lambda t: mp.mpf(0.49) * mp.e ** (-(t - 4) ** 6)
    dep = lambda x: [1 - 3 * x / 4, x / 4, x / 4, x / 4]
    return {
        "markov_x": lambda: [p(t), 1 - p(t), 0, 0],
        "markov_y": lambda: [p(t), 0, 1 - p(t), 0],
        "mixed_mm": lambda: [p(t), (1 - p(t)) / 2, (1 - p(t)) / 2, 0],
        "nm_x1": lambda: [p1(t), 1 - p1(t), 0, 0],
        "nm_x2": lambda: [p2(t), 1 - p2(t), 0, 0],
        "mixed_nm_replica": lambda: [(2 * p1(t) + p2(t)) / 3, 1 - (2 * p1(t) + p2(t)) / 3, 0, 0],
        "depol_q": lambda: dep(a(t) + b(t)),
        "depol_r": lambda: dep(a(t) - b(t)),
        "depol_mixed": lambda: dep(a(t)),
    }[name]()


def mp_probs(name, t):
    return [float(v) for v in _mp_probs(name, mp.mpf(t))]


def mp_decay_rates(name, t):
    """Rates from log-derivatives of the Pauli eigenvalues at 40 digits."""
    def lam(beta, x):
        probs = _mp_probs(name, x)
        return sum(HADAMARD[beta][a] * probs[a] for a in range(4))
    dlog = [mp.diff(lambda x: mp.log(abs(lam(b, x))), mp.mpf(t)) for b in range(4)]
    return [float(sum(HADAMARD[k][b] * dlog[b] for b in range(4)) / 4) for k in (1, 2, 3)]
