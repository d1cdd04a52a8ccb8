"""Independent order oracle: truncated power series in the step size.

One Runge-Kutta step on a random polynomial vector field is expanded as a
series in h (stages by fixed-point sweeps, each sweep gaining one order) and
compared against the exact-flow series (Picard iteration).  The per-order
mismatch must equal the weighted sum of the order-condition residuals over
the hand-enumerated elementary differentials, which checks the generated
condition set against textbook Butcher theory without sharing any code with
it.
"""

import numpy as np


class Series:
    """Vector-valued truncated power series in h: coeffs[k] is the h^k term."""

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=float)

    @classmethod
    def constant(cls, u0, order):
        c = np.zeros((order + 1, len(u0)))
        c[0] = u0
        return cls(c)

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    def __add__(self, other):
        return Series(self.coeffs + other.coeffs)

    def scale(self, a):
        return Series(a * self.coeffs)

    def shift(self):
        """Multiply by h (truncating the top coefficient)."""
        c = np.zeros_like(self.coeffs)
        c[1:] = self.coeffs[:-1]
        return Series(c)

    def integrate(self):
        """Antiderivative in h with zero constant term."""
        c = np.zeros_like(self.coeffs)
        ks = np.arange(1, self.coeffs.shape[0])
        c[1:] = self.coeffs[:-1] / ks[:, None]
        return Series(c)


def _conv(a, b):
    n = a.shape[0]
    out = np.zeros(n)
    for k in range(n):
        out[k] = np.dot(a[:k + 1], b[k::-1])
    return out


class PolyField:
    """Cubic polynomial vector field with symmetric coefficient tensors."""

    def __init__(self, rng, n=2):
        self.n = n
        self.a = rng.uniform(-1.0, 1.0, size=n)
        self.B = rng.uniform(-1.0, 1.0, size=(n, n))
        C = rng.uniform(-0.5, 0.5, size=(n, n, n))
        self.C = 0.5 * (C + C.transpose(0, 2, 1))
        D = rng.uniform(-0.25, 0.25, size=(n, n, n, n))
        self.D = (D + D.transpose(0, 1, 3, 2) + D.transpose(0, 2, 1, 3)
                  + D.transpose(0, 2, 3, 1) + D.transpose(0, 3, 1, 2)
                  + D.transpose(0, 3, 2, 1)) / 6.0

    def __call__(self, u):
        return (self.a + self.B @ u + np.einsum("mij,i,j->m", self.C, u, u)
                + np.einsum("mijk,i,j,k->m", self.D, u, u, u))

    def d1(self, u, v):
        return (self.B @ v + 2.0 * np.einsum("mij,i,j->m", self.C, u, v)
                + 3.0 * np.einsum("mijk,i,j,k->m", self.D, u, u, v))

    def d2(self, u, v, w):
        return (2.0 * np.einsum("mij,i,j->m", self.C, v, w)
                + 6.0 * np.einsum("mijk,i,j,k->m", self.D, u, v, w))

    def d3(self, v, w, x):
        return 6.0 * np.einsum("mijk,i,j,k->m", self.D, v, w, x)

    def apply(self, U):
        """Compose the field with a series argument."""
        K = U.order
        n = self.n
        out = np.zeros((K + 1, n))
        out[0] += self.a
        comps = [U.coeffs[:, i] for i in range(n)]
        for m in range(n):
            for i in range(n):
                if self.B[m, i]:
                    out[:, m] += self.B[m, i] * comps[i]
            for i in range(n):
                for j in range(n):
                    if self.C[m, i, j]:
                        out[:, m] += self.C[m, i, j] * _conv(comps[i],
                                                             comps[j])
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        if self.D[m, i, j, k]:
                            out[:, m] += self.D[m, i, j, k] * _conv(
                                _conv(comps[i], comps[j]), comps[k])
        return Series(out)


def rk_step_series(A, b, field, u0, order=4):
    """Series of one step with step size h as the expansion variable."""
    s = len(b)
    base = Series.constant(u0, order)
    stages = [base for _ in range(s)]
    for _ in range(order + 2):
        fs = [field.apply(Y) for Y in stages]
        stages = [base for _ in range(s)]
        for i in range(s):
            for j in range(s):
                if A[i, j]:
                    stages[i] = stages[i] + fs[j].shift().scale(A[i, j])
    fs = [field.apply(Y) for Y in stages]
    out = base
    for j in range(s):
        if b[j]:
            out = out + fs[j].shift().scale(b[j])
    return out


def exact_flow_series(field, u0, order=4):
    U = Series.constant(u0, order)
    for _ in range(order + 2):
        U = Series.constant(u0, order) + field.apply(U).integrate()
    return U


def elementary_differentials(field, u0):
    """Hand-coded (F(t), sigma(t)) keyed by the condition id, orders <= 4."""
    f = field(u0)
    fp = lambda v: field.d1(u0, v)
    fpp = lambda v, w: field.d2(u0, v, w)
    fppp = field.d3
    return {
        "b'*e": (f, 1),
        "b'*c": (fp(f), 1),
        "b'*c*c": (fpp(f, f), 2),
        "b'*A(c)": (fp(fp(f)), 1),
        "b'*c*c*c": (fppp(f, f, f), 6),
        "b'*c*A(c)": (fpp(fp(f), f), 1),
        "b'*A(c*c)": (fp(fpp(f, f)), 2),
        "b'*A(A(c))": (fp(fp(fp(f))), 1),
    }
