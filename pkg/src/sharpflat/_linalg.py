"""Linear algebra over Z/p^K with valuation pivoting.

Row operations plus column swaps bring the matrix to upper-triangular form
where every pivot has minimal valuation in its trailing submatrix.  Then all
multipliers are integral and the pivot valuations are the elementary
divisor exponents.
"""

from dataclasses import dataclass

import numpy as np

from ._kernel import vp, zeros


@dataclass
class Echelon:
    p: int
    K: int
    ncols: int
    M: np.ndarray          # reduced augmented matrix
    colperm: list
    pivots: list           # pivot valuations, one per rank step

    @property
    def rank(self):
        return len(self.pivots)

    def rhs(self, c):
        return self.M[:, self.ncols + c]

    def integral_obstruction(self, c, prec=None):
        """Smallest valuation defect blocking an integral solution for rhs column c.

        Returns a list of (row, required exponent, actual valuation or None).
        Only rows whose requirement fails are reported.
        """
        prec = self.K if prec is None else prec
        p = self.p
        col = self.rhs(c)
        bad = []
        for t, x in enumerate(col):
            need = self.pivots[t] if t < self.rank else prec
            need = min(need, prec)
            x = int(x) % p ** prec
            if x % p ** need:
                bad.append((t, need, vp(x, p) if x else None))
        return bad

    def back_substitute(self, c):
        """Particular solution with free variables zero.

        Returns (Y, E): the solution is Y / p^E, known modulo p^(K - E).
        """
        p, K = self.p, self.K
        r = self.rank
        E = max(self.pivots) if self.pivots else 0
        mod = p ** K
        col = self.rhs(c)
        Y = [0] * self.ncols
        for t in range(r - 1, -1, -1):
            acc = p ** E * int(col[t])
            for j in range(t + 1, r):
                if Y[j]:
                    acc -= int(self.M[t, j]) * Y[j]
            e = self.pivots[t]
            if acc % p ** e:
                raise ArithmeticError("non-integral multiplier in back substitution")
            Y[t] = (acc // p ** e) % mod
        out = [0] * self.ncols
        for t in range(self.ncols):
            out[self.colperm[t]] = Y[t]
        return out, E


def echelon(A, B, p, K):
    """Reduce [A | B] modulo p^K; A is m x n, B is m x k (object arrays)."""
    A = np.asarray(A, dtype=object)
    B = np.asarray(B, dtype=object)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    m, n = A.shape
    mod = p ** K
    M = zeros((m, n + B.shape[1]))
    M[:, :n] = A
    M[:, n:] = B
    M = M % mod
    colperm = list(range(n))
    pivots = []
    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            row = M[i]
            for j in range(t, n):
                x = row[j]
                if x:
                    v = vp(int(x), p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        e, i, j = best
        if i != t:
            M[[t, i]] = M[[i, t]]
        if j != t:
            M[:, [t, j]] = M[:, [j, t]]
            colperm[t], colperm[j] = colperm[j], colperm[t]
        pe = p ** e
        u = int(M[t, t]) // pe
        M[t] = (M[t] * pow(u, -1, mod)) % mod
        for i in range(t + 1, m):
            x = int(M[i, t])
            if x:
                M[i] = (M[i] - (x // pe) * M[t]) % mod
        pivots.append(e)
    return Echelon(p, K, n, M, colperm, pivots)
