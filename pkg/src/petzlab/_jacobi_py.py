"""Pure-Python cyclic Jacobi eigensolver for complex Hermitian matrices.

Fallback for :mod:`petzlab._jacobi` when the compiled extension is missing.
Both implementations use the same sweep order and rotation formulas.
"""

import math

import numpy as np


def jacobi_eigh(a, tol=1e-15, max_sweeps=100):
    """Diagonalize a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(w, v, sweeps, off)`` with unsorted eigenvalues ``w``, the
    unitary ``v`` holding eigenvectors as columns, the number of sweeps
    performed and the final off-diagonal Frobenius norm.  ``sweeps`` equals
    ``max_sweeps + 1`` when the iteration did not converge.
    """
    a = np.array(a, dtype=np.complex128, order="C")
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = math.sqrt(float(np.sum(np.abs(a) ** 2)))
    threshold = tol * scale
    off = _off_norm(a)
    if off <= threshold or n < 2:
        return a.diagonal().real.copy(), v, 0, off
    for sweep in range(1, max_sweeps + 1):
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                # rotations below the rounding floor of the diagonal are skipped
                if r < 1e-300 or (
                    abs(a[p, p].real) + 1e3 * r == abs(a[p, p].real)
                    and abs(a[q, q].real) + 1e3 * r == abs(a[q, q].real)
                    and sweep > 3
                ):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                phase = apq / r
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                pc = phase.conjugate()
                # columns: A <- A J, J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = c * colp - s * pc * colq
                a[:, q] = s * colp + c * pc * colq
                # rows: A <- J^H A
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = c * rowp - s * phase * rowq
                a[q, :] = s * rowp + c * phase * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * pc * vq
                v[:, q] = s * vp + c * pc * vq
        off = _off_norm(a)
        if off <= threshold:
            return a.diagonal().real.copy(), v, sweep, off
    return a.diagonal().real.copy(), v, max_sweeps + 1, off


def _off_norm(a):
    d = np.abs(np.triu(a, 1)) ** 2
    return math.sqrt(2.0 * float(d.sum()))
