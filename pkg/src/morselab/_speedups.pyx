# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled reduction of batched Hermitian pairs.

For every node the pair (omega, u) of Hermitian matrices is reduced to the
generalized eigenvalues of u relative to the positive definite omega.
Dimensions 1 and 2 use closed forms; larger blocks call LAPACK zhegv.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from scipy.linalg.cython_lapack cimport zhegv

cnp.import_array()


cdef inline double _cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


def reduce_pairs(cnp.ndarray[cnp.complex128_t, ndim=3] omega,
                 cnp.ndarray[cnp.complex128_t, ndim=3] u,
                 double tau0):
    """Return (eigs, counts, density) for batched Hermitian pairs.

    eigs is (N, n) ascending, counts is (N, 3) with columns
    (n_plus, n_minus, n_zero) using the relative threshold tau0,
    density is the product of the generalized eigenvalues.
    """
    cdef Py_ssize_t nnode = omega.shape[0]
    cdef int n = <int>omega.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] eigs = np.empty((nnode, n))
    cdef cnp.ndarray[cnp.int64_t, ndim=2] counts = np.empty((nnode, 3), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] density = np.empty(nnode)

    cdef Py_ssize_t i
    cdef int j, npos, nneg, nzero
    cdef double w11, w22, l11, l22, m11, m22, tr, half, disc, lam0, lam1
    cdef double amax, thresh, prod, lam
    cdef double complex w12, l21, u11, u12, u22, a11, a12, a21, a22, mm12

    # LAPACK workspace for the generic path
    cdef int info = 0, itype = 1, lda = n, lwork = 2 * n + 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] abuf = np.empty((n, n), dtype=np.complex128, order="F")
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] bbuf = np.empty((n, n), dtype=np.complex128, order="F")
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] work = np.empty(lwork, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rwork = np.empty(3 * n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wbuf = np.empty(n, dtype=np.float64)
    cdef int r, c

    for i in range(nnode):
        if n == 1:
            if omega[i, 0, 0].real <= 0.0:
                raise np.linalg.LinAlgError(f"omega not positive definite at node {i}")
            eigs[i, 0] = u[i, 0, 0].real / omega[i, 0, 0].real
        elif n == 2:
            w11 = omega[i, 0, 0].real
            w12 = omega[i, 0, 1]
            w22 = omega[i, 1, 1].real
            u11 = u[i, 0, 0]
            u12 = u[i, 0, 1]
            u22 = u[i, 1, 1]
            if w11 <= 0.0 or w22 * w11 - _cabs2(w12) <= 0.0:
                raise np.linalg.LinAlgError(f"omega not positive definite at node {i}")
            # lower Cholesky of omega, then M = Linv @ U @ Linv^H
            l11 = sqrt(w11)
            l21 = (w12.real - 1j * w12.imag) / l11
            l22 = sqrt(w22 - _cabs2(l21))
            a11 = u11 / l11
            a12 = u12 / l11
            a21 = ((u12.real - 1j * u12.imag) - l21 * a11) / l22
            a22 = (u22 - l21 * a12) / l22
            m11 = (a11 / l11).real
            mm12 = (a12 - a11 * (l21.real - 1j * l21.imag) / l11) / l22
            m22 = ((a22 - a21 * (l21.real - 1j * l21.imag) / l11) / l22).real
            tr = m11 + m22
            half = 0.5 * (m11 - m22)
            disc = sqrt(half * half + _cabs2(mm12))
            lam0 = 0.5 * tr - disc
            lam1 = 0.5 * tr + disc
            eigs[i, 0] = lam0
            eigs[i, 1] = lam1
        else:
            for c in range(n):
                for r in range(n):
                    abuf[r, c] = u[i, r, c]
                    bbuf[r, c] = omega[i, r, c]
            zhegv(&itype, "N", "L", &n, &abuf[0, 0], &lda, &bbuf[0, 0], &lda,
                  &wbuf[0], &work[0], &lwork, &rwork[0], &info)
            if info != 0:
                msg = "omega not positive definite" if info > n else "zhegv failed"
                raise np.linalg.LinAlgError(f"{msg} (info={info}) at node {i}")
            for j in range(n):
                eigs[i, j] = wbuf[j]

        amax = 0.0
        for j in range(n):
            if fabs(eigs[i, j]) > amax:
                amax = fabs(eigs[i, j])
        thresh = tau0 * amax
        npos = 0
        nneg = 0
        nzero = 0
        prod = 1.0
        for j in range(n):
            lam = eigs[i, j]
            prod *= lam
            if amax == 0.0 or fabs(lam) <= thresh:
                nzero += 1
            elif lam > 0.0:
                npos += 1
            else:
                nneg += 1
        counts[i, 0] = npos
        counts[i, 1] = nneg
        counts[i, 2] = nzero
        density[i] = prod

    return eigs, counts, density
