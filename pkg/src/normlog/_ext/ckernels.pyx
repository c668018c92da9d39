# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twins of :mod:`normlog._kernels_py`; same contracts."""


def next_forward(const unsigned char[:] v):
    cdef Py_ssize_t n = v.shape[0]
    out = bytearray(n)
    cdef unsigned char[:] o = out
    if n > 1:
        o[:n - 1] = v[1:]
    return out


def next_backward(const unsigned char[:] v):
    cdef Py_ssize_t n = v.shape[0]
    out = bytearray(n)
    cdef unsigned char[:] o = out
    if n > 1:
        o[1:] = v[:n - 1]
    return out


def finally_forward(const unsigned char[:] v):
    cdef Py_ssize_t n = v.shape[0], k
    cdef unsigned char seen = 0
    out = bytearray(n)
    cdef unsigned char[:] o = out
    for k in range(n - 1, -1, -1):
        o[k] = seen
        if v[k]:
            seen = 1
    return out


def finally_backward(const unsigned char[:] v):
    cdef Py_ssize_t n = v.shape[0], k
    cdef unsigned char seen = 0
    out = bytearray(n)
    cdef unsigned char[:] o = out
    for k in range(n):
        o[k] = seen
        if v[k]:
            seen = 1
    return out


def globally_forward(const unsigned char[:] v):
    cdef Py_ssize_t n = v.shape[0], k
    cdef unsigned char acc = 1
    out = bytearray(n)
    cdef unsigned char[:] o = out
    for k in range(n - 1, -1, -1):
        if not v[k]:
            acc = 0
        o[k] = acc
    return out


def globally_backward(const unsigned char[:] v):
    cdef Py_ssize_t n = v.shape[0], k
    cdef unsigned char acc = 1
    out = bytearray(n)
    cdef unsigned char[:] o = out
    for k in range(n):
        if not v[k]:
            acc = 0
        o[k] = acc
    return out


def until_forward(const unsigned char[:] left, const unsigned char[:] right):
    cdef Py_ssize_t n = left.shape[0], k
    out = bytearray(n)
    cdef unsigned char[:] o = out
    for k in range(n - 2, -1, -1):
        if left[k] and (right[k + 1] or o[k + 1]):
            o[k] = 1
    return out


def until_backward(const unsigned char[:] left, const unsigned char[:] right):
    cdef Py_ssize_t n = left.shape[0], k
    out = bytearray(n)
    cdef unsigned char[:] o = out
    for k in range(1, n):
        if left[k] and (right[k - 1] or o[k - 1]):
            o[k] = 1
    return out


def count_range(const unsigned char[:] v, Py_ssize_t i, Py_ssize_t j):
    cdef Py_ssize_t k, total = 0
    for k in range(i, j + 1):
        if v[k]:
            total += 1
    return total
