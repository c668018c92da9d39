"""Pure-Python temporal kernels over 0/1 truth vectors along a path.

Every function takes the truth vector of its operand(s), one byte per path
position, and returns the truth vector of the operator.  Finite-path
semantics: nothing exists beyond the last position.
"""


def next_forward(v):
    n = len(v)
    out = bytearray(n)
    out[: n - 1] = v[1:]
    return out


def next_backward(v):
    n = len(v)
    out = bytearray(n)
    out[1:] = v[: n - 1]
    return out


def finally_forward(v):
    # strict: some i > k
    n = len(v)
    out = bytearray(n)
    seen = 0
    for k in range(n - 1, -1, -1):
        out[k] = seen
        if v[k]:
            seen = 1
    return out


def finally_backward(v):
    # strict: some i < k
    n = len(v)
    out = bytearray(n)
    seen = 0
    for k in range(n):
        out[k] = seen
        if v[k]:
            seen = 1
    return out


def globally_forward(v):
    # reflexive: all i >= k
    n = len(v)
    out = bytearray(n)
    acc = 1
    for k in range(n - 1, -1, -1):
        acc = acc and v[k]
        out[k] = 1 if acc else 0
    return out


def globally_backward(v):
    # reflexive: all i <= k
    n = len(v)
    out = bytearray(n)
    acc = 1
    for k in range(n):
        acc = acc and v[k]
        out[k] = 1 if acc else 0
    return out


def until_forward(left, right):
    # witness i > k, left on [k, i)
    n = len(left)
    out = bytearray(n)
    for k in range(n - 2, -1, -1):
        if left[k] and (right[k + 1] or out[k + 1]):
            out[k] = 1
    return out


def until_backward(left, right):
    # witness i < k, left on (i, k]
    n = len(left)
    out = bytearray(n)
    for k in range(1, n):
        if left[k] and (right[k - 1] or out[k - 1]):
            out[k] = 1
    return out


def count_range(v, i, j):
    total = 0
    for k in range(i, j + 1):
        if v[k]:
            total += 1
    return total
