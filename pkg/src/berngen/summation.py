"""Compensated accumulation shared by the scalar and matrix mode sums."""


def kahan_add(acc, comp, term):
    """One compensated-summation step; returns the updated (acc, comp) pair.

    Works elementwise for numpy arrays as well as for plain scalars.
    Reductions that must reproduce digit-for-digit (error tables, CSV
    reports) rely on calling this in a fixed ascending order.
    """
    y = term - comp
    total = acc + y
    comp = (total - acc) - y
    return total, comp
