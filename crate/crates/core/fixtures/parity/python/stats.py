"""Small numeric helpers."""


def clamp(value, low, high):
    if value < low:
        return low
    if value > high:
        return high
    return value


def sign(x):
    if x > 0:
        return 1
    elif x < 0:
        return -1
    return 0


def sum_positive(values, n):
    total = 0
    for i in range(n):
        if values[i] > 0:
            total += values[i]
    return total


def count_in_range(values, n, low, high):
    count = 0
    for i in range(n):
        v = values[i]
        if v >= low and v <= high:
            count += 1
    return count


def weight_in_range(values, n, low, high):
    count = 0
    for i in range(n):
        v = values[i]
        if v >= low and v <= high:
            count += v
    return count
