import math

# Largest float strictly below 1.0; confidences are clamped here.
MAX_CONFIDENCE = math.nextafter(1.0, 0.0)


def constrain(x, min_val, max_val):
    """
    Constrains a number between a minimum and maximum value.
    """
    return max(min_val, min(x, max_val))


def in_range(x, low, high, *, low_open=False, high_open=False):
    """
    Checks that a number lies in an interval.

    :param low_open: exclude ``low`` from the interval
    :param high_open: exclude ``high`` from the interval
    """
    if math.isnan(x):
        return False
    above = x > low if low_open else x >= low
    below = x < high if high_open else x <= high
    return above and below


def parse_int_list(text):
    """
    Parses a comma separated list of integers, e.g. ``"4,6,8"``.

    Blank items are ignored, so ``""`` gives an empty list.
    """
    values = []
    for item in str(text).split(","):
        item = item.strip()
        if item:
            values.append(int(item))
    return values


def format_int_list(values):
    return ",".join(str(v) for v in values)
