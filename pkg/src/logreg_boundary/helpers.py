import re
from typing import cast
from typing import TypeVar

import numpy as np
import numpy.typing as npt

T = TypeVar('T')


def round_float_only(val: T, sig_fig: int = 1) -> T:
    """
    Rounds finite floats to sig_fig significant digits; anything else passes through.

    Args:
        val: Number to round.
        sig_fig: Number of significant digits.

    Returns:
        Rounded number.
    """
    if isinstance(val, float) and np.isfinite(val):
        return cast(T, float(f'{val:.{sig_fig - 1}e}'))
    return val


def indentate(text: str) -> str:
    """
    Indentate given text by 1 tab.

    Args:
        text: Multiline text.

    Returns:
        Indented text.
    """
    return re.sub(r'^', '\t', text, flags=re.M)


def replace_batch(text: str, rep_tab: list[tuple[str, str]]) -> str:
    for old, new in rep_tab:
        text = text.replace(old, new)
    return text


def bool_to_sign(bool_val: bool | int | npt.NDArray) -> int | npt.NDArray:
    """
    Turns bool value into sign. Works element-wise on arrays of responses.

    Args:
        bool_val: Can be True, False, 0 or 1 (or an array of those).

    Returns:
        1 if bool_val = True, else -1
    """
    return bool_val * 2 - 1


def format_attrs(obj: object, attrs_to_print: list[tuple[str, str]], str_to_replace: list[tuple[str, str]],
                 sig_fig: int = 6) -> str:
    """
    Renders a two-column table of object attributes.

    Args:
        obj: Object holding the attributes.
        attrs_to_print: Pairs of attribute name and unit.
        str_to_replace: Replacements applied to the attribute names.
        sig_fig: Number of significant digits for floats.

    Returns:
        Multiline text.
    """
    lines = []
    for attr, unit in attrs_to_print:
        val = getattr(obj, attr)
        if isinstance(val, np.ndarray):
            val_str = np.array2string(val, precision=sig_fig, separator=', ')
        else:
            val_str = str(round_float_only(val, sig_fig))
        lines.append(f'{replace_batch(attr, str_to_replace).ljust(24)}{val_str.rjust(16)} {unit}'.rstrip())
    return '\n'.join(lines)
