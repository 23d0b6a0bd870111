from enum import Enum
from typing import Dict


class ForeColor(Enum):
    default = 0
    red = 31
    green = 32
    yellow = 33
    blue = 34
    purple = 35
    cyan = 36


class TextMode(Enum):
    normal = 0
    bold = 1
    underline = 4
    invert = 7


STYLE = {
    "header1": {"mode": TextMode.invert, "fore": ForeColor.cyan, "width": 60},
    "header2": {"mode": TextMode.underline, "fore": ForeColor.purple, "width": -1},
    "key": {"mode": TextMode.normal, "fore": ForeColor.blue, "width": 14},
    "value": {"mode": TextMode.normal, "fore": ForeColor.default, "width": 18},
    "pass": {"mode": TextMode.bold, "fore": ForeColor.green, "width": 6},
    "fail": {"mode": TextMode.bold, "fore": ForeColor.red, "width": 6},
}


def get_formatted(text: str, mode: TextMode = TextMode.normal, fore: ForeColor = ForeColor.default, width=-1) -> str:
    """
    wrap text in ansi escape codes, padded to width when width > 0
    """
    codes = [str(c.value) for c in (mode, fore) if c.value != 0]
    if width > 0:
        text = f"{text:<{width}}"
    if not codes:
        return text
    return f"\033[{';'.join(codes)}m{text}\033[0m"


def get_formatted_predefined(text: str, style: dict) -> str:
    return get_formatted(text, style["mode"], style["fore"], style["width"])


def get_formatted_from_dict(values: Dict[str, str]) -> str:
    return "".join(f"{get_formatted_predefined(k, STYLE['key'])}:{get_formatted_predefined(str(v), STYLE['value'])}"
                   for k, v in values.items())


def get_formatted_verdict(passed: bool) -> str:
    return get_formatted_predefined("PASS", STYLE["pass"]) if passed else get_formatted_predefined("FAIL", STYLE["fail"])
