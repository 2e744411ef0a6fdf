"""Canonical affect labels and their integer codes.

Codes follow alphabetical label order, which is also the order used by the
dataset preparation output: boredom=0, confusion=1, engagement=2,
frustration=3.
"""

from .errors import InvalidLabel

EMOTION_LABELS = ("boredom", "confusion", "engagement", "frustration")
N_CLASSES = len(EMOTION_LABELS)

CODE_BY_LABEL = {label: code for code, label in enumerate(EMOTION_LABELS)}


def code_for_label(label: str) -> int:
    try:
        return CODE_BY_LABEL[label]
    except KeyError:
        raise InvalidLabel(f"unknown emotion label: {label!r}") from None


def label_for_code(code: int) -> str:
    if not 0 <= int(code) < N_CLASSES:
        raise InvalidLabel(f"emotion code out of range: {code!r}")
    return EMOTION_LABELS[int(code)]
