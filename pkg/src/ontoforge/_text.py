"""Small text helpers shared across phases."""
import re

TOKEN_RE = re.compile(r"[^\W_]+(?:['’-][^\W_]+)*")
DETERMINERS = frozenset({"the", "a", "an"})

# (suffix, replacement, minimum word length) checked in order
_PLURAL_RULES = (
    ("yses", "ysis", 5),
    ("sses", "ss", 5),
    ("ies", "y", 5),
    ("xes", "x", 4),
    ("ches", "ch", 5),
    ("shes", "sh", 5),
)
_INVARIANT_ENDINGS = ("ss", "us", "is", "ous")


def singularize(word):
    """Map a plural noun to its singular form with suffix rules.

    Irregular plurals are left alone.
    """
    w = word.lower()
    for suffix, repl, min_len in _PLURAL_RULES:
        if w.endswith(suffix) and len(w) >= min_len:
            return w[: -len(suffix)] + repl
    if w.endswith(_INVARIANT_ENDINGS) or len(w) <= 3:
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def normalize_label(text):
    """Lowercase, collapse whitespace and singularize the final word."""
    words = text.lower().split()
    if not words:
        return ""
    words[-1] = singularize(words[-1])
    return " ".join(words)
