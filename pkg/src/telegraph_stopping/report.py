"""JSON / CSV emission with an explicit token for infinity."""

from __future__ import annotations

import io
import json
import math

INF_TOKEN = "inf"


def _encode(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return INF_TOKEN if obj > 0 else "-" + INF_TOKEN
        return obj
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    return obj


def to_json(obj) -> str:
    # float repr is the shortest string that round-trips exactly
    return json.dumps(_encode(obj), indent=2, allow_nan=False) + "\n"


def decode_number(value):
    """Inverse of the infinity encoding for a single scalar."""
    if value == INF_TOKEN:
        return math.inf
    if value == "-" + INF_TOKEN:
        return -math.inf
    return value


def fmt(value) -> str:
    """CSV cell: 17 significant digits for floats, ``inf`` for infinity."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isinf(value):
            return INF_TOKEN if value > 0 else "-" + INF_TOKEN
        return format(value, ".17g")
    return str(value)


def to_csv(header: list[str], rows, comments=()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def flatten(obj, prefix: str = "") -> list[tuple[str, object]]:
    """Nested dict -> ``[(dotted.key, scalar)]`` for key/value CSV output."""
    out = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            out += flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            out += flatten(v, f"{prefix}{i}.")
    else:
        out.append((prefix[:-1], obj))
    return out
