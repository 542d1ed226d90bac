"""Plain-text emitters shared by the CSV/JSON writers."""

import math


def fmt_real(x) -> str:
    """17 significant digits, enough to round-trip a float64."""
    return format(float(x), ".17g")


def fmt_bool(flag) -> str:
    return "true" if flag else "false"


def json_real(x):
    # json has no NaN/inf; emit them as strings so files stay valid JSON
    x = float(x)
    if math.isfinite(x):
        return float(fmt_real(x))
    return str(x)


def write_csv(path_or_file, header, rows, comment=None):
    """Write rows of pre-formatted strings with ``\\n`` line endings."""
    lines = []
    if comment is not None:
        lines.append(f"# {comment}")
    lines.append(",".join(header))
    lines.extend(",".join(r) for r in rows)
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", newline="\n") as fh:
            fh.write(text)
