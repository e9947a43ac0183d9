"""Formatting helpers."""


def render_rows(rows, width=10, sep=" | "):
    out = []
    for row in rows:
        cells = [str(c).ljust(width) for c in row]
        out.append(sep.join(cells))
    return "\n".join(out)


class Table:
    def __init__(self, rows):
        self.rows = rows

    def render(self):
        if not self.rows:
            return ""
        return render_rows(self.rows)
