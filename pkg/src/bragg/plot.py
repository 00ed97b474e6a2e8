"""Static SVG stick plot of a spectrum CSV (no plotting library needed)."""
from __future__ import annotations

import csv
import html
import io
from dataclasses import dataclass

from .errors import DomainError

WIDTH, HEIGHT, MARGIN = 800, 400, 50


@dataclass(frozen=True)
class Stick:
    k: float
    height: float
    label: str


def read_spectrum_csv(text: str) -> list[Stick]:
    rows = [line for line in text.splitlines() if line and not line.startswith("#")]
    if not rows:
        raise DomainError("spectrum file has no rows")
    reader = csv.DictReader(rows)
    need = {"k_float", "class", "I_inf"}
    if not reader.fieldnames or not need <= set(reader.fieldnames):
        raise DomainError("spectrum file lacks k_float/class/I_inf columns")
    last_col = [f for f in reader.fieldnames if f.startswith("I_n")]
    out = []
    for r in reader:
        label = r["class"]
        if label == "bragg":
            h = float(r["I_inf"])
        else:
            h = float(r[last_col[-1]]) if last_col else 0.0
        out.append(Stick(float(r["k_float"]), h, label))
    return out


def _gaps(sticks: list[Stick]) -> tuple[float, float] | None:
    ks = sorted(s.k for s in sticks if s.label == "bragg")
    if len(ks) < 2:
        return None
    return max(zip(ks, ks[1:]), key=lambda p: p[1] - p[0])


def render_svg(sticks: list[Stick], title: str = "", header: str = "") -> str:
    """Bragg peaks in black, other candidates grey; the widest gap between
    Bragg peaks is marked in red under the axis."""
    if not sticks:
        raise DomainError("nothing to plot")
    lo = min(s.k for s in sticks)
    hi = max(s.k for s in sticks)
    if hi == lo:
        lo, hi = lo - 1, hi + 1
    top = max((s.height for s in sticks), default=1.0) or 1.0
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
    base = HEIGHT - MARGIN

    def px(k):
        return MARGIN + (k - lo) / (hi - lo) * pw

    def py(v):
        return base - v / top * ph

    out = io.StringIO()
    if header:
        out.write(f"<!-- {html.escape(header)} -->\n")
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
              f'viewBox="0 0 {WIDTH} {HEIGHT}">\n')
    out.write(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n')
    out.write(f'<line x1="{MARGIN}" y1="{base}" x2="{WIDTH - MARGIN}" y2="{base}" stroke="black"/>\n')
    out.write(f'<line x1="{MARGIN}" y1="{base}" x2="{MARGIN}" y2="{MARGIN}" stroke="black"/>\n')
    for s in sorted(sticks, key=lambda s: (s.label == "bragg", s.k)):
        colour = "black" if s.label == "bragg" else "#bbbbbb"
        out.write(f'<line x1="{px(s.k):.3f}" y1="{base}" x2="{px(s.k):.3f}" y2="{py(max(s.height, 0.0)):.3f}" '
                  f'stroke="{colour}" stroke-width="1.5"/>\n')
    gap = _gaps(sticks)
    if gap is not None:
        out.write(f'<line x1="{px(gap[0]):.3f}" y1="{base + 12}" x2="{px(gap[1]):.3f}" y2="{base + 12}" '
                  f'stroke="red" stroke-width="3"/>\n')
    for k in (lo, hi):
        out.write(f'<text x="{px(k):.3f}" y="{base + 30}" font-size="12" text-anchor="middle">{k:.4g}</text>\n')
    out.write(f'<text x="{MARGIN - 5}" y="{MARGIN}" font-size="12" text-anchor="end">{top:.4g}</text>\n')
    if title:
        out.write(f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" font-size="14" text-anchor="middle">{html.escape(title)}</text>\n')
    out.write("</svg>\n")
    return out.getvalue()
