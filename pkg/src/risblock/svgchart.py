"""Dependency-free SVG line charts.

Emits a complete standalone SVG document as a string: axes, tick labels, one
polyline per series, and a legend. Used for the accuracy-vs-iteration chart;
generic enough for any small set of numeric series.
"""

SERIES_COLORS = ("#4363d8", "#e6194b", "#3cb44b", "#f58231",
                 "#911eb4", "#46f0f0")

WIDTH, HEIGHT = 800, 480
MARGIN_LEFT, MARGIN_RIGHT = 70, 170
MARGIN_TOP, MARGIN_BOTTOM = 48, 56
N_TICKS = 5


def _nice_range(lo, hi):
    if lo == hi:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def _fmt(value):
    text = f"{value:.4g}"
    return text


def render_line_chart(series, title="", x_label="", y_label=""):
    """SVG document for named series: {name: [(x, y), ...]} in draw order."""
    if not series or all(len(points) == 0 for points in series.values()):
        raise ValueError("series must contain at least one point")
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x0, x1 = _nice_range(min(xs), max(xs))
    y0, y1 = _nice_range(min(ys), max(ys))

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x):
        return MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w

    def sy(y):
        return MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2:.1f}" y="26" text-anchor="middle" '
            f'font-family="sans-serif" font-size="17">{title}</text>')

    # gridlines + ticks
    for i in range(N_TICKS + 1):
        fx = x0 + (x1 - x0) * i / N_TICKS
        fy = y0 + (y1 - y0) * i / N_TICKS
        px, py = sx(fx), sy(fy)
        parts.append(
            f'<line x1="{px:.1f}" y1="{MARGIN_TOP}" x2="{px:.1f}" '
            f'y2="{MARGIN_TOP + plot_h}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(
            f'<line x1="{MARGIN_LEFT}" y1="{py:.1f}" '
            f'x2="{MARGIN_LEFT + plot_w}" y2="{py:.1f}" '
            f'stroke="#dddddd" stroke-width="1"/>')
        parts.append(
            f'<text x="{px:.1f}" y="{MARGIN_TOP + plot_h + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12">'
            f'{_fmt(fx)}</text>')
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{py + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">{_fmt(fy)}</text>')

    # frame
    parts.append(
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="#333333" stroke-width="1"/>')

    if x_label:
        parts.append(
            f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 14}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="13">'
            f'{x_label}</text>')
    if y_label:
        cy = MARGIN_TOP + plot_h / 2
        parts.append(
            f'<text x="20" y="{cy:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 20 {cy:.1f})">{y_label}</text>')

    # series + legend
    for k, (name, points) in enumerate(series.items()):
        color = SERIES_COLORS[k % len(SERIES_COLORS)]
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.8"/>')
        ly = MARGIN_TOP + 16 + 22 * k
        lx = MARGIN_LEFT + plot_w + 14
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 26}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="3"/>')
        parts.append(
            f'<text x="{lx + 32}" y="{ly}" font-family="sans-serif" '
            f'font-size="13">{name}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
