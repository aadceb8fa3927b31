"""Minimal deterministic SVG output: learning curves and confusion heat tables."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .experiments import CallTypeConfusion, ComparisonPoint

PALETTE = ("#1f4e9c", "#c2410c", "#15803d", "#7e22ce")
DASHES = ("", "6,4", "2,3", "8,3,2,3")


def _f(x: float) -> str:
    return f"{x:.2f}"


def comparison_chart(points: list[ComparisonPoint], title: str = "Accuracy vs training points",
                     width: int = 640, height: int = 420) -> str:
    """Mean accuracy per feature space with a shaded 95% interval band."""
    ml, mr, mt, mb = 60, 140, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    spaces = list(dict.fromkeys(p.feature_space for p in points))
    xs = sorted({p.n_train for p in points})
    x_lo, x_hi = (min(xs), max(xs)) if xs else (0, 1)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    y_lo = min([p.ci95_low for p in points] + [1.0])
    y_lo = max(0.0, (int(y_lo * 10) / 10.0))
    y_hi = 1.0

    def sx(v):
        return ml + (v - x_lo) / (x_hi - x_lo) * pw

    def sy(v):
        return mt + (1 - (v - y_lo) / (y_hi - y_lo)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
           f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>']
    for v in xs:
        out.append(f'<line x1="{_f(sx(v))}" y1="{mt + ph}" x2="{_f(sx(v))}" y2="{mt + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_f(sx(v))}" y="{mt + ph + 18}" text-anchor="middle">{v}</text>')
    steps = int(round((y_hi - y_lo) / 0.1))
    for i in range(steps + 1):
        v = y_lo + i * 0.1
        out.append(f'<line x1="{ml - 4}" y1="{_f(sy(v))}" x2="{ml}" y2="{_f(sy(v))}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{_f(sy(v) + 4)}" text-anchor="end">{v:.1f}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">training points</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2:.1f})">mean accuracy</text>')
    for si, space in enumerate(spaces):
        pts = sorted((p for p in points if p.feature_space == space), key=lambda p: p.n_train)
        color = PALETTE[si % len(PALETTE)]
        band = [f"{_f(sx(p.n_train))},{_f(sy(p.ci95_high))}" for p in pts]
        band += [f"{_f(sx(p.n_train))},{_f(sy(p.ci95_low))}" for p in reversed(pts)]
        out.append(f'<polygon points="{" ".join(band)}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        line = " ".join(f"{_f(sx(p.n_train))},{_f(sy(p.mean_accuracy))}" for p in pts)
        dash = DASHES[si % len(DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="2"{dash_attr}/>')
        ly = mt + 20 + 20 * si
        out.append(f'<line x1="{ml + pw + 15}" y1="{ly}" x2="{ml + pw + 45}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"{dash_attr}/>')
        out.append(f'<text x="{ml + pw + 52}" y="{ly + 4}">{escape(space)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def confusion_tables(matrices: list[CallTypeConfusion], cell: int = 70) -> str:
    """One heat table per individual, rows call types, columns predicted individuals."""
    label_w = 150
    gap = 30
    blocks_h = []
    for m in matrices:
        blocks_h.append(40 + cell * len(m.call_types) + gap)
    width = label_w + cell * max((len(m.predicted) for m in matrices), default=1) + 20
    height = sum(blocks_h) + 10
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    y0 = 10
    for m, bh in zip(matrices, blocks_h):
        out.append(f'<text x="{label_w}" y="{y0 + 12}" font-size="14">{escape(m.individual)}</text>')
        for j, pred in enumerate(m.predicted):
            out.append(f'<text x="{label_w + cell * j + cell / 2:.1f}" y="{y0 + 32}" '
                       f'text-anchor="middle">{escape(pred)}</text>')
        props = m.proportions
        for i, ct in enumerate(m.call_types):
            ry = y0 + 40 + cell * i
            out.append(f'<text x="{label_w - 6}" y="{ry + cell / 2 + 4:.1f}" text-anchor="end">{escape(ct)}</text>')
            for j in range(len(m.predicted)):
                v = float(props[i, j])
                shade = int(round(255 * (1 - v)))
                fill = f"rgb({shade},{shade},255)"
                txt = "white" if v > 0.5 else "black"
                out.append(f'<rect x="{label_w + cell * j}" y="{ry}" width="{cell}" height="{cell}" '
                           f'fill="{fill}" stroke="black"/>')
                out.append(f'<text x="{label_w + cell * j + cell / 2:.1f}" y="{ry + cell / 2 + 4:.1f}" '
                           f'text-anchor="middle" fill="{txt}">{v:.3f}</text>')
        y0 += bh
    out.append("</svg>")
    return "\n".join(out) + "\n"
