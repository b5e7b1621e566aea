"""Static SVG heatmaps with an embedded PNG raster."""

import base64
import io

import numpy as np
from PIL import Image

# Linear ramp between these stops for values 0, 0.25, 0.5, 0.75, 1.
COLOR_STOPS = np.array(
    [
        [13, 8, 135],
        [84, 2, 163],
        [33, 145, 140],
        [180, 222, 44],
        [253, 231, 37],
    ],
    dtype=float,
)


def colorize(values):
    """Map values in [0, 1] to uint8 RGB through :data:`COLOR_STOPS`."""
    v = np.clip(np.nan_to_num(np.asarray(values, dtype=float)), 0.0, 1.0)
    pos = v * (len(COLOR_STOPS) - 1)
    lo = np.minimum(pos.astype(int), len(COLOR_STOPS) - 2)
    frac = (pos - lo)[..., None]
    rgb = COLOR_STOPS[lo] * (1 - frac) + COLOR_STOPS[lo + 1] * frac
    return np.round(rgb).astype(np.uint8)


def heatmap_svg(values, x, y, title="", xlabel="", ylabel=""):
    """SVG text for ``values[i, j]`` at ``(x[i], y[j])``; x runs right, y up."""
    values = np.asarray(values, dtype=float)
    rgb = colorize(values.T[::-1])  # rows = y descending
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG", optimize=False)
    png = base64.b64encode(buf.getvalue()).decode("ascii")

    w, h, pad = 400, 400, 60
    stops = ", ".join(f"{k / 4:g}->rgb({r:.0f},{g:.0f},{b:.0f})" for k, (r, g, b) in enumerate(COLOR_STOPS))
    return "\n".join(
        [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f"<!-- value->color: linear interpolation between stops {stops}; values clipped to [0, 1] -->",
            f'<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" '
            f'width="{w + 2 * pad}" height="{h + 2 * pad}">',
            f'<text x="{pad + w / 2}" y="{pad / 2}" text-anchor="middle" font-size="14">{title}</text>',
            f'<image x="{pad}" y="{pad}" width="{w}" height="{h}" preserveAspectRatio="none" '
            f'style="image-rendering:pixelated" xlink:href="data:image/png;base64,{png}"/>',
            f'<rect x="{pad}" y="{pad}" width="{w}" height="{h}" fill="none" stroke="black"/>',
            f'<text x="{pad}" y="{pad + h + 18}" font-size="11">{x[0]:.3g}</text>',
            f'<text x="{pad + w}" y="{pad + h + 18}" text-anchor="end" font-size="11">{x[-1]:.3g}</text>',
            f'<text x="{pad + w / 2}" y="{pad + h + 36}" text-anchor="middle" font-size="12">{xlabel}</text>',
            f'<text x="{pad - 6}" y="{pad + h}" text-anchor="end" font-size="11">{y[0]:.3g}</text>',
            f'<text x="{pad - 6}" y="{pad + 10}" text-anchor="end" font-size="11">{y[-1]:.3g}</text>',
            f'<text x="{pad / 3}" y="{pad + h / 2}" font-size="12" '
            f'transform="rotate(-90 {pad / 3} {pad + h / 2})" text-anchor="middle">{ylabel}</text>',
            "</svg>",
            "",
        ]
    )
