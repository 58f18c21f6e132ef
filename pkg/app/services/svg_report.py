"""
Static SVG rendering of inclusion sets.

Disks are drawn as circles, Brualdi circuit regions as the grid cells whose
centers they contain, eigenvalues as cross markers. The viewport is 1.1x the
bounding box of the disks. Output carries no timestamps and uses fixed
precision so two renders of the same input are byte-identical.
"""
from typing import Sequence

import numpy as np

from app.services.inclusion import CircuitRegion, Disk, bounding_box

PREAMBLE = """\
<?xml version="1.0" standalone="no"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="%(size)d" height="%(size)d" viewBox="%(x)f %(y)f %(w)f %(h)f">
<rect x="%(x)f" y="%(y)f" width="%(w)f" height="%(h)f" style="fill:#ffffff"/>
"""

POSTAMBLE = """\
</svg>
"""

DISK_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"]
REGION_FILL = "#7f7f7f"


class RegionPlot:
    """Collects drawing commands in plane coordinates (imaginary axis up)."""

    def __init__(self, disks: Sequence[Disk], size: int = 600):
        self.size = size
        self.commands: list[str] = []
        x0, x1, y0, y1 = bounding_box(disks)
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        half = 0.55 * max(x1 - x0, y1 - y0, 1e-12)
        self.box = (cx - half, cx + half, cy - half, cy + half)
        self.stroke = 2 * half / size

    def circle(self, center: complex, radius: float, color: str) -> None:
        self.commands.append(
            '<circle cx="%f" cy="%f" r="%f" style="fill:%s;fill-opacity:0.15;stroke:%s;stroke-width:%f"/>'
            % (center.real, -center.imag, radius, color, color, self.stroke)
        )

    def cells(self, mask: np.ndarray, xs: np.ndarray, ys: np.ndarray, color: str) -> None:
        dx = xs[1] - xs[0] if len(xs) > 1 else self.stroke
        dy = ys[1] - ys[0] if len(ys) > 1 else self.stroke
        for r, c in zip(*np.nonzero(mask)):
            self.commands.append(
                '<rect x="%f" y="%f" width="%f" height="%f" style="fill:%s;fill-opacity:0.35"/>'
                % (xs[c] - dx / 2, -(ys[r] + dy / 2), dx, dy, color)
            )

    def marker(self, z: complex) -> None:
        s = 4 * self.stroke
        x, y = z.real, -z.imag
        self.commands.append(
            '<path d="M %f %f L %f %f M %f %f L %f %f" style="stroke:#000000;stroke-width:%f"/>'
            % (x - s, y - s, x + s, y + s, x - s, y + s, x + s, y - s, self.stroke)
        )

    def render(self) -> str:
        x0, x1, y0, y1 = self.box
        # y is negated on output, so the viewBox covers -y1..-y0
        header = PREAMBLE % {"size": self.size, "x": x0, "y": -y1, "w": x1 - x0, "h": y1 - y0}
        return header + "".join(c + "\n" for c in self.commands) + POSTAMBLE


def render_regions(
    disks: Sequence[Disk],
    circuit_regions: Sequence[CircuitRegion] = (),
    eigenvalues: Sequence[complex] = (),
    *,
    grid: int = 200,
) -> str:
    plot = RegionPlot(disks)
    if circuit_regions:
        x0, x1, y0, y1 = plot.box
        xs = np.linspace(x0, x1, grid)
        ys = np.linspace(y0, y1, grid)
        Z = xs[None, :] + 1j * ys[:, None]
        mask = np.zeros(Z.shape, dtype=bool)
        for region in circuit_regions:
            mask |= region.contains(Z)
        plot.cells(mask, xs, ys, REGION_FILL)
    for d in disks:
        plot.circle(d.center, d.radius, DISK_COLORS[d.row % len(DISK_COLORS)])
    for z in eigenvalues:
        plot.marker(complex(z))
    return plot.render()
