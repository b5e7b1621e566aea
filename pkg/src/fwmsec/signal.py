"""Complex signal-field grids and the field-level transformations.

A :class:`SignalGrid` holds the horizontally (LLVH) and vertically (LLVV)
polarized signal amplitudes sampled on the dense product of coherence
delays ``tau``, population delays ``T`` and detection wavelengths ``lam``.
Arrays are always indexed ``[tau, T, lam]``.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._io import atomic_write_text, fmt, iter_data_lines, parse_numeral
from .errors import GridShapeError, ParseError, ValidationError

__all__ = [
    "DEFAULT_DARK_FLOOR",
    "CSV_HEADER",
    "GridAxes",
    "SignalGrid",
    "DetectionSettings",
    "combine_scp_ocp",
    "split_scp_ocp",
    "polarization_contrast",
    "relative_phase",
    "qwp_matrix",
    "detect_through_qwp",
    "detected_contrast",
    "load_grid",
    "save_grid",
    "format_grid",
    "parse_grid",
]

# Fraction of the grid's peak total intensity below which a point is dark.
DEFAULT_DARK_FLOOR = 1e-12

CSV_HEADER = "tau_fs,T_fs,lambda_nm,S_H_re,S_H_im,S_V_re,S_V_im"


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def _check_axis(name, values):
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise GridShapeError(f"axis {name!r} is empty")
    if not np.all(np.isfinite(arr)):
        raise GridShapeError(f"axis {name!r} has non-finite values")
    if np.any(np.diff(arr) <= 0):
        raise GridShapeError(f"axis {name!r} must be strictly increasing")
    return _frozen(arr)


@dataclass(frozen=True, eq=False)
class GridAxes:
    """Sample positions: delays in fs, wavelengths in nm."""

    tau: np.ndarray
    T: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tau", _check_axis("tau", self.tau))
        object.__setattr__(self, "T", _check_axis("T", self.T))
        lam = _check_axis("lambda", self.lam)
        if np.any(lam <= 0):
            raise GridShapeError("wavelengths must be positive")
        object.__setattr__(self, "lam", lam)

    @property
    def shape(self):
        return (self.tau.size, self.T.size, self.lam.size)

    def __eq__(self, other):
        if not isinstance(other, GridAxes):
            return NotImplemented
        return (
            np.array_equal(self.tau, other.tau)
            and np.array_equal(self.T, other.T)
            and np.array_equal(self.lam, other.lam)
        )

    def index_of(self, axis, value, atol=1e-9):
        """Index of the sample on ``axis`` ('tau', 'T' or 'lam') within ``atol`` of ``value``."""
        values = getattr(self, axis)
        i = int(np.argmin(np.abs(values - value)))
        if abs(values[i] - value) > atol:
            raise KeyError(f"{value!r} is not a sample of axis {axis!r}")
        return i

    def meshgrid(self):
        """Broadcastable ``(tau, T, lam)`` coordinate arrays of full grid shape."""
        return np.meshgrid(self.tau, self.T, self.lam, indexing="ij")


@dataclass(frozen=True, eq=False)
class SignalGrid:
    """Immutable H/V complex signal amplitudes on a :class:`GridAxes` product."""

    axes: GridAxes
    S_H: np.ndarray
    S_V: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        S_H = np.asarray(self.S_H, dtype=complex)
        S_V = np.asarray(self.S_V, dtype=complex)
        for name, arr in (("S_H", S_H), ("S_V", S_V)):
            if arr.shape != self.axes.shape:
                raise GridShapeError(f"{name} has shape {arr.shape}, axes imply {self.axes.shape}")
            if not np.all(np.isfinite(arr)):
                raise GridShapeError(f"{name} has non-finite entries")
        object.__setattr__(self, "S_H", _frozen(S_H))
        object.__setattr__(self, "S_V", _frozen(S_V))
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def shape(self):
        return self.axes.shape

    @property
    def I_H(self):
        return np.abs(self.S_H) ** 2

    @property
    def I_V(self):
        return np.abs(self.S_V) ** 2

    @property
    def total_intensity(self):
        return self.I_H + self.I_V

    def dark_mask(self, floor=DEFAULT_DARK_FLOOR):
        """True where total intensity is below ``floor`` times the grid maximum."""
        total = self.total_intensity
        peak = total.max()
        if peak <= 0:
            return np.ones(self.shape, dtype=bool)
        return total < floor * peak

    def with_fields(self, S_H, S_V, **meta):
        """New grid on the same axes with replaced fields and merged metadata."""
        return SignalGrid(self.axes, S_H, S_V, {**self.meta, **meta})


@dataclass(frozen=True)
class DetectionSettings:
    """Quarter-wave-plate fast-axis angle in radians, normalized to [0, pi)."""

    theta_qwp: float = 0.0

    def __post_init__(self):
        theta = float(self.theta_qwp)
        if not np.isfinite(theta):
            raise ValidationError("theta_qwp must be finite")
        theta = theta % np.pi
        if theta >= np.pi:  # float rounding of tiny negative angles
            theta = 0.0
        object.__setattr__(self, "theta_qwp", theta)


def combine_scp_ocp(S_scp, S_ocp, axes, meta=None):
    """Form the LLVV and LLVH channels from SCP and OCP responses.

    ``S_V = (S_scp + S_ocp)/2`` and ``S_H = i (S_scp - S_ocp)/2``.
    """
    S_scp = np.asarray(S_scp, dtype=complex)
    S_ocp = np.asarray(S_ocp, dtype=complex)
    if S_scp.shape != S_ocp.shape:
        raise GridShapeError(f"SCP shape {S_scp.shape} != OCP shape {S_ocp.shape}")
    S_V = 0.5 * S_scp + 0.5 * S_ocp
    S_H = 0.5j * S_scp - 0.5j * S_ocp
    return SignalGrid(axes, S_H, S_V, meta or {})


def split_scp_ocp(grid):
    """Inverse of :func:`combine_scp_ocp`: returns ``(S_scp, S_ocp)``."""
    return grid.S_V - 1j * grid.S_H, grid.S_V + 1j * grid.S_H


def _contrast(I_H, I_V, dark):
    total = I_H + I_V
    safe = np.where(dark, 1.0, total)
    c = np.where(dark, 0.0, (I_H - I_V) / safe)
    return np.ma.masked_array(np.clip(c, -1.0, 1.0), mask=dark)


def polarization_contrast(grid, floor=DEFAULT_DARK_FLOOR):
    """``(I_H - I_V)/(I_H + I_V)`` as a masked array; dark points are masked."""
    return _contrast(grid.I_H, grid.I_V, grid.dark_mask(floor))


def relative_phase(grid, floor=DEFAULT_DARK_FLOOR):
    """Principal value of ``arg(S_V / S_H)`` in (-pi, pi].

    Points where either channel is below the dark floor are masked.
    """
    total = grid.total_intensity
    peak = total.max()
    thresh = floor * peak if peak > 0 else np.inf
    mask = (grid.I_H <= thresh) | (grid.I_V <= thresh) | (grid.I_H == 0) | (grid.I_V == 0)
    phase = np.angle(grid.S_V * np.conj(grid.S_H))
    phase = np.where(phase <= -np.pi, np.pi, phase)
    return np.ma.masked_array(np.where(mask, 0.0, phase), mask=mask)


def _rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def qwp_matrix(theta):
    """Jones matrix ``R(-theta) diag(1, i) R(theta)`` of a quarter-wave plate."""
    return _rotation(-theta) @ np.diag([1.0, 1.0j]) @ _rotation(theta)


def detect_through_qwp(grid, settings):
    """Intensities ``(I_H, I_V)`` after the wave plate and an H/V analyzer."""
    J = qwp_matrix(settings.theta_qwp)
    out_H = J[0, 0] * grid.S_H + J[0, 1] * grid.S_V
    out_V = J[1, 0] * grid.S_H + J[1, 1] * grid.S_V
    return np.abs(out_H) ** 2, np.abs(out_V) ** 2


def detected_contrast(grid, settings, floor=DEFAULT_DARK_FLOOR):
    """Polarization contrast formed from the wave-plate-projected intensities."""
    I_H, I_V = detect_through_qwp(grid, settings)
    return _contrast(I_H, I_V, grid.dark_mask(floor))


# --- CSV dataset format ---------------------------------------------------


def format_grid(grid):
    """Render a grid in the dataset CSV format (rows in tau, T, lambda order)."""
    lines = [f"# {key}: {value}" for key, value in sorted(grid.meta.items())]
    lines.append(CSV_HEADER)
    ax = grid.axes
    for i, tau in enumerate(ax.tau):
        for j, T in enumerate(ax.T):
            for k, lam in enumerate(ax.lam):
                h = grid.S_H[i, j, k]
                v = grid.S_V[i, j, k]
                lines.append(",".join(fmt(x) for x in (tau, T, lam, h.real, h.imag, v.real, v.imag)))
    return "\n".join(lines) + "\n"


def save_grid(grid, path):
    """Write ``grid`` to ``path`` atomically; returns the path."""
    return atomic_write_text(path, format_grid(grid))


def parse_grid(text):
    """Parse dataset CSV text into a :class:`SignalGrid`."""
    meta = {}
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#") and ":" in line:
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()

    lines = iter_data_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("missing header") from None
    if header != CSV_HEADER:
        raise ParseError(f"malformed header {header!r}, expected {CSV_HEADER!r}", lineno)

    rows = []
    linenos = []
    for lineno, line in lines:
        cells = line.split(",")
        if len(cells) != 7:
            raise ParseError(f"expected 7 fields, found {len(cells)}", lineno)
        values = [parse_numeral(c) for c in cells]
        if any(v is None for v in values):
            raise ParseError("non-finite or malformed numeral", lineno)
        rows.append(values)
        linenos.append(lineno)
    if not rows:
        raise ParseError("no grid points")

    data = np.array(rows)
    tau, it = np.unique(data[:, 0], return_inverse=True)
    T, iT = np.unique(data[:, 1], return_inverse=True)
    lam, il = np.unique(data[:, 2], return_inverse=True)
    shape = (tau.size, T.size, lam.size)

    seen = np.full(shape, -1, dtype=np.int64)
    for row, (a, b, c) in enumerate(zip(it, iT, il)):
        if seen[a, b, c] >= 0:
            raise ParseError(
                f"duplicate grid point (tau={tau[a]}, T={T[b]}, lambda={lam[c]}), "
                f"first seen on line {linenos[seen[a, b, c]]}",
                linenos[row],
            )
        seen[a, b, c] = row
    if np.any(seen < 0):
        a, b, c = np.argwhere(seen < 0)[0]
        raise ParseError(
            f"rows do not tile the axis product: missing (tau={tau[a]}, T={T[b]}, lambda={lam[c]})"
        )
    if np.any(lam <= 0):
        bad = int(np.argmax(data[:, 2] <= 0))
        raise ParseError("wavelength must be positive", linenos[bad])

    S_H = np.empty(shape, dtype=complex)
    S_V = np.empty(shape, dtype=complex)
    # assign components separately so signed zeros survive the round trip
    S_H.real[it, iT, il] = data[:, 3]
    S_H.imag[it, iT, il] = data[:, 4]
    S_V.real[it, iT, il] = data[:, 5]
    S_V.imag[it, iT, il] = data[:, 6]
    return SignalGrid(GridAxes(tau, T, lam), S_H, S_V, meta)


def load_grid(path):
    """Read a dataset CSV file into a :class:`SignalGrid`."""
    return parse_grid(Path(path).read_text(encoding="utf-8"))
