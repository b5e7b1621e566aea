"""Polarization qubits, von Neumann entropy and Holevo bounds.

Bloch components follow the field convention

    r1 = 2 Re(e_H e_V*),  r2 = 2 Im(e_H e_V*),  r3 = |e_H|^2 - |e_V|^2

so that the density matrix ``psi psi^dagger`` of a Jones vector reads
``[[1 + r3, r1 + i r2], [r1 - i r2, 1 - r3]] / 2``. Relative to the usual
Pauli expectation values this flips the sign of ``r2``; norms, entropies
and Holevo quantities are unaffected.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._io import atomic_write_text, fmt, iter_data_lines, parse_numeral
from .errors import ConfigError, DarkPointError, DomainError, ParseError, ValidationError
from .numerics import binary_entropy
from .signal import DEFAULT_DARK_FLOOR

log = logging.getLogger(__name__)

__all__ = [
    "PolarizationState",
    "DensityMatrix2",
    "EnsembleReport",
    "WindowComparison",
    "bloch_from_fields",
    "state_from_fields",
    "density_from_state",
    "density_from_bloch",
    "von_neumann_entropy",
    "ensemble_average",
    "holevo_bound",
    "holevo_from_bloch",
    "holevo_expansion",
    "windowed_holevo_report",
    "grid_bloch_vectors",
    "format_ensemble_reports",
    "parse_ensemble_reports",
    "format_bloch_points",
    "parse_bloch_points",
]

_TOL = 1e-12
_LN2 = math.log(2.0)


def bloch_from_fields(S_H, S_V):
    """Bloch components ``(..., 3)`` of the pure states with Jones vectors ``(S_H, S_V)``.

    Inputs need not be normalized. Points with zero total intensity give NaN.
    """
    S_H = np.asarray(S_H, dtype=complex)
    S_V = np.asarray(S_V, dtype=complex)
    I_H = S_H.real**2 + S_H.imag**2
    I_V = S_V.real**2 + S_V.imag**2
    total = I_H + I_V
    with np.errstate(invalid="ignore", divide="ignore"):
        cross = 2.0 * S_H * np.conj(S_V) / total
        r3 = (I_H - I_V) / total
    return np.stack([cross.real, cross.imag, r3], axis=-1)


@dataclass(frozen=True)
class PolarizationState:
    """Normalized Jones vector ``(e_H, e_V)`` and its Bloch vector."""

    e_H: complex
    e_V: complex
    bloch: tuple

    @property
    def jones(self):
        return np.array([self.e_H, self.e_V], dtype=complex)


def state_from_fields(S_H, S_V):
    """Normalize a field pair to unit intensity and reconstruct its state."""
    S_H = complex(S_H)
    S_V = complex(S_V)
    norm = math.hypot(abs(S_H), abs(S_V))
    if norm == 0.0 or not math.isfinite(norm):
        raise DarkPointError("zero total intensity: no polarization state")
    e_H, e_V = S_H / norm, S_V / norm
    r = bloch_from_fields(e_H, e_V)
    return PolarizationState(e_H, e_V, tuple(float(x) for x in r))


class DensityMatrix2:
    """A validated 2x2 density matrix (Hermitian, unit trace, PSD)."""

    def __init__(self, matrix, validate=True):
        m = np.array(matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValidationError(f"expected a 2x2 matrix, got shape {m.shape}")
        if validate:
            if not np.all(np.isfinite(m)):
                raise ValidationError("matrix has non-finite entries")
            if np.max(np.abs(m - m.conj().T)) > _TOL:
                raise ValidationError("matrix is not Hermitian")
            if abs(np.trace(m) - 1.0) > _TOL:
                raise ValidationError(f"trace {np.trace(m).real:.15g} != 1")
        m = 0.5 * (m + m.conj().T)
        self.matrix = m
        if validate:
            lo, hi = self.eigenvalues(clamp=False)
            if lo < -_TOL or hi > 1 + _TOL:
                raise ValidationError(f"eigenvalues ({lo}, {hi}) outside [0, 1]")

    def __repr__(self):
        return f"DensityMatrix2({self.matrix.tolist()!r})"

    @property
    def bloch(self):
        m = self.matrix
        return np.array([2 * m[0, 1].real, 2 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real])

    def eigenvalues(self, clamp=True):
        """Closed-form eigenvalues ``(low, high)`` from trace and determinant."""
        a = self.matrix[0, 0].real
        d = self.matrix[1, 1].real
        b = self.matrix[0, 1]
        half_tr = 0.5 * (a + d)
        disc = math.hypot(0.5 * (a - d), abs(b))
        lo, hi = half_tr - disc, half_tr + disc
        if clamp:
            lo = min(max(lo, 0.0), 1.0)
            hi = min(max(hi, 0.0), 1.0)
        return lo, hi

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def density_from_bloch(r):
    """Density matrix with Bloch vector ``r`` in the field convention."""
    r1, r2, r3 = (float(x) for x in r)
    m = 0.5 * np.array([[1 + r3, r1 + 1j * r2], [r1 - 1j * r2, 1 - r3]])
    return DensityMatrix2(m)


def density_from_state(s):
    """Projector ``psi psi^dagger`` onto the state's Jones vector."""
    psi = s.jones
    return DensityMatrix2(np.outer(psi, psi.conj()))


def von_neumann_entropy(rho):
    """Entropy in bits from the closed-form eigenvalues of ``rho``."""
    if not isinstance(rho, DensityMatrix2):
        rho = DensityMatrix2(rho)
    lo, hi = rho.eigenvalues(clamp=True)
    return float(sum(-x * math.log2(x) for x in (lo, hi) if x > 0.0))


def _bloch_array(states):
    if isinstance(states, np.ndarray):
        r = np.asarray(states, dtype=float)
        if r.ndim != 2 or r.shape[1] != 3:
            raise ValidationError("Bloch array must have shape (K, 3)")
        return r
    states = list(states)
    return np.array([s.bloch for s in states], dtype=float).reshape(len(states), 3)


def _fsum_mean(values, weights):
    if weights is None:
        return [math.fsum(col) / len(col) for col in values.T]
    return [math.fsum(col * weights) for col in values.T]


def _check_weights(weights, k):
    if weights is None:
        return None
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != k:
        raise ValidationError(f"{w.size} weights for {k} states")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite and nonnegative")
    if abs(math.fsum(w) - 1.0) > 1e-9:
        raise ValidationError("weights must sum to 1")
    return w


def ensemble_average(states, weights=None):
    """Average Bloch vector and density matrix of an ensemble.

    ``states`` is a sequence of :class:`PolarizationState` or a ``(K, 3)``
    array of Bloch vectors. Weights default to uniform ``1/K``. The sums
    are exactly rounded (``math.fsum``), so the result does not depend on
    ordering or partitioning.
    """
    r = _bloch_array(states)
    if r.shape[0] == 0:
        raise ValidationError("empty ensemble")
    w = _check_weights(weights, r.shape[0])
    r_bar = np.array(_fsum_mean(r, w))
    norm = np.linalg.norm(r_bar)
    if norm > 1.0:
        # rounding can push a pure ensemble a hair outside the Bloch ball
        if norm > 1.0 + 1e-10:
            raise ValidationError(f"ensemble Bloch norm {norm} > 1")
        r_bar = r_bar / norm
    return r_bar, density_from_bloch(r_bar)


def holevo_from_bloch(r_norm):
    """``h2((1 + |r|)/2)`` for each Bloch norm in ``r_norm``."""
    r_norm = np.clip(np.asarray(r_norm, dtype=float), 0.0, 1.0)
    return binary_entropy(0.5 * (1.0 + r_norm))


def holevo_bound(states, weights=None):
    """Holevo quantity ``S(rho_bar) - sum_k w_k S(rho_k)`` in bits.

    Member entropies are evaluated from their Bloch norms, so pure states
    contribute zero and the bound reduces to ``h2((1 + |r_bar|)/2)``.
    """
    r = _bloch_array(states)
    r_bar, _ = ensemble_average(r, weights)
    w = _check_weights(weights, r.shape[0])
    member = holevo_from_bloch(np.linalg.norm(r, axis=1))
    mean_member = math.fsum(member) / len(member) if w is None else math.fsum(member * w)
    chi = float(holevo_from_bloch(np.linalg.norm(r_bar))) - mean_member
    return min(max(chi, 0.0), 1.0)


def holevo_expansion(r_norm):
    """Two-term small-|r| expansion ``1 - r^2/(2 ln 2) - r^4/(12 ln 2)``."""
    r = np.asarray(r_norm, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r < 0) or np.any(r >= 1):
        raise DomainError("holevo_expansion requires 0 <= |r| < 1")
    out = 1.0 - r**2 / (2 * _LN2) - r**4 / (12 * _LN2)
    return float(out) if out.ndim == 0 else out


def grid_bloch_vectors(grid, floor=DEFAULT_DARK_FLOOR):
    """Bloch vectors of every grid point and the dark mask.

    Returns ``(r, dark)`` with ``r`` of shape ``grid.shape + (3,)``; dark
    points hold NaN.
    """
    dark = grid.dark_mask(floor)
    r = bloch_from_fields(grid.S_H, grid.S_V)
    r[dark] = np.nan
    return r, dark


@dataclass(frozen=True)
class EnsembleReport:
    """Ensemble summary for one wavelength window and sampling mode."""

    window: tuple
    mode: str  # "full" over (tau, T, lam) or "reduced" over (T, lam) at tau0
    r_bar: tuple
    chi: float
    count: int

    @property
    def r_norm(self):
        return float(np.linalg.norm(self.r_bar))


@dataclass(frozen=True)
class WindowComparison:
    """Full- and reduced-space reports for a window and their difference."""

    full: EnsembleReport
    reduced: EnsembleReport

    @property
    def window(self):
        return self.full.window

    @property
    def delta_chi(self):
        return self.full.chi - self.reduced.chi


def _report(r, window, mode):
    r_bar, _ = ensemble_average(r)
    return EnsembleReport(
        window=tuple(float(x) for x in window),
        mode=mode,
        r_bar=tuple(float(x) for x in r_bar),
        chi=float(holevo_from_bloch(np.linalg.norm(r_bar))),
        count=int(r.shape[0]),
    )


def windowed_holevo_report(grid, windows, tau0=0.0, floor=DEFAULT_DARK_FLOOR):
    """Holevo bounds per wavelength window, full vs. reduced sampling.

    For each ``(lam_lo, lam_hi)`` window (inclusive) the full ensemble
    collects every unmasked ``(tau, T, lam)`` point in the window; the
    reduced ensemble keeps only the ``tau == tau0`` slice. Windows left
    empty after masking are skipped with a warning.
    """
    lam = grid.axes.lam
    try:
        i0 = grid.axes.index_of("tau", tau0)
    except KeyError:
        raise ConfigError(f"tau0={tau0} fs is not on the tau axis") from None
    r, dark = grid_bloch_vectors(grid, floor)
    out = []
    for lo, hi in windows:
        if lo > hi:
            raise ConfigError(f"window ({lo}, {hi}) has lo > hi")
        if lo < lam[0] - 1e-9 or hi > lam[-1] + 1e-9:
            raise ConfigError(f"window ({lo}, {hi}) nm outside grid range [{lam[0]}, {lam[-1]}]")
        sel = (lam >= lo) & (lam <= hi)
        full_mask = ~dark[:, :, sel]
        full = r[:, :, sel][full_mask]
        reduced = r[i0][:, sel][full_mask[i0]]
        if full.shape[0] == 0 or reduced.shape[0] == 0:
            log.warning("window %s-%s nm has no unmasked points; skipped", lo, hi)
            continue
        out.append(WindowComparison(_report(full, (lo, hi), "full"), _report(reduced, (lo, hi), "reduced")))
    return out


# --- CSV report formats ---------------------------------------------------

REPORT_HEADER = "window_nm_lo,window_nm_hi,mode,count,r1,r2,r3,r_norm,chi"
BLOCH_HEADER = "tau_fs,T_fs,lambda_nm,r1,r2,r3"


def format_ensemble_reports(comparisons):
    """CSV text: a full row, a reduced row and a ``delta_chi`` row per window."""
    lines = [
        "# delta_chi rows: chi column holds chi(full) - chi(reduced)",
        "# uncertainty: not estimated (single dataset)",
        REPORT_HEADER,
    ]
    for comp in comparisons:
        for rep in (comp.full, comp.reduced):
            lo, hi = rep.window
            lines.append(
                ",".join(
                    [fmt(lo), fmt(hi), rep.mode, str(rep.count)]
                    + [fmt(x) for x in rep.r_bar]
                    + [fmt(rep.r_norm), fmt(rep.chi)]
                )
            )
        lo, hi = comp.window
        lines.append(",".join([fmt(lo), fmt(hi), "delta_chi", "", "", "", "", "", fmt(comp.delta_chi)]))
    return "\n".join(lines) + "\n"


def parse_ensemble_reports(text):
    """Parse report CSV text back into :class:`WindowComparison` objects."""
    lines = iter_data_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("missing header") from None
    if header != REPORT_HEADER:
        raise ParseError(f"malformed header {header!r}", lineno)
    pending = {}
    out = []
    for lineno, line in lines:
        cells = line.split(",")
        if len(cells) != 9:
            raise ParseError(f"expected 9 fields, found {len(cells)}", lineno)
        lo, hi = parse_numeral(cells[0]), parse_numeral(cells[1])
        if lo is None or hi is None:
            raise ParseError("malformed window bounds", lineno)
        mode = cells[2]
        if mode == "delta_chi":
            try:
                comp = WindowComparison(pending.pop(("full", lo, hi)), pending.pop(("reduced", lo, hi)))
            except KeyError:
                raise ParseError("delta_chi row without full and reduced rows", lineno) from None
            out.append(comp)
            continue
        if mode not in ("full", "reduced"):
            raise ParseError(f"unknown mode {mode!r}", lineno)
        nums = [parse_numeral(c) for c in cells[4:]]
        if any(v is None for v in nums) or not cells[3].isdigit():
            raise ParseError("malformed numeric field", lineno)
        pending[(mode, lo, hi)] = EnsembleReport((lo, hi), mode, tuple(nums[:3]), nums[4], int(cells[3]))
    return out


def save_ensemble_reports(comparisons, path):
    return atomic_write_text(path, format_ensemble_reports(comparisons))


def load_ensemble_reports(path):
    return parse_ensemble_reports(Path(path).read_text(encoding="utf-8"))


def format_bloch_points(grid, floor=DEFAULT_DARK_FLOOR):
    """CSV text with the Bloch vector of every unmasked grid point."""
    r, dark = grid_bloch_vectors(grid, floor)
    ax = grid.axes
    lines = [BLOCH_HEADER]
    for i, j, k in np.argwhere(~dark):
        lines.append(",".join(fmt(x) for x in (ax.tau[i], ax.T[j], ax.lam[k], *r[i, j, k])))
    return "\n".join(lines) + "\n"


def parse_bloch_points(text):
    """Parse Bloch CSV text into an ``(N, 6)`` array of coordinates and components."""
    lines = iter_data_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("missing header") from None
    if header != BLOCH_HEADER:
        raise ParseError(f"malformed header {header!r}", lineno)
    rows = []
    for lineno, line in lines:
        cells = line.split(",")
        vals = [parse_numeral(c) for c in cells]
        if len(cells) != 6 or any(v is None for v in vals):
            raise ParseError("malformed row", lineno)
        rows.append(vals)
    return np.array(rows, dtype=float).reshape(len(rows), 6)
