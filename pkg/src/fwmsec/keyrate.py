"""Effective secret bits per transmitted pulse from contrast statistics.

Two toggled delay settings produce mean detected contrasts ``mu0`` and
``mu1`` at each wavelength. Averaging ``M`` pulses with single-pulse spread
``sigma_C`` resolves them with

    R_res(M) = |mu1 - mu0| sqrt(M) / (sqrt(2) sigma_C)

``N_bit`` is the least ``M`` reaching the threshold ``R_th``, the bit error
is ``Q = erfc(R_res(N_bit)/2)/2`` and the yield per transmitted pulse is
``Y_eff = q/N_bit * max(0, 1 - h2(Q) - chi)``.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._io import atomic_write_text, fmt, iter_data_lines, parse_numeral
from .errors import ConfigError, DomainError, ParseError
from .numerics import binary_entropy, erfc
from .qstate import bloch_from_fields, holevo_bound
from .signal import DEFAULT_DARK_FLOOR, DetectionSettings, detected_contrast

log = logging.getLogger(__name__)

__all__ = [
    "TogglingScheme",
    "KeyRateRow",
    "KeyRateReport",
    "resolution",
    "n_bit",
    "error_probability",
    "secret_yield",
    "contrast_means",
    "coherence_toggles",
    "chi_from_windows",
    "toggled_chi",
    "keyrate_spectrum",
    "format_keyrate_report",
    "parse_keyrate_report",
]


@dataclass(frozen=True)
class TogglingScheme:
    """Which delay is toggled and how the two settings are decoded.

    ``kind='population'`` toggles ``T`` between ``toggles`` at fixed
    ``tau = fixed_delay``; ``kind='coherence'`` toggles ``tau`` at fixed
    ``T = fixed_delay``. For coherence toggling ``toggles=None`` selects,
    per wavelength, the adjacent contrast maximum and minimum along ``tau``.
    """

    kind: str = "population"
    toggles: tuple = (100.0, 500.0)
    fixed_delay: float = 0.0
    theta_qwp: float = 0.0
    q: float = 0.5
    R_th: float = 2.0
    sigma_C: float = 1.0
    chi_mode: str = "full"

    def __post_init__(self):
        if self.kind not in ("population", "coherence"):
            raise ConfigError(f"kind must be 'population' or 'coherence', got {self.kind!r}")
        if self.toggles is None:
            if self.kind == "population":
                raise ConfigError("population toggling needs explicit toggle delays")
        else:
            t = tuple(float(x) for x in self.toggles)
            if len(t) != 2:
                raise ConfigError("toggles must hold exactly two delays")
            object.__setattr__(self, "toggles", t)
        if not 0 < self.q <= 1:
            raise ConfigError("q must lie in (0, 1]")
        if not self.R_th > 0:
            raise ConfigError("R_th must be positive")
        if not self.sigma_C > 0:
            raise ConfigError("sigma_C must be positive")
        if self.chi_mode not in ("full", "reduced", "toggled"):
            raise ConfigError(f"unknown chi_mode {self.chi_mode!r}")

    @property
    def toggled_axis(self):
        return "T" if self.kind == "population" else "tau"

    @property
    def fixed_axis(self):
        return "tau" if self.kind == "population" else "T"

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if data.get("toggles") is not None:
            data["toggles"] = tuple(data["toggles"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad scheme: {exc}") from None


TIE_SLACK = Fraction(1, 10**12)


def resolution(delta_mu, sigma_C, M):
    """Contrast resolution after averaging ``M`` pulses."""
    return abs(delta_mu) * math.sqrt(M) / (math.sqrt(2.0) * sigma_C)


def n_bit(delta_mu, sigma_C, R_th=2.0):
    """Least pulse count ``M`` with ``R_res(M) >= R_th``.

    Evaluates ``ceil(2 sigma_C^2 R_th^2 / delta_mu^2)`` in rational
    arithmetic. A threshold met to within a relative ``TIE_SLACK`` of the
    squared ratio counts as met, so inputs like ``(0.02, 0.1, 2)`` give the
    intended 200 rather than 201 from binary rounding of the decimals.
    """
    delta_mu = abs(delta_mu)
    if not math.isfinite(delta_mu) or delta_mu == 0:
        raise DomainError("indiscriminable contrasts: delta_mu must be nonzero")
    if sigma_C < 0 or R_th <= 0:
        raise DomainError("sigma_C must be >= 0 and R_th > 0")
    ratio = 2 * Fraction(sigma_C) ** 2 * Fraction(R_th) ** 2 / Fraction(delta_mu) ** 2
    return max(1, math.ceil(ratio * (1 - TIE_SLACK)))


def error_probability(R_res):
    """Gaussian two-state overlap ``erfc(R_res/2)/2``."""
    R = np.asarray(R_res, dtype=float)
    if np.any(np.isnan(R)) or np.any(R < 0):
        raise DomainError("R_res must be nonnegative")
    with np.errstate(invalid="ignore"):
        Q = np.where(np.isinf(R), 0.0, 0.5 * erfc(np.where(np.isinf(R), 0.0, R) / 2.0))
    return float(Q) if Q.ndim == 0 else Q


def secret_yield(q, N_bit, Q, chi):
    """Secret bits per transmitted pulse."""
    if not 0 < q <= 1:
        raise DomainError("q must lie in (0, 1]")
    if N_bit < 1:
        raise DomainError("N_bit must be >= 1")
    if not -1e-12 <= Q <= 0.5 + 1e-12:
        raise DomainError("Q must lie in [0, 1/2]")
    if not -1e-12 <= chi <= 1 + 1e-12:
        raise DomainError("chi must lie in [0, 1]")
    return q / N_bit * max(0.0, 1.0 - binary_entropy(min(max(Q, 0.0), 0.5)) - chi)


# --- spectra ---------------------------------------------------------------


def _delay_index(grid, axis, value):
    try:
        return grid.axes.index_of(axis, value)
    except KeyError:
        raise ConfigError(f"toggle delay {value} fs is not on the {axis} axis") from None


def _contrast_along(grid, scheme, floor):
    """Detected contrast with shape (toggled axis, lam) at the fixed delay."""
    C = detected_contrast(grid, DetectionSettings(scheme.theta_qwp), floor)
    k = _delay_index(grid, scheme.fixed_axis, scheme.fixed_delay)
    return C[k] if scheme.kind == "population" else C[:, k]


def _adjacent_extrema(profile):
    """Indices ``(i, j)`` of the adjacent max/min pair with the largest gap."""
    c = np.asarray(profile, dtype=float)
    n = c.size
    if n < 2:
        return 0, 0
    d = np.sign(np.diff(c))
    # carry the last nonzero slope across flat steps
    for i in range(1, d.size):
        if d[i] == 0:
            d[i] = d[i - 1]
    ext = [0] + [i for i in range(1, n - 1) if d[i - 1] * d[i] < 0] + [n - 1]
    best = (0, 0)
    best_gap = -1.0
    for a, b in zip(ext[:-1], ext[1:]):
        gap = abs(c[b] - c[a])
        if gap > best_gap:
            best, best_gap = (a, b), gap
    return best


def coherence_toggles(grid, scheme, floor=DEFAULT_DARK_FLOOR):
    """Per-wavelength toggle indices on the tau axis, shape ``(n_lam, 2)``."""
    C = _contrast_along(grid, scheme, floor)
    n_lam = grid.shape[2]
    if scheme.toggles is not None:
        i0 = _delay_index(grid, "tau", scheme.toggles[0])
        i1 = _delay_index(grid, "tau", scheme.toggles[1])
        return np.tile([i0, i1], (n_lam, 1))
    out = np.zeros((n_lam, 2), dtype=int)
    for k in range(n_lam):
        col = C[:, k]
        if np.ma.is_masked(col) and col.mask.any():
            continue
        out[k] = _adjacent_extrema(np.ma.getdata(col))
    return out


def contrast_means(grid, scheme, floor=DEFAULT_DARK_FLOOR):
    """Mean detected contrasts ``(mu0, mu1)`` per wavelength (masked arrays)."""
    C = _contrast_along(grid, scheme, floor)
    if scheme.kind == "population":
        i0 = _delay_index(grid, "T", scheme.toggles[0])
        i1 = _delay_index(grid, "T", scheme.toggles[1])
        return C[i0], C[i1]
    idx = coherence_toggles(grid, scheme, floor)
    lam = np.arange(grid.shape[2])
    return C[idx[:, 0], lam], C[idx[:, 1], lam]


def chi_from_windows(comparisons, mode="full"):
    """Map wavelength to the chi of its window, or of the nearest window."""
    if not comparisons:
        raise ConfigError("no window reports to take chi from")
    items = []
    for comp in comparisons:
        rep = comp.full if mode == "full" else comp.reduced
        items.append((rep.window[0], rep.window[1], rep.chi))

    def chi_at(lam):
        best = None
        for lo, hi, chi in items:
            dist = 0.0 if lo <= lam <= hi else min(abs(lam - lo), abs(lam - hi))
            if best is None or dist < best[0]:
                best = (dist, chi)
        return best[1]

    return chi_at


def toggled_chi(grid, scheme, floor=DEFAULT_DARK_FLOOR):
    """Per-wavelength Holevo bound of the two toggled source states."""
    k = _delay_index(grid, scheme.fixed_axis, scheme.fixed_delay)
    n_lam = grid.shape[2]
    if scheme.kind == "population":
        i0 = _delay_index(grid, "T", scheme.toggles[0])
        i1 = _delay_index(grid, "T", scheme.toggles[1])
        idx = np.tile([i0, i1], (n_lam, 1))
        pick = lambda arr, i, l: arr[k, i, l]  # noqa: E731
    else:
        idx = coherence_toggles(grid, scheme, floor)
        pick = lambda arr, i, l: arr[i, k, l]  # noqa: E731
    out = np.empty(n_lam)
    for lam in range(n_lam):
        pts = [(pick(grid.S_H, i, lam), pick(grid.S_V, i, lam)) for i in idx[lam]]
        r = np.array([bloch_from_fields(h, v) for h, v in pts])
        out[lam] = holevo_bound(r) if np.all(np.isfinite(r)) else np.nan
    return out


@dataclass(frozen=True)
class KeyRateRow:
    lambda_nm: float
    mu0: float
    mu1: float
    delta_mu: float
    sigma_C: float
    N_bit: object  # int, or None when the contrasts coincide
    Q: float
    chi: float
    Y_eff: float
    flag: str = ""


@dataclass(frozen=True)
class KeyRateReport:
    rows: tuple
    scheme: TogglingScheme

    def best(self):
        """Row with the largest ``Y_eff`` (first one on ties), or None."""
        if not self.rows:
            return None
        return max(self.rows, key=lambda r: r.Y_eff)

    def summary(self):
        best = self.best()
        finite = [r.N_bit for r in self.rows if r.N_bit is not None]
        return {
            "kind": self.scheme.kind,
            "argmax_lambda_nm": None if best is None else best.lambda_nm,
            "max_Y_eff": None if best is None else best.Y_eff,
            "min_N_bit": min(finite) if finite else None,
            "rows": len(self.rows),
            "flagged_rows": sum(1 for r in self.rows if r.flag),
        }

    def column(self, name):
        return np.array([getattr(r, name) if getattr(r, name) is not None else np.nan for r in self.rows], dtype=float)


def keyrate_spectrum(grid, scheme, chi_source, floor=DEFAULT_DARK_FLOOR):
    """Per-wavelength key-rate rows in ascending wavelength order.

    ``chi_source`` is a float, a per-wavelength array, or a callable taking
    a wavelength in nm. Wavelengths where either toggled contrast is masked
    are skipped with a warning; coinciding contrasts give a row flagged
    ``indiscriminable`` with ``Y_eff = 0``.
    """
    mu0, mu1 = contrast_means(grid, scheme, floor)
    lam = grid.axes.lam
    if callable(chi_source):
        chi = np.array([chi_source(float(x)) for x in lam])
    else:
        chi = np.broadcast_to(np.asarray(chi_source, dtype=float), lam.shape)
    mask = np.ma.getmaskarray(mu0) | np.ma.getmaskarray(mu1)
    rows = []
    for k in np.argsort(lam):
        if mask[k] or not np.isfinite(chi[k]):
            log.warning("lambda=%s nm: toggled contrast masked; row skipped", lam[k])
            continue
        m0, m1 = float(mu0[k]), float(mu1[k])
        dmu = abs(m1 - m0)
        chi_k = min(max(float(chi[k]), 0.0), 1.0)
        if dmu == 0.0:
            rows.append(KeyRateRow(float(lam[k]), m0, m1, 0.0, scheme.sigma_C, None, 0.5, chi_k, 0.0, "indiscriminable"))
            continue
        N = n_bit(dmu, scheme.sigma_C, scheme.R_th)
        Q = error_probability(resolution(dmu, scheme.sigma_C, N))
        Y = secret_yield(scheme.q, N, Q, chi_k)
        rows.append(KeyRateRow(float(lam[k]), m0, m1, dmu, scheme.sigma_C, N, Q, chi_k, Y))
    return KeyRateReport(tuple(rows), scheme)


# --- CSV format -----------------------------------------------------------

KEYRATE_HEADER = "lambda_nm,mu0,mu1,delta_mu,sigma_C,N_bit,Q,chi,Y_eff,flag"


def format_keyrate_report(report):
    lines = [f"# scheme: {json.dumps(asdict(report.scheme), sort_keys=True)}", KEYRATE_HEADER]
    for r in report.rows:
        n = "" if r.N_bit is None else str(r.N_bit)
        nums = [fmt(x) for x in (r.lambda_nm, r.mu0, r.mu1, r.delta_mu, r.sigma_C)]
        lines.append(",".join(nums + [n, fmt(r.Q), fmt(r.chi), fmt(r.Y_eff), r.flag]))
    return "\n".join(lines) + "\n"


def parse_keyrate_report(text):
    """Parse key-rate CSV text back into a :class:`KeyRateReport`."""
    scheme = TogglingScheme()
    for raw in text.splitlines():
        if raw.startswith("# scheme:"):
            scheme = TogglingScheme.from_dict(json.loads(raw[len("# scheme:"):]))
    lines = iter_data_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("missing header") from None
    if header != KEYRATE_HEADER:
        raise ParseError(f"malformed header {header!r}", lineno)
    rows = []
    for lineno, line in lines:
        cells = line.split(",")
        if len(cells) != 10:
            raise ParseError(f"expected 10 fields, found {len(cells)}", lineno)
        nums = [parse_numeral(c) for c in cells[:5] + cells[6:9]]
        if any(v is None for v in nums):
            raise ParseError("malformed numeric field", lineno)
        if cells[5] == "":
            N = None
        elif cells[5].isdigit():
            N = int(cells[5])
        else:
            raise ParseError("malformed N_bit", lineno)
        rows.append(KeyRateRow(*nums[:5], N, *nums[5:], cells[9]))
    return KeyRateReport(tuple(rows), scheme)


def save_keyrate_report(report, path):
    return atomic_write_text(path, format_keyrate_report(report))


def load_keyrate_report(path):
    return parse_keyrate_report(Path(path).read_text(encoding="utf-8"))
