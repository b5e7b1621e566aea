"""Reduced three-resonance nonlinear-response model.

The signal field in each polarization channel is a coherent sum of one
single-exciton resonance (X, positive sign) and two biexciton
excited-state-absorption resonances (``par`` and ``perp``, negative sign)::

    E_j = A_jX L_X - A_j,par L_par - A_j,perp L_perp

Each complex line shape ``L_n`` is a Gaussian absorptive profile ``G0``
plus ``i`` times its dispersive quadrature ``G0 * erfi(y_n)``, rotated by
the correlation phase ``phi_n``. The rotation is ``exp(+i phi)`` for the
rephasing pathway and ``exp(-i phi)`` for the non-rephasing one.

Energies and widths are in eV, delays in fs, wavelengths in nm.
"""

from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from ._io import atomic_write_text, fmt, iter_data_lines, parse_numeral
from .errors import ConfigError, DomainError, ParseError
from .numerics import HBAR_EV_FS, scaled_erfi, wavelength_to_energy
from .qstate import bloch_from_fields
from .signal import SignalGrid

__all__ = [
    "RESONANCES",
    "BIEXCITONS",
    "PATHWAYS",
    "ModelParams",
    "AmplitudeSet",
    "spectral_overlap",
    "base_lineshape",
    "memory_function",
    "phase_rotation",
    "rotated_lineshape",
    "lineshape",
    "synthesize_field",
    "r_int_squared",
    "self_polarization_residual",
    "interference_map",
    "interference_panels",
    "format_map_panel",
    "parse_map_panel",
]

RESONANCES = ("X", "par", "perp")
BIEXCITONS = ("par", "perp")
PATHWAYS = ("rephasing", "non-rephasing", "combined")
_SIGNS = {"X": 1.0, "par": -1.0, "perp": -1.0}


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the three-resonance model.

    Defaults are the fitted material values; the linewidths are read as eV
    (``width_unit='meV'`` in :meth:`from_dict` selects the literal reading).
    ``kappa_X`` correlates the pumped exciton transition with itself and
    defaults to full correlation.
    """

    E_X: float = 2.39
    E_XXpar: float = 2.45
    E_XXperp: float = 2.38
    Delta_X: float = 0.023
    Delta_XXpar: float = 0.073
    Delta_XXperp: float = 0.038
    kappa_par: float = 0.39
    kappa_perp: float = 0.47
    kappa_X: float = 1.0
    Lambda_inv: float = 100.0
    t_spin: float = 100.0
    alpha0_par: float = -0.37
    alpha0_perp: float = -0.26
    beta0_par: float = 1.00
    beta0_perp: float = 0.46
    pathway: str = "non-rephasing"

    def __post_init__(self):
        for name in ("Delta_X", "Delta_XXpar", "Delta_XXperp", "Lambda_inv", "t_spin"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive, got {value}")
        for name in ("kappa_par", "kappa_perp", "kappa_X"):
            if abs(getattr(self, name)) > 1:
                raise DomainError(f"|{name}| must not exceed 1")
        for f in fields(self):
            if f.name != "pathway" and not np.isfinite(getattr(self, f.name)):
                raise DomainError(f"{f.name} must be finite")
        if self.pathway not in PATHWAYS:
            raise DomainError(f"pathway must be one of {PATHWAYS}, got {self.pathway!r}")

    def energy(self, n):
        return {"X": self.E_X, "par": self.E_XXpar, "perp": self.E_XXperp}[n]

    def width(self, n):
        return {"X": self.Delta_X, "par": self.Delta_XXpar, "perp": self.Delta_XXperp}[n]

    def kappa(self, n):
        return {"X": self.kappa_X, "par": self.kappa_par, "perp": self.kappa_perp}[n]

    def alpha0(self, b):
        return {"par": self.alpha0_par, "perp": self.alpha0_perp}[b]

    def beta0(self, b):
        return {"par": self.beta0_par, "perp": self.beta0_perp}[b]

    def xi(self, b):
        """Spectral-overlap parameter of the exciton and biexciton ``b``."""
        return spectral_overlap(self.E_X, self.energy(b), self.Delta_X, self.width(b))

    def with_xi(self, b, xi):
        """Copy with ``E_XX_b`` moved so that ``xi(b) == xi``; widths unchanged."""
        side = 1.0 if self.energy(b) >= self.E_X else -1.0
        E_b = self.E_X + side * xi * np.sqrt(2 * self.Delta_X * self.width(b))
        return replace(self, **{"E_XXpar" if b == "par" else "E_XXperp": float(E_b)})

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        """Build from a JSON-style mapping; unknown keys are rejected."""
        data = dict(data)
        unit = data.pop("width_unit", "eV")
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown ModelParams keys: {sorted(extra)}")
        if unit == "meV":
            for name in ("Delta_X", "Delta_XXpar", "Delta_XXperp"):
                if name in data:
                    data[name] = data[name] / 1000.0
        elif unit != "eV":
            raise ConfigError(f"width_unit must be 'eV' or 'meV', got {unit!r}")
        return cls(**data)


@dataclass(frozen=True)
class AmplitudeSet:
    """Resonance amplitudes ``A_{j,n}`` at ``T = 0`` for each channel.

    Horizontal amplitudes decay as ``exp(-T/t_spin)``; vertical amplitudes
    are constant.
    """

    H0: dict = field(default_factory=dict)
    V0: dict = field(default_factory=dict)
    t_spin: float = 100.0

    def __post_init__(self):
        for name in ("H0", "V0"):
            amps = {n: float(getattr(self, name).get(n, 0.0)) for n in RESONANCES}
            object.__setattr__(self, name, amps)

    def H(self, n, T):
        return self.H0[n] * np.exp(-np.asarray(T, dtype=float) / self.t_spin)

    def V(self, n, T):
        return self.V0[n] * np.ones_like(np.asarray(T, dtype=float))

    def alpha(self, m, n, T=0.0):
        return self.H(m, T) * self.V(n, T) - self.H(n, T) * self.V(m, T)

    def beta(self, m, n, T=0.0):
        return self.H(m, T) * self.V(n, T) + self.H(n, T) * self.V(m, T)

    @classmethod
    def from_params(cls, params, A_V_X=1.0):
        """Amplitudes reproducing the tabulated exciton-biexciton alpha(0), beta(0).

        For each biexciton ``b`` the pair coefficients fix the products
        ``A_HX A_Vb = (alpha + beta)/2`` and ``A_Hb A_VX = (beta - alpha)/2``.
        With ``A_VX`` given, the remaining freedom is removed by splitting
        the parallel-pair product symmetrically, ``A_HX = A_V,par``.
        """
        H0 = {}
        V0 = {"X": A_V_X}
        for b in BIEXCITONS:
            H0[b] = 0.5 * (params.beta0(b) - params.alpha0(b)) / A_V_X
        p_par = 0.5 * (params.alpha0("par") + params.beta0("par"))
        H0["X"] = np.sign(p_par) * np.sqrt(abs(p_par))
        for b in BIEXCITONS:
            p = 0.5 * (params.alpha0(b) + params.beta0(b))
            V0[b] = p / H0["X"] if H0["X"] != 0 else 0.0
        return cls(H0, V0, params.t_spin)

    def to_dict(self):
        return {"H0": dict(self.H0), "V0": dict(self.V0), "t_spin": self.t_spin}

    @classmethod
    def from_dict(cls, data, t_spin):
        return cls(dict(data.get("H0", {})), dict(data.get("V0", {})), float(data.get("t_spin", t_spin)))


def spectral_overlap(E_X, E_XXB, Delta_X, Delta_XXB):
    """Dimensionless overlap ``|E_XXB - E_X| / sqrt(2 Delta_X Delta_XXB)``."""
    if not (Delta_X > 0 and Delta_XXB > 0):
        raise DomainError("linewidths must be positive")
    return abs(E_XXB - E_X) / np.sqrt(2.0 * Delta_X * Delta_XXB)


def base_lineshape(tau, E_pr, E_n, Delta_X, Delta_n):
    """Absorptive profile ``G0`` and dispersive quadrature ``G0 * erfi(y_n)``.

    The quadrature is formed from ``exp(-y^2) erfi(y)`` directly so it stays
    finite far from resonance.
    """
    if not (np.all(np.asarray(Delta_X) > 0) and np.all(np.asarray(Delta_n) > 0)):
        raise DomainError("linewidths must be positive")
    tau = np.asarray(tau, dtype=float)
    y = (np.asarray(E_pr, dtype=float) - E_n) / (np.sqrt(2.0) * Delta_n)
    coherence = np.exp(-(Delta_X**2) * tau**2 / (2 * HBAR_EV_FS**2))
    G0 = coherence * np.exp(-(y**2))
    G0_tilde = coherence * scaled_erfi(y)
    return G0, G0_tilde


def memory_function(T, Lambda_inv):
    """Spectral-diffusion memory ``exp(-T / Lambda_inv)``."""
    return np.exp(-np.asarray(T, dtype=float) / Lambda_inv)


def phase_rotation(tau, T, E_pr, E_n, kappa, Lambda_inv):
    """Correlation phase ``kappa (E_pr - E_n) M(T) tau / hbar`` in radians."""
    return kappa * (np.asarray(E_pr, dtype=float) - E_n) * memory_function(T, Lambda_inv) * np.asarray(tau, dtype=float) / HBAR_EV_FS


def rotated_lineshape(G0, G0_tilde, phi, pathway="non-rephasing"):
    """Complex line shape ``G_mp + i G~_pm`` after the correlation rotation.

    Upper signs (rephasing) give ``G0 cos - G~0 sin`` and ``G~0 cos + G0 sin``;
    lower signs (non-rephasing) flip both sine terms.
    """
    if pathway == "rephasing":
        sign = 1.0
    elif pathway == "non-rephasing":
        sign = -1.0
    else:
        raise DomainError(f"rotated_lineshape needs a single pathway, got {pathway!r}")
    c, s = np.cos(phi), np.sin(phi)
    absorptive = G0 * c - sign * G0_tilde * s
    dispersive = G0_tilde * c + sign * G0 * s
    return absorptive + 1j * dispersive


def lineshape(params, n, tau, T, E_pr, pathway=None):
    """Rotated line shape of resonance ``n`` for one pathway."""
    pathway = pathway or params.pathway
    G0, G0_tilde = base_lineshape(tau, E_pr, params.energy(n), params.Delta_X, params.width(n))
    phi = phase_rotation(tau, T, E_pr, params.energy(n), params.kappa(n), params.Lambda_inv)
    return rotated_lineshape(G0, G0_tilde, phi, pathway)


def synthesize_field(params, amps, axes, pathway=None, meta=None):
    """Synthesize H/V signal fields on ``axes`` from the resonance model.

    ``pathway='combined'`` sums the rephasing and non-rephasing responses
    after multiplying them by ``exp(-i E_X tau/hbar)`` and
    ``exp(+i E_X tau/hbar)`` respectively, which restores the optical-cycle
    modulation along ``tau`` that a single rotating-frame pathway lacks.
    This carrier assignment is a model extension.
    """
    pathway = pathway or params.pathway
    if pathway not in PATHWAYS:
        raise DomainError(f"unknown pathway {pathway!r}")
    tau, T, lam = axes.meshgrid()
    E_pr = wavelength_to_energy(lam)

    if pathway == "combined":
        carrier = np.exp(-1j * params.E_X * tau / HBAR_EV_FS)
        L = {
            n: lineshape(params, n, tau, T, E_pr, "rephasing") * carrier
            + lineshape(params, n, tau, T, E_pr, "non-rephasing") * np.conj(carrier)
            for n in RESONANCES
        }
    else:
        L = {n: lineshape(params, n, tau, T, E_pr, pathway) for n in RESONANCES}

    S_H = sum(_SIGNS[n] * amps.H(n, T) * L[n] for n in RESONANCES)
    S_V = sum(_SIGNS[n] * amps.V(n, T) * L[n] for n in RESONANCES)
    info = {"source": "synthesize_field", "pathway": pathway}
    info.update(meta or {})
    return SignalGrid(axes, S_H, S_V, info)


def _scaled_w(y, phi, sign):
    """``exp(-y^2) * W_n`` with ``W_n = (1 + i erfi y) exp(i sign phi)``."""
    g = np.exp(-(y**2))
    d = scaled_erfi(y)
    c, s = np.cos(phi), np.sin(phi)
    return (g * c - sign * d * s) + 1j * (d * c + sign * g * s)


def r_int_squared(params, E_pr, tau, T, pairs=BIEXCITONS, pathway=None):
    """Unnormalized interference contribution ``|r_int|^2``.

    Sums the exciton-biexciton pairs in ``pairs`` using the T = 0 pair
    coefficients and the explicit ``exp(-2T/t_spin)`` spin factor. The
    squared Gaussian spectral factors are folded into the scaled ``W``
    functions, which keeps the result finite for any detuning.
    """
    pathway = pathway or params.pathway
    if pathway == "rephasing":
        sign = 1.0
    elif pathway == "non-rephasing":
        sign = -1.0
    else:
        raise DomainError(f"interference model needs a single pathway, got {pathway!r}")
    E_pr = np.asarray(E_pr, dtype=float)
    T = np.asarray(T, dtype=float)

    def w(n):
        y = (E_pr - params.energy(n)) / (np.sqrt(2.0) * params.width(n))
        phi = phase_rotation(tau, T, E_pr, params.energy(n), params.kappa(n), params.Lambda_inv)
        return _scaled_w(y, phi, sign)

    w_X = w("X")
    total = 0.0
    for b in pairs:
        prod = np.conj(w_X) * w(b)
        total = total + params.alpha0(b) ** 2 * prod.imag**2 + params.beta0(b) ** 2 * prod.real**2
    return total * np.exp(-2.0 * T / params.t_spin)


def self_polarization_residual(params, amps, E_pr, tau, T, pathway=None):
    """Diagnostic ``|r|^2 - |r_int|^2`` at a single point.

    ``|r|^2`` comes from synthesized fields (unity for any bright point)
    and ``|r_int|^2`` is the unnormalized interference term, so only relative
    changes of this residual carry meaning.
    """
    pathway = pathway or params.pathway
    L = {n: lineshape(params, n, tau, T, E_pr, pathway) for n in RESONANCES}
    S_H = sum(_SIGNS[n] * amps.H(n, T) * L[n] for n in RESONANCES)
    S_V = sum(_SIGNS[n] * amps.V(n, T) * L[n] for n in RESONANCES)
    r = bloch_from_fields(S_H, S_V)
    return float(np.sum(r**2)) - float(r_int_squared(params, E_pr, tau, T, pathway=pathway))


def _sweep(xi_range, tnorm_range, grid_density):
    if isinstance(grid_density, int):
        n_xi = n_t = grid_density
    else:
        n_xi, n_t = grid_density
    if n_xi < 1 or n_t < 1:
        raise DomainError("grid_density must be positive")
    xi_lo, xi_hi = xi_range
    t_lo, t_hi = tnorm_range
    if xi_hi < xi_lo or t_hi < t_lo:
        raise DomainError("sweep ranges must satisfy lo <= hi")
    return np.linspace(xi_lo, xi_hi, n_xi), np.linspace(t_lo, t_hi, n_t)


def _raw_map(params, E_pr, tau, xi, tnorm, pairs):
    out = np.zeros((xi.size, tnorm.size))
    T = tnorm * params.t_spin
    for b in pairs:
        for i, x in enumerate(xi):
            p = params.with_xi(b, x)
            out[i] += r_int_squared(p, E_pr, tau, T, pairs=(b,))
    return out


def interference_map(params, E_pr, tau, Xi_range=(0.0, 3.0), Tnorm_range=(0.0, 3.0),
                     grid_density=200, pairs=BIEXCITONS, squared=False):
    """Normalized interference map over spectral overlap and ``T / t_spin``.

    Each biexciton in ``pairs`` is moved to the swept overlap ``Xi`` with both
    widths held fixed. Returns ``(Xi, Tnorm, values)`` with ``values`` of
    shape ``(len(Xi), len(Tnorm))``, holding ``|r_int|`` (or ``|r_int|^2``
    when ``squared``) scaled so the map maximum is 1. An all-zero map is
    returned unscaled.
    """
    xi, tnorm = _sweep(Xi_range, Tnorm_range, grid_density)
    raw = _raw_map(params, E_pr, tau, xi, tnorm, pairs)
    vals = raw if squared else np.sqrt(raw)
    peak = vals.max()
    return xi, tnorm, vals / peak if peak > 0 else vals


def interference_panels(params, wavelengths_nm=(500.0, 520.0, 540.0), taus_fs=(0.0, 10.0),
                        Xi_range=(0.0, 3.0), Tnorm_range=(0.0, 3.0), grid_density=200,
                        pairs=BIEXCITONS, squared=False):
    """Maps for every (wavelength, tau) panel under one shared normalization.

    Returns ``(Xi, Tnorm, panels)`` where ``panels`` maps
    ``(lambda_nm, tau_fs)`` to a value array; the largest cell over all
    panels is exactly 1.
    """
    if not wavelengths_nm or not taus_fs:
        raise DomainError("at least one wavelength and one tau are required")
    xi, tnorm = _sweep(Xi_range, Tnorm_range, grid_density)
    panels = {}
    for lam in wavelengths_nm:
        E_pr = wavelength_to_energy(lam)
        for tau in taus_fs:
            raw = _raw_map(params, E_pr, tau, xi, tnorm, pairs)
            panels[(float(lam), float(tau))] = raw if squared else np.sqrt(raw)
    peak = max(v.max() for v in panels.values())
    if peak > 0:
        panels = {k: v / peak for k, v in panels.items()}
    return xi, tnorm, panels


MAP_HEADER = "Xi,T_over_tspin,value"


def format_map_panel(xi, tnorm, values, lam_nm, tau_fs, params=None):
    """Long-form CSV for one panel, preceded by a panel header comment."""
    lines = [f"# panel: lambda_nm={fmt(lam_nm)} tau_fs={fmt(tau_fs)}"]
    if params is not None:
        lines.append(f"# pathway: {params.pathway}")
        lines.append(f"# xi_par: {fmt(params.xi('par'))} xi_perp: {fmt(params.xi('perp'))}")
    lines.append(MAP_HEADER)
    for i, x in enumerate(xi):
        for j, t in enumerate(tnorm):
            lines.append(f"{fmt(x)},{fmt(t)},{fmt(values[i, j])}")
    return "\n".join(lines) + "\n"


def parse_map_panel(text):
    """Parse a panel CSV into ``(Xi, Tnorm, values, header)``.

    ``header`` holds the ``lambda_nm`` and ``tau_fs`` from the panel comment.
    """
    header = {}
    for raw in text.splitlines():
        if raw.startswith("# panel:"):
            for item in raw[len("# panel:"):].split():
                key, _, value = item.partition("=")
                header[key] = float(value)
    lines = iter_data_lines(text)
    try:
        lineno, first = next(lines)
    except StopIteration:
        raise ParseError("missing header") from None
    if first != MAP_HEADER:
        raise ParseError(f"malformed header {first!r}", lineno)
    rows = []
    for lineno, line in lines:
        vals = [parse_numeral(c) for c in line.split(",")]
        if len(vals) != 3 or any(v is None for v in vals):
            raise ParseError("malformed row", lineno)
        rows.append(vals)
    if not rows:
        raise ParseError("no map cells")
    data = np.array(rows)
    xi, ix = np.unique(data[:, 0], return_inverse=True)
    tn, it = np.unique(data[:, 1], return_inverse=True)
    if xi.size * tn.size != len(rows):
        raise ParseError("map cells do not tile the Xi x T grid")
    values = np.full((xi.size, tn.size), np.nan)
    values[ix, it] = data[:, 2]
    return xi, tn, values, header


def save_map_panel(path, *args, **kwargs):
    return atomic_write_text(path, format_map_panel(*args, **kwargs))
