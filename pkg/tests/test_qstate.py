import math

import numpy as np
import pytest

from fwmsec.errors import ConfigError, DarkPointError, DomainError, ValidationError
from fwmsec.numerics import binary_entropy
from fwmsec.qstate import (
    DensityMatrix2,
    bloch_from_fields,
    density_from_bloch,
    density_from_state,
    ensemble_average,
    format_bloch_points,
    format_ensemble_reports,
    grid_bloch_vectors,
    holevo_bound,
    holevo_expansion,
    parse_bloch_points,
    parse_ensemble_reports,
    state_from_fields,
    von_neumann_entropy,
    windowed_holevo_report,
)
from fwmsec.signal import GridAxes, SignalGrid

S2 = 1 / math.sqrt(2)


def eig_entropy(rho):
    """Oracle: entropy from numpy's iterative Hermitian eigensolver."""
    w = np.clip(np.linalg.eigvalsh(rho), 0, 1)
    return float(-sum(x * math.log2(x) for x in w if x > 0))


def random_jones(rng, k):
    v = rng.normal(size=(k, 2)) + 1j * rng.normal(size=(k, 2))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# --- states


@pytest.mark.parametrize(
    "fields, bloch",
    [((1, 0), (0, 0, 1)), ((S2, S2), (1, 0, 0)), ((S2, 1j * S2), (0, -1, 0))],
)
def test_state_fixtures(fields, bloch):
    s = state_from_fields(*fields)
    assert np.max(np.abs(np.array(s.bloch) - bloch)) <= 1e-12


def test_state_normalization(rng):
    for S_H, S_V in rng.normal(size=(50, 2)) * 7 + 1j * rng.normal(size=(50, 2)):
        s = state_from_fields(S_H, S_V)
        assert abs(abs(s.e_H) ** 2 + abs(s.e_V) ** 2 - 1) <= 1e-12
        assert abs(np.linalg.norm(s.bloch) - 1) <= 1e-10
        cross = s.e_H * np.conj(s.e_V)
        expected = (2 * cross.real, 2 * cross.imag, abs(s.e_H) ** 2 - abs(s.e_V) ** 2)
        assert np.max(np.abs(np.array(s.bloch) - expected)) <= 1e-12


def test_dark_state():
    with pytest.raises(DarkPointError):
        state_from_fields(0, 0)
    assert np.all(np.isnan(bloch_from_fields(0, 0)))


# --- density matrices and entropy


def test_density_fixtures():
    assert np.allclose(density_from_state(state_from_fields(1, 0)).matrix, np.diag([1, 0]), atol=1e-15)
    assert np.allclose(density_from_state(state_from_fields(S2, S2)).matrix, 0.5, atol=1e-15)
    # psi psi^dagger for psi = (1, i)/sqrt(2)
    rho = density_from_state(state_from_fields(S2, 1j * S2)).matrix
    assert np.allclose(rho, [[0.5, -0.5j], [0.5j, 0.5]], atol=1e-15)


def test_density_from_bloch_matches_projector(rng):
    for psi in random_jones(rng, 100):
        s = state_from_fields(*psi)
        a = density_from_state(s).matrix
        b = density_from_bloch(s.bloch).matrix
        assert np.max(np.abs(a - b)) <= 1e-14
        assert np.max(np.abs(a @ a - a)) <= 1e-12
        assert np.allclose(density_from_state(s).bloch, s.bloch, atol=1e-14)


def test_density_validation():
    with pytest.raises(ValidationError):
        DensityMatrix2([[0.5, 0.1], [0.2, 0.5]])
    with pytest.raises(ValidationError):
        DensityMatrix2(np.diag([0.6, 0.6]))
    with pytest.raises(ValidationError):
        DensityMatrix2(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError):
        DensityMatrix2(np.eye(3) / 3)
    rho = DensityMatrix2(np.diag([1 + 5e-13, -5e-13]))
    assert rho.eigenvalues() == (0.0, 1.0)


def test_entropy_fixtures():
    assert von_neumann_entropy(density_from_bloch((0, 0, 1))) == 0.0
    assert von_neumann_entropy(np.eye(2) / 2) == 1.0
    rho = density_from_bloch((0.7071, 0, 0))
    assert von_neumann_entropy(rho) == pytest.approx(0.60098, abs=1e-4)
    assert von_neumann_entropy(rho) == pytest.approx(0.6008847, abs=1e-7)
    assert von_neumann_entropy(rho) == pytest.approx(eig_entropy(rho.matrix), abs=1e-12)


def test_entropy_matches_bloch_form(rng):
    for _ in range(1000):
        r = rng.normal(size=3)
        r *= rng.uniform() / np.linalg.norm(r)
        rho = density_from_bloch(r)
        h = binary_entropy((1 + np.linalg.norm(r)) / 2)
        assert abs(von_neumann_entropy(rho) - h) <= 1e-12


# --- ensembles


def test_ensemble_fixtures():
    s = state_from_fields(0.3, 0.4j)
    r_bar, _ = ensemble_average([s] * 5)
    assert np.allclose(r_bar, s.bloch, atol=1e-15)
    assert holevo_bound([s] * 5) == 0.0
    r_bar, _ = ensemble_average([state_from_fields(1, 0), state_from_fields(0, 1)])
    assert np.all(r_bar == 0)
    r_bar, rho = ensemble_average([state_from_fields(1, 0), state_from_fields(S2, S2)])
    assert np.allclose(r_bar, (0.5, 0, 0.5), atol=1e-15)
    assert np.linalg.norm(r_bar) == pytest.approx(0.70711, abs=1e-5)
    assert rho.matrix.shape == (2, 2)


def test_ensemble_errors():
    with pytest.raises(ValidationError):
        ensemble_average([])
    with pytest.raises(ValidationError):
        ensemble_average(np.zeros((2, 3)), weights=[0.2, 0.2])
    with pytest.raises(ValidationError):
        ensemble_average(np.zeros((2, 3)), weights=[1.5, -0.5])


def test_ensemble_order_independent(rng):
    r = bloch_from_fields(*random_jones(rng, 64).T)
    a, _ = ensemble_average(r)
    b, _ = ensemble_average(r[rng.permutation(64)])
    assert np.max(np.abs(a - b)) <= 1e-12


def test_weighted_ensemble():
    r = np.array([[0, 0, 1.0], [0, 0, -1.0]])
    r_bar, _ = ensemble_average(r, weights=[0.75, 0.25])
    assert np.allclose(r_bar, (0, 0, 0.5))
    assert holevo_bound(r, weights=[0.75, 0.25]) == pytest.approx(binary_entropy(0.75), abs=1e-15)


def test_holevo_fixtures():
    assert holevo_bound([state_from_fields(1, 1j)] * 3) == 0.0
    assert holevo_bound([state_from_fields(1, 0), state_from_fields(0, 1)]) == 1.0
    chi = holevo_bound([state_from_fields(1, 0), state_from_fields(S2, S2)])
    # h2((1 + 1/sqrt(2))/2) from a 30-digit mpmath evaluation
    assert chi == pytest.approx(0.600876, abs=1e-4)


def test_holevo_mixed_members():
    # two mixed states along z: chi = S(mean) - mean S(member)
    r = np.array([[0, 0, 0.5], [0, 0, -0.5]])
    expected = 1.0 - binary_entropy(0.75)
    assert holevo_bound(r) == pytest.approx(expected, abs=1e-15)


def test_holevo_matches_eigen_oracle(rng):
    for _ in range(500):
        k = rng.integers(1, 65)
        psi = random_jones(rng, k)
        rho_bar = np.einsum("ki,kj->ij", psi, psi.conj()) / k
        chi = holevo_bound(bloch_from_fields(*psi.T))
        assert abs(chi - eig_entropy(rho_bar)) <= 1e-12


def test_bloch_ball_convexity(rng):
    for _ in range(200):
        k = rng.integers(1, 20)
        r = rng.normal(size=(k, 3))
        r *= (rng.uniform(size=k) / np.linalg.norm(r, axis=1))[:, None]
        r_bar, _ = ensemble_average(r)
        assert np.linalg.norm(r_bar) <= np.max(np.linalg.norm(r, axis=1)) + 1e-15


def test_unitary_invariance(rng):
    psi = random_jones(rng, 32)
    chi = holevo_bound(bloch_from_fields(*psi.T))
    for _ in range(100):
        U = random_unitary(rng)
        rotated = psi @ U.T
        assert abs(holevo_bound(bloch_from_fields(*rotated.T)) - chi) <= 1e-10


# --- expansion


def test_expansion_fixtures():
    assert holevo_expansion(0.0) == 1.0
    assert holevo_expansion(0.1) == pytest.approx(0.992775, abs=1e-6)
    exact = binary_entropy(0.55)
    assert abs(holevo_expansion(0.1) - exact) < 1e-6
    assert abs(holevo_expansion(0.5) - binary_entropy(0.75)) <= 0.016


def test_expansion_bound_sweep():
    r = np.linspace(0, 0.5, 1000)
    exact = binary_entropy((1 + r) / 2)
    assert np.all(np.abs(exact - holevo_expansion(r)) <= r**6 + 1e-15)


@pytest.mark.parametrize("bad", [1.0, 1.2, -0.1, np.nan])
def test_expansion_domain(bad):
    with pytest.raises(DomainError):
        holevo_expansion(bad)


# --- windowed reports


def two_point_grid():
    axes = GridAxes([0.0, 10.0], [0.0], [540.0])
    return SignalGrid(axes, [[[1.0]], [[S2]]], [[[0.0]], [[S2]]])


def test_windowed_two_point():
    (comp,) = windowed_holevo_report(two_point_grid(), [(540.0, 540.0)], tau0=0.0)
    assert comp.full.chi == pytest.approx(0.601, abs=1e-3)
    assert comp.full.count == 2
    assert comp.reduced.chi == 0.0
    assert comp.reduced.count == 1
    assert comp.delta_chi == pytest.approx(0.601, abs=1e-3)
    assert comp.full.chi == pytest.approx(binary_entropy((1 + comp.full.r_norm) / 2), abs=1e-12)


def test_windowed_identical_states():
    axes = GridAxes([0.0, 1.0, 2.0], [0.0, 50.0], [500.0, 501.0, 502.0])
    g = SignalGrid(axes, np.full(axes.shape, 0.3 + 0.1j), np.full(axes.shape, 0.2j))
    (comp,) = windowed_holevo_report(g, [(500.0, 502.0)])
    assert comp.full.chi == pytest.approx(0.0, abs=1e-12)
    assert comp.reduced.chi == pytest.approx(0.0, abs=1e-12)
    assert comp.delta_chi == pytest.approx(0.0, abs=1e-12)


def test_windowed_errors_and_skips(caplog):
    g = two_point_grid()
    with pytest.raises(ConfigError):
        windowed_holevo_report(g, [(540.0, 540.0)], tau0=5.0)
    with pytest.raises(ConfigError):
        windowed_holevo_report(g, [(535.0, 545.0)])
    with pytest.raises(ConfigError):
        windowed_holevo_report(g, [(600.0, 610.0)])
    axes = GridAxes([0.0], [0.0], [500.0, 540.0])
    dim = SignalGrid(axes, [[[1.0, 0.0]]], [[[0.0, 0.0]]])
    comps = windowed_holevo_report(dim, [(500.0, 500.0), (530.0, 540.0)])
    assert [c.window for c in comps] == [(500.0, 500.0)]
    assert "no unmasked points" in caplog.text


def test_windowed_on_default_grid(default_grid):
    comps = windowed_holevo_report(default_grid, [(495, 505), (515, 525), (535, 545)])
    assert len(comps) == 3
    for c in comps:
        assert 0 <= c.reduced.chi <= 1 and 0 <= c.full.chi <= 1
        assert c.full.count == 51 * 51 * 11 and c.reduced.count == 51 * 11
        assert c.full.r_norm <= 1 + 1e-12


def test_report_csv_round_trip(default_grid):
    comps = windowed_holevo_report(default_grid, [(495, 505), (535, 545)])
    text = format_ensemble_reports(comps)
    assert "uncertainty" in text
    back = parse_ensemble_reports(text)
    assert back == comps
    assert [ln.split(",")[2] for ln in text.splitlines() if not ln.startswith("#")][1:] == [
        "full", "reduced", "delta_chi", "full", "reduced", "delta_chi"
    ]


def test_bloch_points(default_grid):
    text = format_bloch_points(default_grid)
    pts = parse_bloch_points(text)
    assert pts.shape == (51 * 51 * 61, 6)
    assert np.max(np.abs(np.sum(pts[:, 3:] ** 2, axis=1) - 1)) <= 1e-10


def test_purity_of_synthetic_grid(default_grid):
    r, dark = grid_bloch_vectors(default_grid)
    norms = np.linalg.norm(r[~dark], axis=-1)
    assert np.max(np.abs(norms - 1)) <= 1e-10
