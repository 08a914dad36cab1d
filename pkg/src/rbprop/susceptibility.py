"""Stationary susceptibility of the driven three-level Raman medium.

The closed-form steady state is evaluated in gamma units (gamma = 1 inside the
formula).  An independent oracle obtains the same quantity by propagating the
density-matrix equations of motion to their fixed point with an exact
matrix-exponential stepper, which is used to cross-validate the closed form.

The thermal average over the Maxwellian distribution of Doppler shifts is a
weighted sum over velocity nodes.  Two quadrature builders are provided:

* ``build_velocity_quadrature`` -- Gauss-Hermite nodes mapped by kv = sqrt(2) D t.
  Accurate whenever the integrand is smooth on the scale of the node spacing.
* ``build_resolved_quadrature`` -- panelised Gauss-Legendre rule with panels
  clustered around kv = +-|delta_p|.  Atoms Doppler-shifted into one-photon
  resonance form a narrow feature there (a few gamma wide) that Gauss-Hermite
  cannot resolve at any practical node count; the panel rule integrates it to
  near machine accuracy and is the default used by the solver.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm
from scipy.special import roots_hermite

from .params import PhysicalParams, prefactor_over_gamma

DENOMINATOR_FLOOR = 1.0e-30


class DegenerateParameterError(ValueError):
    """The susceptibility denominator vanished (all drives off, no dephasing)."""


class OracleConvergenceError(RuntimeError):
    """The density-matrix propagation did not reach a fixed point."""

    def __init__(self, residual: float, message: str = ""):
        self.residual = residual
        super().__init__(message or f"steady state not reached, residual {residual:.3e}")


class FieldPoint(NamedTuple):
    """Local squared Rabi amplitudes |g|^2 and |G|^2, in gamma^2 units."""

    g_abs2: float
    G_abs2: float


def chi_ratio(g_abs2, G_abs2, delta_p, delta_c, big_gamma):
    """Susceptibility ratio (numerator over denominator) in gamma units.

    This is the steady-state coherence rho_12 divided by the probe Rabi
    amplitude g; multiplying by the dimensionless dipole prefactor gives chi.
    Accepts scalars or broadcastable arrays.  Entries with G_abs2 == 0 return
    exactly 0 (the numerator carries an overall |G|^2 factor and the medium is
    pumped fully into the control-arm ground state).

    The |G|^4 cross term in the denominator is (Gamma - delta_R * delta_p);
    this is required for consistency with the equations of motion (verified
    against the exact steady state to ~1e-12 over the full parameter range)
    and mirrors the (Gamma + delta_R * delta_c) term of the |g|^4 group under
    probe/control exchange.
    """
    g2 = np.asarray(g_abs2, dtype=float)
    G2 = np.asarray(G_abs2, dtype=float)
    dR = delta_p - delta_c

    num = G2 * (
        (1j * big_gamma - dR) * (G2 + (1.0 - 1j * delta_p) * (big_gamma - 1j * dR))
        + g2 * ((1j * big_gamma - dR) + big_gamma * (delta_c + delta_p))
    )
    den = (
        g2**3
        + g2**2 * (3.0 * G2 * (1.0 + 2.0 * big_gamma)
                   + 2.0 * (big_gamma + dR * delta_c))
        + G2 * ((big_gamma**2 + dR**2) * (1.0 + delta_p**2)
                + 2.0 * G2 * (big_gamma - dR * delta_p)
                + G2**2)
        + g2 * (3.0 * G2**2 * (1.0 + 2.0 * big_gamma)
                + (1.0 + delta_c**2) * (big_gamma**2 + dR**2)
                + (4.0 * big_gamma + 6.0 * big_gamma**2 + 4.0 * dR**2
                   + big_gamma * (delta_c + delta_p)**2) * G2)
    )

    zero_control = G2 == 0.0
    bad = (~zero_control) & (np.abs(den) < DENOMINATOR_FLOOR)
    if np.any(bad):
        g_bad = float(np.broadcast_to(g2, bad.shape)[bad].flat[0]) if bad.shape else float(g2)
        G_bad = float(np.broadcast_to(G2, bad.shape)[bad].flat[0]) if bad.shape else float(G2)
        raise DegenerateParameterError(
            f"susceptibility denominator below {DENOMINATOR_FLOOR:g} at "
            f"g_abs2={g_bad:g}, G_abs2={G_bad:g} "
            f"(delta_p={np.min(delta_p):g}..{np.max(delta_p):g}, "
            f"big_gamma={big_gamma:g})")
    safe_den = np.where(zero_control, 1.0, den)
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.where(zero_control, 0.0 + 0.0j, num / safe_den)
    if out.shape == ():
        return complex(out)
    return out


def chi_stationary(point: FieldPoint, delta_p: float, delta_c: float,
                   big_gamma: float, prefactor: float):
    """Stationary complex susceptibility chi at one field point.

    All frequencies in gamma units; ``prefactor`` is the dimensionless scale
    N |d|^2 / (hbar gamma).
    """
    return prefactor * chi_ratio(point.g_abs2, point.G_abs2,
                                 delta_p, delta_c, big_gamma)


def _affine_generator(g: float, G: float, big_gamma: float,
                      delta_p: float, delta_c: float) -> tuple[np.ndarray, np.ndarray]:
    """Real 8-dim affine generator ydot = A y + b of the equations of motion.

    State ordering: [rho11, rho22, Re rho12, Im rho12, Re rho13, Im rho13,
    Re rho23, Im rho23]; rho33 is eliminated by the trace condition.
    Both decay arms share the rate gamma = 1.
    """
    def rhs(y: np.ndarray) -> np.ndarray:
        r11, r22 = y[0], y[1]
        r12 = y[2] + 1j * y[3]
        r13 = y[4] + 1j * y[5]
        r23 = y[6] + 1j * y[7]
        r33 = 1.0 - r11 - r22
        d11 = -2.0 * r11 + 1j * g * np.conj(r12) + 1j * G * np.conj(r13) \
            - 1j * g * r12 - 1j * G * r13
        d22 = r11 + 1j * g * r12 - 1j * g * np.conj(r12)
        d12 = -(1.0 + 1j * delta_p) * r12 + 1j * g * r22 \
            + 1j * G * np.conj(r23) - 1j * g * r11
        d13 = -(1.0 + 1j * delta_c) * r13 + 1j * g * r23 \
            + 1j * G * r33 - 1j * G * r11
        d23 = -(big_gamma - 1j * (delta_p - delta_c)) * r23 \
            + 1j * g * r13 - 1j * G * np.conj(r12)
        return np.array([d11.real, d22.real, d12.real, d12.imag,
                         d13.real, d13.imag, d23.real, d23.imag])

    b = rhs(np.zeros(8))
    A = np.empty((8, 8))
    for j in range(8):
        e = np.zeros(8)
        e[j] = 1.0
        A[:, j] = rhs(e) - b
    return A, b


@dataclass(frozen=True)
class OracleResult:
    chi: complex
    populations: tuple[float, float, float]
    residual: float
    doublings: int


def steady_state_oracle(point: FieldPoint, delta_p: float, delta_c: float,
                        big_gamma: float, prefactor: float,
                        rhs_tol: float = 1.0e-12,
                        drift_tol: float = 1.0e-10,
                        max_doublings: int = 200,
                        full_result: bool = False):
    """Susceptibility from the density-matrix equations of motion.

    Starting from all population in the control-arm ground state, the affine
    system is propagated by its exact matrix exponential over horizons that
    double until every time derivative falls below ``rhs_tol`` (gamma units)
    and the extracted susceptibility is stationary between horizons.  Returns
    prefactor * rho12 / g; the phase convention agrees with chi_stationary
    directly (verified numerically, no conjugation or sign flip needed).

    Undefined for g = 0 (chi is a response per unit probe amplitude).
    """
    g = float(np.sqrt(point.g_abs2))
    G = float(np.sqrt(point.G_abs2))
    if g == 0.0:
        raise ValueError("steady_state_oracle requires a nonzero probe amplitude")
    A, b = _affine_generator(g, G, big_gamma, delta_p, delta_c)
    M = np.zeros((9, 9))
    M[:8, :8] = A
    M[:8, 8] = b

    # y(0) = 0  (rho33 = 1), so after propagation y(T) is the affine column.
    P = expm(M)
    last_chi = None
    stable = 0
    residual = np.inf
    for doubling in range(max_doublings):
        y = P[:8, 8]
        residual = float(np.max(np.abs(A @ y + b)))
        chi = prefactor * (y[2] + 1j * y[3]) / g
        if residual < rhs_tol:
            if last_chi is not None and \
                    abs(chi - last_chi) <= drift_tol * max(abs(chi), 1e-300):
                stable += 1
                if stable >= 2:
                    pops = (float(y[0]), float(y[1]), float(1.0 - y[0] - y[1]))
                    if full_result:
                        return OracleResult(chi, pops, residual, doubling)
                    return chi
            else:
                stable = 0
            last_chi = chi
        P = P @ P
    raise OracleConvergenceError(residual)


@dataclass(frozen=True)
class VelocityQuadrature:
    """Nodes (kv values, gamma units) and probability weights for <.>_v."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be matching 1-d arrays")
        if np.any(weights < 0):
            raise ValueError("quadrature weights must be non-negative")
        total = weights.sum()
        if not (1.0 - 1e-12 <= total <= 1.0 + 1e-12):
            raise ValueError(f"quadrature weights sum to {total!r}, expected 1")
        if not np.allclose(nodes, -nodes[::-1], atol=1e-9 * (1 + np.abs(nodes).max())):
            raise ValueError("quadrature nodes must be symmetric about zero")

    @property
    def n_nodes(self) -> int:
        return self.nodes.size


def build_velocity_quadrature(doppler_width: float, n_nodes: int = 64) -> VelocityQuadrature:
    """Gauss-Hermite quadrature for the Maxwellian velocity average.

    Nodes are kv = sqrt(2) * D * t with t the Hermite roots, weights are the
    Hermite weights over sqrt(pi), so that sum_i w_i f(kv_i) approximates
    integral P(kv) f(kv) d(kv) with P the normal distribution of width D.
    """
    if n_nodes < 2 or n_nodes % 2 != 0:
        raise ValueError("n_nodes must be an even number >= 2")
    t, w = roots_hermite(n_nodes)
    nodes = np.sqrt(2.0) * doppler_width * t
    weights = w / np.sqrt(np.pi)
    weights = weights / weights.sum()
    return VelocityQuadrature(nodes=nodes, weights=weights)


def build_resolved_quadrature(doppler_width: float, probe_detuning: float,
                              span_sigmas: float = 8.0,
                              points_per_panel: int = 16) -> VelocityQuadrature:
    """Panelised Gauss-Legendre rule resolving the resonant velocity class.

    Panel boundaries are placed symmetrically about zero and clustered around
    kv = +-|delta_p|, where atoms are Doppler-shifted into one-photon
    resonance and the integrand varies on the gamma scale.  Each panel is
    integrated with a fixed-order Legendre rule; the integrand is analytic, so
    per-panel convergence is spectral.  Weights carry the Maxwellian factor
    and are renormalised to sum to one (the +-span_sigmas truncation).
    """
    D = float(doppler_width)
    if D == 0.0:
        nodes = np.zeros(2)
        return VelocityQuadrature(nodes=nodes, weights=np.full(2, 0.5))
    span = span_sigmas * D
    offsets = np.array([0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 45.0, 90.0])
    edges = {-span, 0.0, span}
    center = abs(probe_detuning)
    for s in (-1.0, 1.0):
        for off in offsets:
            for e in (s * (center + off), s * (center - off)):
                if -span < e < span:
                    edges.add(e)
    edges = np.array(sorted(edges))
    t, w = np.polynomial.legendre.leggauss(points_per_panel)
    nodes = []
    weights = []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        kv = mid + half * t
        pw = np.exp(-kv**2 / (2.0 * D * D)) / np.sqrt(2.0 * np.pi * D * D)
        nodes.append(kv)
        weights.append(half * w * pw)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    order = np.argsort(nodes)
    nodes = nodes[order]
    weights = weights[order]
    weights = weights / weights.sum()
    # enforce exact reflection symmetry against rounding in the edge set
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return VelocityQuadrature(nodes=nodes, weights=weights)


def _averaged_ratio_on_arrays(g2: np.ndarray, G2: np.ndarray,
                              delta_p: float, delta_c: float,
                              big_gamma: float,
                              quad: VelocityQuadrature) -> np.ndarray:
    """Velocity-averaged ratio on broadcast arrays, node by node.

    The detunings are scalar within each node, so chi reduces to fixed
    field-power arrays combined with per-node scalar coefficients; the
    denominator coefficients are all real.  Power arrays are hoisted out of
    the node loop.  Points where every drive vanishes are returned as 0.
    """
    bg = big_gamma
    g2, G2 = np.broadcast_arrays(np.asarray(g2, float), np.asarray(G2, float))
    g2sq = g2 * g2
    G2sq = G2 * G2
    g2cu = g2sq * g2
    G2cu = G2sq * G2
    g2G2 = g2 * G2
    g2sqG2 = g2sq * G2
    g2G2sq = g2 * G2sq
    dead = (g2 == 0.0) & (G2 == 0.0)

    acc = np.zeros(g2.shape, dtype=complex)
    for kv, w in zip(quad.nodes, quad.weights):
        dp = delta_p - kv
        dc = delta_c - kv
        dR = dp - dc
        a = 1j * bg - dR
        num = (a * G2sq
               + (a * (1.0 - 1j * dp) * (bg - 1j * dR)) * G2
               + (a + bg * (dc + dp)) * g2G2)
        den = (g2cu
               + (3.0 * (1.0 + 2.0 * bg)) * g2sqG2
               + (2.0 * (bg + dR * dc)) * g2sq
               + ((bg * bg + dR * dR) * (1.0 + dp * dp)) * G2
               + (2.0 * (bg - dR * dp)) * G2sq
               + G2cu
               + (3.0 * (1.0 + 2.0 * bg)) * g2G2sq
               + ((1.0 + dc * dc) * (bg * bg + dR * dR)) * g2
               + (4.0 * bg + 6.0 * bg * bg + 4.0 * dR * dR
                  + bg * (dc + dp) ** 2) * g2G2)
        bad = (np.abs(den) < DENOMINATOR_FLOOR) & ~dead & (G2 != 0.0)
        if np.any(bad):
            raise DegenerateParameterError(
                f"susceptibility denominator below {DENOMINATOR_FLOOR:g} at "
                f"kv={kv:.6g} (G_abs2={float(G2[bad].flat[0]):g})")
        acc += w * (num / np.where(den == 0.0, 1.0, den))
    acc[dead | (G2 == 0.0)] = 0.0
    return acc


def chi_doppler_averaged(point: FieldPoint, params: PhysicalParams,
                         quad: VelocityQuadrature,
                         node_block: int = 64):
    """Thermally averaged susceptibility sum_i w_i chi(delta_p - kv_i, delta_c - kv_i).

    Both one-photon detunings shift by the same kv (equal wavenumbers,
    co-propagating beams), so the two-photon detuning is velocity independent.
    Accepts array-valued field points and returns a matching complex array.
    Large arrays take a hoisted-coefficient fast path; small ones broadcast
    node blocks directly through chi_ratio.
    """
    pref = prefactor_over_gamma(params)
    dp = params.delta_p
    dc = params.delta_c
    g2 = np.asarray(point.g_abs2, dtype=float)
    G2 = np.asarray(point.G_abs2, dtype=float)
    shape = np.broadcast(g2, G2).shape
    if int(np.prod(shape)) > 4096:
        out = pref * _averaged_ratio_on_arrays(g2, G2, dp, dc,
                                               params.big_gamma, quad)
        return out
    acc = np.zeros(shape, dtype=complex)
    g2b = g2[..., None]
    G2b = G2[..., None]
    for start in range(0, quad.nodes.size, node_block):
        kv = quad.nodes[start:start + node_block]
        w = quad.weights[start:start + node_block]
        try:
            block = chi_ratio(g2b, G2b, dp - kv, dc - kv, params.big_gamma)
        except DegenerateParameterError as exc:
            raise DegenerateParameterError(
                f"velocity nodes [{start}:{start + kv.size}]: {exc}") from exc
        acc = acc + (block * w).sum(axis=-1)
    out = pref * acc
    if shape == ():
        return complex(out)
    return out


class TableRefinementError(RuntimeError):
    """The interpolation table could not reach its target accuracy."""


class ChiTable:
    """Bilinear interpolation table for the averaged susceptibility.

    chi depends only on (|G|^2, |g|^2) once the detunings and quadrature are
    fixed, so a run evaluates it through a tensor-product table over
    log-spaced samples of the two squared amplitudes.  The stored quantity is
    chi / |G|^2, which tends to a constant as |G|^2 -> 0; multiplying the
    interpolated value by |G|^2 makes the table exact in the weak-control
    limit and exactly zero at |G|^2 = 0.  Axis densities are chosen
    adaptively by build_chi_table.
    """

    def __init__(self, G_abs2_nodes: np.ndarray, g_abs2_nodes: np.ndarray,
                 params: PhysicalParams, quad: VelocityQuadrature,
                 zero: bool = False):
        self.params = params
        self.quad = quad
        self.zero = zero
        self._G2 = np.asarray(G_abs2_nodes, dtype=float)
        self._g2 = np.asarray(g_abs2_nodes, dtype=float)
        self._fill()

    def _fill(self):
        GG, gg = np.meshgrid(self._G2, self._g2, indexing="ij")
        chi = chi_doppler_averaged(FieldPoint(gg, GG), self.params, self.quad)
        self._h = chi / self._G2[:, None]

    @property
    def G_abs2_max(self) -> float:
        return float(self._G2[-1])

    @property
    def g_abs2_max(self) -> float:
        return float(self._g2[-1])

    @property
    def shape(self) -> tuple[int, int]:
        return self._h.shape

    # relative overshoot absorbed by clamping (integrator stages can nudge
    # a few permille past the range the stepper checked against)
    OVERSHOOT = 0.05

    def __call__(self, G_abs2, g_abs2):
        """Interpolated averaged chi; clamps below the node floors."""
        G2q = np.asarray(G_abs2, dtype=float)
        g2q = np.asarray(g_abs2, dtype=float)
        if self.zero:
            out = np.zeros(np.broadcast(G2q, g2q).shape, dtype=complex)
            return complex(out) if out.shape == () else out
        if np.any(G2q > self._G2[-1] * (1 + self.OVERSHOOT)) or \
           np.any(g2q > self._g2[-1] * (1 + self.OVERSHOOT)):
            raise ValueError("query outside the tabulated amplitude range")
        Gc = np.clip(G2q, self._G2[0], self._G2[-1])
        gc = np.clip(g2q, self._g2[0], self._g2[-1])
        iG = np.clip(np.searchsorted(self._G2, Gc) - 1, 0, self._G2.size - 2)
        ig = np.clip(np.searchsorted(self._g2, gc) - 1, 0, self._g2.size - 2)
        G1, G2v = self._G2[iG], self._G2[iG + 1]
        g1, g2v = self._g2[ig], self._g2[ig + 1]
        tG = (Gc - G1) / (G2v - G1)
        tg = (gc - g1) / (g2v - g1)
        h = (self._h[iG, ig] * (1 - tG) * (1 - tg)
             + self._h[iG + 1, ig] * tG * (1 - tg)
             + self._h[iG, ig + 1] * (1 - tG) * tg
             + self._h[iG + 1, ig + 1] * tG * tg)
        out = np.where(G2q <= 0.0, 0.0 + 0.0j, G2q * h)
        if out.shape == ():
            return complex(out)
        return out

    def direct(self, G_abs2, g_abs2):
        """Un-tabulated evaluation with the table's own quadrature."""
        return chi_doppler_averaged(FieldPoint(g_abs2, G_abs2),
                                    self.params, self.quad)

    def max_relative_error(self, n_probes: int = 1000, seed: int = 0) -> float:
        """Max relative interpolation error on a seeded log-uniform probe set."""
        rng = np.random.default_rng(seed)
        G2q = np.exp(rng.uniform(np.log(self._G2[0]), np.log(self._G2[-1]), n_probes))
        g2q = np.exp(rng.uniform(np.log(self._g2[0]), np.log(self._g2[-1]), n_probes))
        approx = self(G2q, g2q)
        exact = self.direct(G2q, g2q)
        return float(np.max(np.abs(approx - exact) / np.abs(exact)))

    def _axis_midpoint_error(self, axis: int) -> float:
        """Worst relative interpolation error at cell midpoints of one axis.

        Midpoints are where bilinear interpolation is worst; measuring each
        axis separately sizes the refinement anisotropically.
        """
        if axis == 0:
            Gq = np.sqrt(self._G2[:-1] * self._G2[1:])
            gq = self._g2
        else:
            Gq = self._G2
            gq = np.sqrt(self._g2[:-1] * self._g2[1:])
        GG, gg = np.meshgrid(Gq, gq, indexing="ij")
        exact = self.direct(GG, gg)
        approx = self(GG, gg)
        return float(np.max(np.abs(approx - exact) / np.abs(exact)))


_TABLE_CACHE: dict = {}


def _quad_digest(quad: VelocityQuadrature) -> bytes:
    h = hashlib.sha1()
    h.update(np.ascontiguousarray(quad.nodes).tobytes())
    h.update(np.ascontiguousarray(quad.weights).tobytes())
    return h.digest()


def build_chi_table(G_abs2_max: float, g_abs2_max: float,
                    params: PhysicalParams, quad: VelocityQuadrature,
                    target_error: float = 1.0e-4,
                    initial_nodes: int = 64,
                    floor_ratio: float = 1.0e-4,
                    max_nodes: int = 2048,
                    max_rounds: int = 4,
                    seed: int = 0) -> ChiTable:
    """Build an adaptive ChiTable covering [0, G_abs2_max] x [0, g_abs2_max].

    A coarse log-uniform pilot grid measures the worst midpoint error per
    axis; the second-order behaviour of bilinear interpolation then gives the
    node density needed to hit the target, each axis sized independently.
    The result is verified on a seeded random probe set and re-densified if
    needed.  Raises TableRefinementError if the node cap is insufficient
    (direct evaluation is then advised).
    """
    if G_abs2_max <= 0.0:
        # degenerate table: control off everywhere, chi identically zero
        G2 = np.array([1.0e-300, 2.0e-300])
        g2 = np.array([max(g_abs2_max, 1.0e-300) * floor_ratio,
                       max(g_abs2_max, 1.0e-300)])
        return ChiTable(G2, g2, params, quad, zero=True)
    cache_key = (params, float(G_abs2_max), float(g_abs2_max),
                 float(target_error), float(floor_ratio), int(seed),
                 _quad_digest(quad))
    cached = _TABLE_CACHE.get(cache_key)
    if cached is not None:
        return cached
    g_top = max(g_abs2_max, G_abs2_max * 1.0e-12)

    def make(nG: int, ng: int) -> ChiTable:
        return ChiTable(np.geomspace(G_abs2_max * floor_ratio, G_abs2_max, nG),
                        np.geomspace(g_top * floor_ratio, g_top, ng),
                        params, quad)

    headroom = 0.6  # build below target so an independent probe set stays under
    nG = ng = initial_nodes
    table = make(nG, ng)
    for round_no in range(max_rounds):
        if round_no == 0 or nG * ng <= 300_000:
            err_G = table._axis_midpoint_error(0)
            err_g = table._axis_midpoint_error(1)
        else:
            # large grids: probe-based estimate only (midpoint pass costs a fill)
            err_G = err_g = table.max_relative_error(seed=seed)
        factor_G = np.sqrt(err_G / (headroom * target_error))
        factor_g = np.sqrt(err_g / (headroom * target_error))
        if factor_G <= 1.0 and factor_g <= 1.0:
            if table.max_relative_error(seed=seed) < target_error:
                _TABLE_CACHE[cache_key] = table
                return table
            factor_G = factor_g = 1.3
        nG = min(max_nodes, int(np.ceil(nG * max(factor_G, 1.0))) + 1)
        ng = min(max_nodes, int(np.ceil(ng * max(factor_g, 1.0))) + 1)
        table = make(nG, ng)
    err = table.max_relative_error(seed=seed)
    if err < target_error:
        _TABLE_CACHE[cache_key] = table
        return table
    raise TableRefinementError(
        f"interpolation error {err:.3e} still above {target_error:g} at the "
        f"{table.shape[0]}x{table.shape[1]} node cap; use direct evaluation "
        "for this configuration")
