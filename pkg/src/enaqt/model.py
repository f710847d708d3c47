"""Open-system transport model assembly.

A model couples the tight-binding Hamiltonian of a Topology to three
incoherent processes: irreversible capture at a trap site (rate kappa),
uniform excitation loss at every site (rate Gamma), and pure dephasing of
inter-site coherences (rate gamma_phi). All rates are quoted in units of
the hopping coupling V (hbar = 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import BINARY_TREE, Topology, leaves

LEAF_MIXTURE = "leaf-mixture"
UNIFORM_MIXTURE = "uniform-mixture"
SINGLE_SITE = "single-site"

INITIAL_STATE_KINDS = (LEAF_MIXTURE, UNIFORM_MIXTURE, SINGLE_SITE)


@dataclass(frozen=True)
class DisorderSpec:
    """Quenched Gaussian site-energy disorder: zero mean, std ``std_dev``.

    Energies are drawn once per realization and held fixed during the
    evolution. ``(master_seed, realization_index)`` fully determines a draw.
    """

    std_dev: float
    master_seed: int

    def __post_init__(self):
        if self.std_dev < 0:
            raise ValueError("disorder standard deviation must be >= 0")
        if self.master_seed < 0:
            raise ValueError("master_seed must be a nonnegative integer")


def sample_site_energies(spec: DisorderSpec, realization_index: int,
                         n_sites: int) -> np.ndarray:
    """Draw one static-disorder realization of the site energies.

    Deterministic: the stream is keyed on (master_seed, realization_index),
    so realizations are reproducible and independent of evaluation order.
    """
    if spec.std_dev == 0.0:
        return np.zeros(n_sites)
    seq = np.random.SeedSequence((spec.master_seed, realization_index))
    rng = np.random.default_rng(seq)
    return rng.normal(0.0, spec.std_dev, size=n_sites)


@dataclass(frozen=True)
class TransportModel:
    """Full open-system specification on a fixed topology.

    dephasing_rate follows the convention in which a rate gamma damps each
    inter-site coherence as exp(-gamma t / 2); see
    ``coherence_damping_rate``.
    """

    topology: Topology
    site_energies: tuple[float, ...]
    trap_site: int
    trap_rate: float = 1.0
    recomb_rate: float = 0.01
    dephasing_rate: float = 0.0

    def __post_init__(self):
        if len(self.site_energies) != self.topology.n_sites:
            raise ValueError("site_energies length must equal n_sites")
        if not 0 <= self.trap_site < self.topology.n_sites:
            raise ValueError(f"trap site {self.trap_site} out of range")
        for name in ("trap_rate", "recomb_rate", "dephasing_rate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        object.__setattr__(self, "site_energies",
                           tuple(float(e) for e in self.site_energies))

    @property
    def n_sites(self) -> int:
        return self.topology.n_sites

    @property
    def coherence_damping_rate(self) -> float:
        """Rate at which each off-diagonal density-matrix element decays.

        Half the dephasing_rate: the convention under which all bundled
        reference efficiencies are quoted.
        """
        return 0.5 * self.dephasing_rate


def assemble_system_hamiltonian(topology: Topology, site_energies) -> np.ndarray:
    """Hermitian tight-binding Hamiltonian: diag(site energies) + V * adjacency."""
    eps = np.asarray(site_energies, dtype=float)
    n = topology.n_sites
    if eps.shape != (n,):
        raise ValueError(f"expected {n} site energies, got shape {eps.shape}")
    h = np.zeros((n, n), dtype=complex)
    h[np.diag_indices(n)] = eps
    v = topology.coupling
    for i, j in topology.edges:
        h[i, j] = v
        h[j, i] = v
    return h


def assemble_effective_hamiltonian(model: TransportModel) -> np.ndarray:
    """Non-Hermitian total Hamiltonian.

    H = H_sys - i*Gamma*Identity - i*kappa*|trap><trap|: the anti-Hermitian
    part encodes uniform recombination loss plus capture at the trap.
    """
    h = assemble_system_hamiltonian(model.topology, model.site_energies)
    n = model.n_sites
    h[np.diag_indices(n)] -= 1j * model.recomb_rate
    h[model.trap_site, model.trap_site] -= 1j * model.trap_rate
    return h


def apply_dephasing(rho: np.ndarray, rate: float) -> np.ndarray:
    """Pure-dephasing increment for site-projector generators.

    Closed form of the generator sum: every off-diagonal element is scaled
    by -rate, the diagonal maps to exactly zero. O(N^2) instead of the
    O(N^3) literal sum over projector sandwiches.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("rho must be a square matrix")
    out = -rate * rho
    np.fill_diagonal(out, 0.0)
    return out


def initial_state(topology: Topology, kind: str, site: int | None = None) -> np.ndarray:
    """Initial density matrix of the excitation.

    leaf-mixture: equal statistical mixture of the tree leaves.
    uniform-mixture: Identity/N over all sites.
    single-site: pure projector onto ``site``.
    """
    n = topology.n_sites
    rho = np.zeros((n, n), dtype=complex)
    if kind == LEAF_MIXTURE:
        if topology.kind != BINARY_TREE:
            raise ValueError("leaf-mixture requires a binary tree")
        ls = leaves(topology)
        for s in ls:
            rho[s, s] = 1.0 / len(ls)
    elif kind == UNIFORM_MIXTURE:
        rho[np.diag_indices(n)] = 1.0 / n
    elif kind == SINGLE_SITE:
        if site is None or not 0 <= site < n:
            raise ValueError(f"single-site initial state needs a valid site, got {site}")
        rho[site, site] = 1.0
    else:
        raise ValueError(f"unknown initial-state kind {kind!r}")
    return rho


def check_density_matrix(rho: np.ndarray, herm_tol: float = 1e-12,
                         trace_tol: float = 1e-9, eig_tol: float = 1e-9) -> None:
    """Validate Hermiticity, trace in [0, 1] and positive semidefiniteness.

    Raises ValueError naming the violated property.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    herm_err = np.abs(rho - rho.conj().T).max()
    if herm_err > herm_tol:
        raise ValueError(f"not Hermitian: max |rho - rho^dag| = {herm_err:.2e}")
    tr = np.trace(rho)
    if abs(tr.imag) > trace_tol or not -trace_tol <= tr.real <= 1.0 + trace_tol:
        raise ValueError(f"trace {tr} outside [0, 1]")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -eig_tol:
        raise ValueError(f"negative eigenvalue {lo:.2e}")
