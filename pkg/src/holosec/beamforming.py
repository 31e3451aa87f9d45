"""Null-space transmit beamforming and matched-filter receive combining."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from holosec.channel import ShapeError, SpectralModel

RANK_RTOL = 1e-12
DEGENERATE_NORM = 1e-14


class InfeasibleNullSpace(RuntimeError):
    """The other users' effective channels leave no usable transmit direction."""


class DegenerateChannel(RuntimeError):
    """An effective channel vanished, so no combiner can be formed."""


def reduced_effective_channel(tx: SpectralModel, rx: SpectralModel, g: np.ndarray) -> np.ndarray:
    """``Phi_tx^H H^H = diag(s_tx) g^H diag(s_rx) Phi_rx^H``, shape ``(n_tx, N_rx)``."""
    if g.shape != (rx.n_samples, tx.n_samples):
        raise ShapeError(
            f"small-scale matrix has shape {g.shape}, expected {(rx.n_samples, tx.n_samples)}"
        )
    return (tx.sigma[:, None] * g.conj().T * rx.sigma[None, :]) @ rx.basis.conj().T


def interference_stack(b: int, reduced: list[np.ndarray]) -> np.ndarray:
    """Concatenate the reduced channels of every user except ``b``, in user order."""
    others = [m for k, m in enumerate(reduced) if k != b]
    if not others:
        n_tx = reduced[b].shape[0]
        return np.zeros((n_tx, 0), dtype=complex)
    return np.hstack(others)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # Largest-magnitude entry made real positive; ties go to the lowest index.
    k = int(np.argmax(np.abs(v)))
    out = v * (abs(v[k]) / v[k])
    out[k] = abs(v[k])
    return out


def null_space_beamformer(
    stack: np.ndarray,
    tx_basis: np.ndarray,
    support: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Inner beamformer from the null space of ``stack^H``.

    Parameters
    ----------
    stack : ndarray, shape (n_A, K)
        Interference stack of the unintended users.
    tx_basis : ndarray, shape (N_A, n_A)
        Alice's spectral basis.
    support : bool ndarray, shape (n_A,), optional
        Wavenumber samples allowed to carry power. Samples with zero variance
        never reach any receiver, so directions built on them lie in every null
        space yet deliver nothing; restricting to the propagating samples keeps
        the beam useful. Defaults to all samples.

    Returns
    -------
    p : ndarray, shape (n_A,)
        Unit-norm inner beamformer, zero outside ``support``.
    f : ndarray, shape (N_A,)
        Outer beamformer ``tx_basis @ p``.
    rank : int
        Numerical rank of the (restricted) stack.
    """
    n_a = stack.shape[0]
    if support is None:
        support = np.ones(n_a, dtype=bool)
    idx = np.flatnonzero(support)
    sub = stack[idx]
    dim = idx.size
    if sub.shape[1] == 0:
        rank = 0
        u_last = np.zeros(dim, dtype=complex)
        u_last[0] = 1.0
    else:
        u, s, _ = np.linalg.svd(sub, full_matrices=True)
        cutoff = (s[0] if s.size else 0.0) * max(sub.shape) * RANK_RTOL
        rank = int(np.count_nonzero(s > cutoff))
        if dim - rank < 1:
            raise InfeasibleNullSpace(
                f"interference stack has rank {rank} but only {dim} transmit dimensions are available"
            )
        u_last = _fix_phase(u[:, -1])
    p = np.zeros(n_a, dtype=complex)
    p[idx] = u_last
    p /= np.linalg.norm(p)
    f = tx_basis @ p
    return p, f, rank


def effective_channel(rx: SpectralModel, g: np.ndarray, tx_sigma: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``H f`` for ``f = Phi_tx p`` without forming H: ``Phi_rx diag(s_rx) g diag(s_tx) p``."""
    return rx.basis @ (rx.sigma * (g @ (tx_sigma * p)))


def matched_filter(rx: SpectralModel, g: np.ndarray, tx_sigma: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Unit-norm combiner aligned with the effective channel of beam ``p``."""
    v = effective_channel(rx, g, tx_sigma, p)
    nrm = np.linalg.norm(v)
    if nrm < DEGENERATE_NORM:
        raise DegenerateChannel(f"effective channel norm {nrm:.3e} is numerically zero")
    return v / nrm


def bob_matched_filter(rx: SpectralModel, g_b: np.ndarray, tx_sigma: np.ndarray, p_b: np.ndarray) -> np.ndarray:
    return matched_filter(rx, g_b, tx_sigma, p_b)


def eve_combiner(eve: SpectralModel, g_e: np.ndarray, tx_sigma: np.ndarray, p_b: np.ndarray) -> np.ndarray:
    """Eve's matched filter towards the stream of the target user."""
    return matched_filter(eve, g_e, tx_sigma, p_b)


@dataclass
class BeamformingSolution:
    inner: list[np.ndarray]
    outer: list[np.ndarray]
    bob_combiners: list[np.ndarray]
    eve_combiners: list[np.ndarray] = field(default_factory=list)
    ranks: list[int] = field(default_factory=list)
    null_dims: list[int] = field(default_factory=list)


def design_beamformers(
    alice: SpectralModel,
    bobs: list[SpectralModel],
    bob_g: list[np.ndarray],
    eve: SpectralModel | None = None,
    eve_g: np.ndarray | None = None,
) -> BeamformingSolution:
    """Transmit beams for every Bob plus Bob and (optionally) Eve combiners.

    ``bob_g`` and ``eve_g`` are whatever small-scale matrices the designer (or
    Eve) knows; pass estimates to design on imperfect CSI.
    """
    reduced = [reduced_effective_channel(alice, m, g) for m, g in zip(bobs, bob_g)]
    support = alice.sigma > 0.0
    n_active = int(np.count_nonzero(support))
    inner, outer, ranks, dims = [], [], [], []
    for b in range(len(bobs)):
        stack = interference_stack(b, reduced)
        p, f, rank = null_space_beamformer(stack, alice.basis, support)
        inner.append(p)
        outer.append(f)
        ranks.append(rank)
        dims.append(n_active - rank)
    q_bob = [bob_matched_filter(m, g, alice.sigma, p) for m, g, p in zip(bobs, bob_g, inner)]
    q_eve = []
    if eve is not None and eve_g is not None:
        q_eve = [eve_combiner(eve, eve_g, alice.sigma, p) for p in inner]
    return BeamformingSolution(inner, outer, q_bob, q_eve, ranks, dims)
