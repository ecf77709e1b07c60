"""Prototype sets and their training by stochastic descent on the relative-distance cost.

The cost per sample is mu = (d+ - d-) / (d+ + d-), where d+ is the squared
distance to the closest same-class prototype and d- to the closest
other-class prototype. Only those two winners receive gradients. Three
measures sit behind one interface: plain squared Euclidean, a global
relevance transform, and tangent distance to per-prototype affine subspaces
(the default variant, which also adapts each subspace basis).

No squashing is applied to mu; the per-epoch mean of mu is the recorded
training cost. A learning-rate halving rule reverts any epoch whose cost
rises, so the recorded cost trace is non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .distances import TangentBasis, orthonormalize
from .errors import DimensionMismatchError, TrainingError
from .schema import (
    CLASSES,
    DISEASED,
    HEALTHY,
    CohortDataset,
    Standardizer,
    fit_standardizer,
)

MEASURES = ("euclidean", "tangent", "relevance")


@dataclass(frozen=True)
class Prototype:
    """A labeled point in standardized feature space, with an optional tangent basis."""

    w: np.ndarray
    cls: str
    basis: TangentBasis

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1:
            raise DimensionMismatchError("prototype position must be a vector")
        if self.cls not in CLASSES:
            raise TrainingError(f"prototype class must be one of {CLASSES}, got {self.cls!r}")
        if self.basis.dim != w.shape[0]:
            raise DimensionMismatchError(
                f"basis dimension {self.basis.dim} does not match prototype dimension {w.shape[0]}")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "w", w)


class PrototypeSet:
    """Ordered prototypes plus the distance measure they were trained under."""

    def __init__(self, prototypes: Iterable[Prototype], measure: str = "tangent",
                 omega: np.ndarray | None = None):
        self.prototypes: tuple[Prototype, ...] = tuple(prototypes)
        if not self.prototypes:
            raise TrainingError("prototype set is empty")
        if measure not in MEASURES:
            raise TrainingError(f"unknown distance measure {measure!r}")
        self.measure = measure
        dims = {p.w.shape[0] for p in self.prototypes}
        if len(dims) != 1:
            raise DimensionMismatchError(f"prototypes have mixed dimensions {sorted(dims)}")
        (self.dim,) = dims
        self.diseased_mask = np.array([p.cls == DISEASED for p in self.prototypes])
        if not self.diseased_mask.any() or self.diseased_mask.all():
            raise TrainingError("prototype set must contain both classes")
        if measure == "relevance":
            if omega is None:
                omega = np.eye(self.dim)
            omega = np.asarray(omega, dtype=np.float64)
            if omega.shape != (self.dim, self.dim):
                raise DimensionMismatchError(
                    f"relevance matrix shape {omega.shape}, expected {(self.dim, self.dim)}")
            omega = omega.copy()
            omega.flags.writeable = False
        self.omega = omega if measure == "relevance" else None
        self._W = np.stack([p.w for p in self.prototypes])
        self._W.flags.writeable = False
        rs = {p.basis.r for p in self.prototypes}
        self._V = (np.stack([p.basis.matrix for p in self.prototypes])
                   if len(rs) == 1 else None)

    def __len__(self) -> int:
        return len(self.prototypes)

    @property
    def positions(self) -> np.ndarray:
        """(N, d) matrix of prototype positions."""
        return self._W

    def distances(self, x: np.ndarray) -> np.ndarray:
        """Squared distance m(x, P_i) to every prototype, per the configured measure."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise DimensionMismatchError(f"query shape {x.shape}, expected ({self.dim},)")
        R = x[None, :] - self._W
        if self.measure == "euclidean":
            return np.einsum("ij,ij->i", R, R)
        if self.measure == "relevance":
            Z = R @ self.omega.T
            return np.einsum("ij,ij->i", Z, Z)
        rr = np.einsum("ij,ij->i", R, R)
        if self._V is not None and self._V.shape[2] > 0:
            P = np.einsum("ijk,ij->ik", self._V, R)
            return rr - np.einsum("ik,ik->i", P, P)
        if self._V is not None:
            return rr
        out = np.empty(len(self.prototypes))
        for i, p in enumerate(self.prototypes):
            proj = p.basis.matrix.T @ R[i]
            out[i] = rr[i] - proj @ proj
        return out

    def distance_matrix(self, X: np.ndarray) -> np.ndarray:
        """(n, N) squared distances for a batch of standardized rows."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.measure == "euclidean":
            diff = X[:, None, :] - self._W[None, :, :]
            return np.einsum("nij,nij->ni", diff, diff)
        if self.measure == "relevance":
            diff = (X[:, None, :] - self._W[None, :, :]) @ self.omega.T
            return np.einsum("nij,nij->ni", diff, diff)
        out = np.empty((X.shape[0], len(self.prototypes)))
        for i, p in enumerate(self.prototypes):
            R = X - p.w[None, :]
            rr = np.einsum("nj,nj->n", R, R)
            if p.basis.r > 0:
                P = R @ p.basis.matrix
                rr = rr - np.einsum("nk,nk->n", P, P)
            out[:, i] = rr
        return out

    def nearest(self, x: np.ndarray) -> int:
        """Index of the globally nearest prototype; ties go to the lowest index."""
        return int(np.argmin(self.distances(x)))

    def nearest_of_class(self, x: np.ndarray, cls: str) -> int:
        dist = self.distances(x)
        mask = self.diseased_mask if cls == DISEASED else ~self.diseased_mask
        idx = np.flatnonzero(mask)
        return int(idx[np.argmin(dist[idx])])


def classify(x: np.ndarray, W: PrototypeSet) -> str:
    """Class of the nearest prototype."""
    return W.prototypes[W.nearest(x)].cls


def glvq_mu(x: np.ndarray, c: str, W: PrototypeSet) -> float:
    """Relative distance of x to its own class versus the other class, in [-1, 1]."""
    if c not in CLASSES:
        raise TrainingError(f"class must be one of {CLASSES}, got {c!r}")
    dist = W.distances(x)
    own = W.diseased_mask if c == DISEASED else ~W.diseased_mask
    d_plus = float(dist[own].min())
    d_minus = float(dist[~own].min())
    s = d_plus + d_minus
    if s == 0.0:
        return 0.0
    return (d_plus - d_minus) / s


def mean_mu(dist: np.ndarray, is_diseased: np.ndarray, diseased_mask: np.ndarray) -> float:
    """Mean mu over a batch given a precomputed (n, N) distance matrix."""
    big = np.inf
    d_own = np.where(diseased_mask[None, :], dist, big)
    d_other = np.where(diseased_mask[None, :], big, dist)
    d_plus = np.where(is_diseased, d_own.min(axis=1), d_other.min(axis=1))
    d_minus = np.where(is_diseased, d_other.min(axis=1), d_own.min(axis=1))
    s = d_plus + d_minus
    mu = np.zeros_like(s)
    nz = s > 0
    mu[nz] = (d_plus[nz] - d_minus[nz]) / s[nz]
    return float(mu.mean())


@dataclass(frozen=True)
class MuGradients:
    """Analytic gradients of mu at one sample, for the two winning prototypes."""

    mu: float
    j_plus: int
    j_minus: int
    d_plus: float
    d_minus: float
    w_plus: np.ndarray
    w_minus: np.ndarray
    v_plus: np.ndarray | None
    v_minus: np.ndarray | None


def glvq_mu_gradients(x: np.ndarray, c: str, W: PrototypeSet) -> MuGradients:
    """mu plus its gradients w.r.t. the winners' positions (and bases, for tangent).

    For the tangent measure the basis gradient is taken on the raw quadratic
    form |r|^2 - |V'r|^2, which coincides with the subspace distance at
    orthonormal V; this is the convention finite differences must use.
    """
    dist = W.distances(x)
    own = W.diseased_mask if c == DISEASED else ~W.diseased_mask
    own_idx = np.flatnonzero(own)
    other_idx = np.flatnonzero(~own)
    j_plus = int(own_idx[np.argmin(dist[own_idx])])
    j_minus = int(other_idx[np.argmin(dist[other_idx])])
    d_plus = float(dist[j_plus])
    d_minus = float(dist[j_minus])
    s = d_plus + d_minus
    d = W.dim
    if s == 0.0:
        zero = np.zeros(d)
        return MuGradients(0.0, j_plus, j_minus, 0.0, 0.0, zero, zero.copy(), None, None)
    mu = (d_plus - d_minus) / s
    g_plus = 2.0 * d_minus / (s * s)
    g_minus = -2.0 * d_plus / (s * s)

    x = np.asarray(x, dtype=np.float64)
    r_plus = x - W.prototypes[j_plus].w
    r_minus = x - W.prototypes[j_minus].w

    def _ddist_dw(r: np.ndarray, j: int) -> np.ndarray:
        if W.measure == "euclidean":
            return -2.0 * r
        if W.measure == "relevance":
            return -2.0 * (W.omega.T @ (W.omega @ r))
        V = W.prototypes[j].basis.matrix
        return -2.0 * (r - V @ (V.T @ r))

    grad_w_plus = g_plus * _ddist_dw(r_plus, j_plus)
    grad_w_minus = g_minus * _ddist_dw(r_minus, j_minus)

    v_plus = v_minus = None
    if W.measure == "tangent":
        Vp = W.prototypes[j_plus].basis.matrix
        Vm = W.prototypes[j_minus].basis.matrix
        # d(|r|^2 - |V'r|^2)/dV = -2 r (r'V)
        v_plus = g_plus * (-2.0) * np.outer(r_plus, r_plus @ Vp)
        v_minus = g_minus * (-2.0) * np.outer(r_minus, r_minus @ Vm)
    return MuGradients(mu, j_plus, j_minus, d_plus, d_minus,
                       grad_w_plus, grad_w_minus, v_plus, v_minus)


@dataclass(frozen=True)
class TrainingConfig:
    prototypes_per_class: int = 5
    tangent_dim: int = 2
    learning_rate_w: float = 0.01
    learning_rate_v: float = 0.001
    epochs: int = 100
    seed: int = 0
    measure: str = "tangent"

    def __post_init__(self):
        if self.prototypes_per_class < 1:
            raise TrainingError("prototypes_per_class must be at least 1")
        if self.tangent_dim < 0:
            raise TrainingError("tangent_dim must be nonnegative")
        if self.learning_rate_w <= 0 or self.learning_rate_v <= 0:
            raise TrainingError("learning rates must be positive")
        if self.epochs < 0:
            raise TrainingError("epochs must be nonnegative")
        if self.measure not in MEASURES:
            raise TrainingError(f"unknown distance measure {self.measure!r}")


@dataclass
class TrainedDiseaseModel:
    """Everything needed to score one disease: prototypes, preprocessing, simulators."""

    disease: str
    name: str
    schema_digest: str
    standardizer: Standardizer
    prototype_set: PrototypeSet
    autoencoders: tuple | None
    config: TrainingConfig
    final_cost: float
    cost_history: tuple[float, ...] = ()

    @property
    def fitted(self) -> bool:
        return self.autoencoders is not None

    def require_autoencoders(self) -> tuple:
        if self.autoencoders is None:
            raise TrainingError(
                f"model for {self.disease} has no fitted autoencoders; run fit_autoencoders first")
        if len(self.autoencoders) != len(self.prototype_set):
            raise TrainingError(
                f"model for {self.disease} has {len(self.autoencoders)} autoencoders "
                f"for {len(self.prototype_set)} prototypes")
        return self.autoencoders


def _kmeans(points: np.ndarray, k: int, rng: np.random.Generator,
            max_iter: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """k-means++ seeding followed by Lloyd refinement; deterministic given rng state."""
    n, d = points.shape
    k = min(k, n)
    centers = np.empty((k, d))
    centers[0] = points[rng.integers(n)]
    closest = ((points - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centers[j] = points[idx]
        closest = np.minimum(closest, ((points - centers[j]) ** 2).sum(axis=1))

    assign = np.full(n, -1)
    for _ in range(max_iter):
        D = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = D.argmin(axis=1)
        for j in range(k):
            if not (new_assign == j).any():
                far = int(D.min(axis=1).argmax())
                new_assign[far] = j
        if (new_assign == assign).all():
            break
        assign = new_assign
        for j in range(k):
            centers[j] = points[assign == j].mean(axis=0)
    return centers, assign


def _principal_basis(points: np.ndarray, r: int, dim: int) -> np.ndarray:
    """Top-r principal directions of ``points``, padded to rank r if needed."""
    if r == 0:
        return np.zeros((dim, 0))
    cols: list[np.ndarray] = []
    if points.shape[0] >= 2:
        centered = points - points.mean(axis=0)
        _, svals, vt = np.linalg.svd(centered, full_matrices=False)
        keep = svals > 1e-10 * max(1.0, float(svals[0]) if len(svals) else 1.0)
        cols = [vt[i] for i in range(min(r, int(keep.sum())))]
    basis = list(cols)
    for axis in range(dim):
        if len(basis) >= r:
            break
        e = np.zeros(dim)
        e[axis] = 1.0
        for b in basis:
            e = e - (e @ b) * b
        norm = float(np.linalg.norm(e))
        if norm > 1e-8:
            basis.append(e / norm)
    return np.column_stack(basis) if basis else np.zeros((dim, 0))


def init_prototypes(dataset: CohortDataset, disease: str, config: TrainingConfig,
                    standardizer: Standardizer | None = None) -> PrototypeSet:
    """Per-class k-means centroids with per-cell principal tangent bases."""
    X, y = dataset.labeled_subset(disease)
    if len(X) == 0 or y.all() or not y.any():
        raise TrainingError(
            f"training for {disease!r} requires labeled individuals of both classes")
    std = standardizer or fit_standardizer(dataset)
    Z = std.apply(X)
    d = Z.shape[1]
    if config.tangent_dim > d:
        raise TrainingError(f"tangent_dim {config.tangent_dim} exceeds feature dimension {d}")
    rng = np.random.default_rng(config.seed)
    prototypes: list[Prototype] = []
    for cls, mask in ((DISEASED, y), (HEALTHY, ~y)):
        pts = Z[mask]
        centers, assign = _kmeans(pts, config.prototypes_per_class, rng)
        for j in range(centers.shape[0]):
            cell = pts[assign == j]
            raw_basis = _principal_basis(cell, config.tangent_dim, d)
            basis = (orthonormalize(raw_basis) if raw_basis.shape[1] > 0
                     else TangentBasis.empty(d))
            prototypes.append(Prototype(w=centers[j], cls=cls, basis=basis))
    return PrototypeSet(prototypes, measure=config.measure,
                        omega=np.eye(d) if config.measure == "relevance" else None)


class _TrainState:
    """Mutable arrays during SGD; frozen into a PrototypeSet afterwards."""

    def __init__(self, W: PrototypeSet):
        self.measure = W.measure
        self.classes = [p.cls for p in W.prototypes]
        self.diseased_mask = W.diseased_mask.copy()
        self.Wmat = W.positions.copy()
        self.V = [p.basis.matrix.copy() for p in W.prototypes]
        self.omega = None if W.omega is None else W.omega.copy()

    def snapshot(self):
        return (self.Wmat.copy(), [v.copy() for v in self.V],
                None if self.omega is None else self.omega.copy())

    def restore(self, snap):
        self.Wmat, self.V, self.omega = (snap[0].copy(), [v.copy() for v in snap[1]],
                                         None if snap[2] is None else snap[2].copy())

    def distances(self, x: np.ndarray) -> np.ndarray:
        R = x[None, :] - self.Wmat
        rr = np.einsum("ij,ij->i", R, R)
        if self.measure == "euclidean":
            return rr
        if self.measure == "relevance":
            Z = R @ self.omega.T
            return np.einsum("ij,ij->i", Z, Z)
        out = rr
        for i, V in enumerate(self.V):
            if V.shape[1] > 0:
                p = V.T @ R[i]
                out[i] = out[i] - p @ p
        return out

    def to_prototype_set(self) -> PrototypeSet:
        protos = [Prototype(w=self.Wmat[i], cls=self.classes[i],
                            basis=TangentBasis(self.V[i]) if self.V[i].shape[1] > 0
                            else TangentBasis.empty(self.Wmat.shape[1]))
                  for i in range(self.Wmat.shape[0])]
        return PrototypeSet(protos, measure=self.measure, omega=self.omega)


def _sgd_step(state: _TrainState, x: np.ndarray, diseased: bool, lr_w: float, lr_v: float,
              epoch: int, sample: int):
    dist = state.distances(x)
    own = state.diseased_mask if diseased else ~state.diseased_mask
    own_idx = np.flatnonzero(own)
    other_idx = np.flatnonzero(~own)
    jp = int(own_idx[np.argmin(dist[own_idx])])
    jm = int(other_idx[np.argmin(dist[other_idx])])
    dp, dm = float(dist[jp]), float(dist[jm])
    s = dp + dm
    if s <= 0.0:
        return
    gp = 2.0 * dm / (s * s)
    gm = -2.0 * dp / (s * s)
    rp = x - state.Wmat[jp]
    rm = x - state.Wmat[jm]

    if state.measure == "euclidean":
        dw_p, dw_m = -2.0 * rp, -2.0 * rm
    elif state.measure == "relevance":
        OtO = state.omega.T @ state.omega
        dw_p, dw_m = -2.0 * (OtO @ rp), -2.0 * (OtO @ rm)
    else:
        Vp, Vm = state.V[jp], state.V[jm]
        dw_p = -2.0 * (rp - Vp @ (Vp.T @ rp)) if Vp.shape[1] else -2.0 * rp
        dw_m = -2.0 * (rm - Vm @ (Vm.T @ rm)) if Vm.shape[1] else -2.0 * rm

    new_p = state.Wmat[jp] - lr_w * gp * dw_p
    new_m = state.Wmat[jm] - lr_w * gm * dw_m
    if not (np.isfinite(new_p).all() and np.isfinite(new_m).all()):
        raise TrainingError(
            f"non-finite prototype update at epoch {epoch}, sample {sample}",
            epoch=epoch, sample=sample)
    state.Wmat[jp] = new_p
    state.Wmat[jm] = new_m

    if state.measure == "tangent":
        for j, r, g in ((jp, rp, gp), (jm, rm, gm)):
            V = state.V[j]
            if V.shape[1] == 0:
                continue
            upd = V - lr_v * g * (-2.0) * np.outer(r, r @ V)
            if not np.isfinite(upd).all():
                raise TrainingError(
                    f"non-finite basis update at epoch {epoch}, sample {sample}",
                    epoch=epoch, sample=sample)
            state.V[j] = orthonormalize(upd).matrix.copy()
    elif state.measure == "relevance":
        grad = gp * 2.0 * (state.omega @ np.outer(rp, rp)) \
            + gm * 2.0 * (state.omega @ np.outer(rm, rm))
        upd = state.omega - lr_v * grad
        if not np.isfinite(upd).all():
            raise TrainingError(
                f"non-finite relevance update at epoch {epoch}, sample {sample}",
                epoch=epoch, sample=sample)
        state.omega = upd


def _state_cost(state: _TrainState, Z: np.ndarray, y: np.ndarray) -> float:
    return mean_mu(state.to_prototype_set().distance_matrix(Z), y, state.diseased_mask)


def train(dataset: CohortDataset, disease: str, config: TrainingConfig,
          standardizer: Standardizer | None = None,
          display_name: str | None = None) -> TrainedDiseaseModel:
    """Learn a prototype set for one disease; autoencoders are left unfitted.

    Deterministic given config.seed. Epochs whose mean cost rises are reverted
    and both learning rates halved, so the recorded cost history never increases.
    """
    std = standardizer or fit_standardizer(dataset)
    W0 = init_prototypes(dataset, disease, config, standardizer=std)
    X, y = dataset.labeled_subset(disease)
    Z = std.apply(X)
    state = _TrainState(W0)
    rng = np.random.default_rng(config.seed + 1)

    lr_w, lr_v = config.learning_rate_w, config.learning_rate_v
    prev_cost = _state_cost(state, Z, y)
    history = [prev_cost]
    for epoch in range(config.epochs):
        snap = state.snapshot()
        order = rng.permutation(len(Z))
        for sample in order:
            _sgd_step(state, Z[sample], bool(y[sample]), lr_w, lr_v, epoch, int(sample))
        if state.measure == "relevance":
            norm = np.sqrt(np.trace(state.omega.T @ state.omega))
            state.omega = state.omega * np.sqrt(state.Wmat.shape[1]) / max(norm, 1e-12)
        cost = _state_cost(state, Z, y)
        if cost > prev_cost:
            state.restore(snap)
            lr_w *= 0.5
            lr_v *= 0.5
            history.append(prev_cost)
        else:
            prev_cost = cost
            history.append(cost)

    return TrainedDiseaseModel(
        disease=disease,
        name=display_name or disease,
        schema_digest=dataset.schema.digest(),
        standardizer=std,
        prototype_set=state.to_prototype_set(),
        autoencoders=None,
        config=config,
        final_cost=prev_cost,
        cost_history=tuple(history),
    )
