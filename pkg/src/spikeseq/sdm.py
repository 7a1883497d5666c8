"""Sparse distributed memory: cosine-threshold addressing + max-rule CMM.

Addressing compares a context code against W stored address codes by
cosine similarity; locations at or above the threshold contribute,
weighted by their similarity (a flag switches to binary contribution).
Storage is a correlation matrix updated by the elementwise max of the
outer product of the data significance vector with the activation
pattern, which makes writes idempotent and order-independent.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .codes import CodeParams, FloatVector, RankOrderCode, nofm, random_code, to_significance
from .errors import NoActiveLocationError, ParameterError

__all__ = [
    "AddressDecoder",
    "ActivationPattern",
    "CorrelationMatrix",
    "decode_address",
    "cmm_write",
    "cmm_read",
    "calibrate_threshold",
    "save_memory",
    "load_memory",
]

SNAPSHOT_MAGIC = b"SDMW"
SNAPSHOT_HEADER = struct.Struct("<4sIIIqd")  # magic, version, data_dim, W, seed, theta
SNAPSHOT_VERSION = 1


@dataclass
class AddressDecoder:
    """W random canonical address codes plus an activation threshold."""

    addresses: FloatVector  # (W, M) stacked significance vectors
    threshold: float
    code_params: CodeParams
    binary: bool = False  # True: active locations contribute weight 1
    seed: int = 0
    _row_norms: FloatVector = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ParameterError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.addresses.ndim != 2 or self.addresses.shape[1] != self.code_params.m_total:
            raise ParameterError(
                f"addresses must be (W, {self.code_params.m_total}), got {self.addresses.shape}"
            )
        self._row_norms = np.linalg.norm(self.addresses, axis=1)

    @property
    def n_locations(self) -> int:
        return self.addresses.shape[0]

    @classmethod
    def random(
        cls,
        n_locations: int,
        code_params: CodeParams,
        threshold: float,
        seed: int,
        binary: bool = False,
    ) -> "AddressDecoder":
        rng = np.random.default_rng(seed)
        rows = np.stack(
            [to_significance(random_code(code_params, rng)) for _ in range(n_locations)]
        )
        return cls(rows, threshold, code_params, binary=binary, seed=seed)


@dataclass(frozen=True)
class ActivationPattern:
    """Per-location contribution weights; zero below the decoder threshold."""

    weights: FloatVector

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(self.weights))

    @property
    def total(self) -> float:
        return float(self.weights.sum())


def decode_address(context: FloatVector, dec: AddressDecoder) -> ActivationPattern:
    """Similarity of the context to every address, gated by the threshold."""
    context = np.asarray(context, dtype=np.float64)
    cnorm = np.linalg.norm(context)
    if cnorm == 0.0:
        raise ParameterError("context vector is all-zero")
    sims = (dec.addresses @ context) / (dec._row_norms * cnorm)
    # float guards: cosine of non-negative codes lies in [0, 1], and a context
    # identical to a stored address must compare exactly equal to 1
    np.clip(sims, 0.0, 1.0, out=sims)
    sims[sims >= 1.0 - 1e-12] = 1.0
    mask = sims >= dec.threshold
    if dec.binary:
        weights = mask.astype(np.float64)
    else:
        weights = np.where(mask, sims, 0.0)
    return ActivationPattern(weights)


@dataclass
class CorrelationMatrix:
    """Non-negative (data_dim, W) weight matrix under the max write rule."""

    w: FloatVector

    @classmethod
    def zeros(cls, data_dim: int, n_locations: int) -> "CorrelationMatrix":
        return cls(np.zeros((data_dim, n_locations)))


def cmm_write(
    cmm: CorrelationMatrix, activation: ActivationPattern, data: FloatVector
) -> CorrelationMatrix:
    """In-place max outer-product write; returns the matrix for chaining."""
    data = np.asarray(data, dtype=np.float64)
    if cmm.w.shape != (data.size, activation.weights.size):
        raise ParameterError(
            f"matrix is {cmm.w.shape}, write is ({data.size}, {activation.weights.size})"
        )
    np.maximum(cmm.w, np.outer(data, activation.weights), out=cmm.w)
    return cmm


def cmm_read(
    cmm: CorrelationMatrix, activation: ActivationPattern, params: CodeParams
) -> tuple[RankOrderCode, float]:
    """Read through the active locations and re-impose the N-of-M structure.

    Returns (code, confidence). Confidence is the summed activation weight,
    forced to 0.0 when the readout is all-zero (nothing stored where we
    looked); an all-zero activation raises NoActiveLocationError.
    """
    if activation.n_active == 0:
        raise NoActiveLocationError("no address-decoder location is active")
    readout = cmm.w @ activation.weights
    confidence = activation.total if np.any(readout) else 0.0
    return nofm(readout, params.n_active, params), confidence


def calibrate_threshold(
    addresses: FloatVector,
    code_params: CodeParams,
    target_active: int,
    seed: int,
    n_probes: int = 200,
) -> float:
    """Pick a threshold so random contexts activate ~target_active locations.

    Uses the median over seeded probe contexts of the target_active-th
    largest address similarity.
    """
    if target_active < 1 or target_active > addresses.shape[0]:
        raise ParameterError(f"target_active out of range: {target_active}")
    rng = np.random.default_rng(seed)
    norms = np.linalg.norm(addresses, axis=1)
    kth = np.empty(n_probes)
    for i in range(n_probes):
        c = to_significance(random_code(code_params, rng))
        sims = (addresses @ c) / (norms * np.linalg.norm(c))
        kth[i] = np.sort(sims)[-target_active]
    return float(np.median(kth))


def save_memory(path, cmm: CorrelationMatrix, dec: AddressDecoder) -> None:
    """Snapshot the matrix with its decoder geometry.

    Layout (little-endian): magic 'SDMW', u32 version, u32 data_dim,
    u32 n_locations, i64 seed, f64 threshold, then data_dim*W float64
    entries row-major.
    """
    data_dim, n_loc = cmm.w.shape
    header = SNAPSHOT_HEADER.pack(
        SNAPSHOT_MAGIC, SNAPSHOT_VERSION, data_dim, n_loc, dec.seed, dec.threshold
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(cmm.w, dtype="<f8").tobytes())


def load_memory(path) -> tuple[CorrelationMatrix, dict]:
    """Load a snapshot; returns the matrix and the header fields."""
    with open(path, "rb") as fh:
        raw = fh.read(SNAPSHOT_HEADER.size)
        magic, version, data_dim, n_loc, seed, theta = SNAPSHOT_HEADER.unpack(raw)
        if magic != SNAPSHOT_MAGIC:
            raise ParameterError(f"not a memory snapshot (magic {magic!r})")
        if version != SNAPSHOT_VERSION:
            raise ParameterError(f"unsupported snapshot version {version}")
        body = np.frombuffer(fh.read(), dtype="<f8")
    if body.size != data_dim * n_loc:
        raise ParameterError(
            f"snapshot body has {body.size} entries, expected {data_dim * n_loc}"
        )
    w = body.reshape(data_dim, n_loc).astype(np.float64)
    meta = {"data_dim": data_dim, "n_locations": n_loc, "seed": seed, "threshold": theta}
    return CorrelationMatrix(w), meta
