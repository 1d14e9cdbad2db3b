from .selfvc_types import *
from ..audio_core import FeatureMatrix
import logging
import numpy as np

logger = logging.getLogger('pywmbench.selfvc.knn')


def pairwise_distances(queries: np.ndarray, candidates: np.ndarray, distance: Distance) -> np.ndarray:
    """
    [num_queries x num_candidates]. cosine: 1 - cos(angle), a zero vector is at distance 1 from
    everything. l2: squared Euclidean distance.
    """
    distance = Distance(distance)
    if distance == Distance.cosine:
        q_norm = np.linalg.norm(queries, axis=1)
        c_norm = np.linalg.norm(candidates, axis=1)
        q_unit = np.divide(queries, q_norm[:, None], out=np.zeros_like(queries), where=q_norm[:, None] > 0)
        c_unit = np.divide(candidates, c_norm[:, None], out=np.zeros_like(candidates), where=c_norm[:, None] > 0)
        return 1.0 - q_unit @ c_unit.T
    diff = queries[:, None, :] - candidates[None, :, :]
    return np.einsum('ijk,ijk->ij', diff, diff)


def knn_select(source_features: FeatureMatrix, pool: MatchingPool, cfg: SelfVcConfig) -> np.ndarray:
    """
    Indices [num_queries x k] of the k nearest pool frames per query, nearest first. Ties go to the lower
    pool index. In same_utterance_excluded mode pool frame j can't serve query i when |i - j| <= exclusion_window.

    :raises EmptyCandidateException: fewer than k candidates remain for a query
    """
    if source_features.dim != pool.features.dim:
        raise SelfVcException(f"Query dimension {source_features.dim} does not match pool dimension "
                              f"{pool.features.dim}.")
    dist = pairwise_distances(source_features.rows, pool.features.rows, cfg.distance)
    if cfg.pool_mode == PoolMode.same_utterance_excluded:
        lags = np.abs(np.arange(dist.shape[0])[:, None] - np.arange(dist.shape[1])[None, :])
        dist[lags <= cfg.exclusion_window] = np.inf
    candidates = np.sum(np.isfinite(dist), axis=1)
    if np.any(candidates < cfg.k):
        worst = int(np.argmin(candidates))
        raise EmptyCandidateException(f"Query frame {worst} has {candidates[worst]} candidates left in a pool of "
                                      f"{pool.size} frames but k is {cfg.k}.")
    return np.argsort(dist, axis=1, kind='stable')[:, :cfg.k]


def average_neighbours(indices: np.ndarray, magnitudes: np.ndarray) -> np.ndarray:
    """mean magnitude frame of each row of indices, summed in ascending pool order"""
    ordered = np.sort(indices, axis=1)
    return np.mean(magnitudes[ordered], axis=1)


def knn_convert(source_features: FeatureMatrix, pool: MatchingPool, cfg: SelfVcConfig = None) -> np.ndarray:
    """
    Converted magnitudes: each source frame replaced by the arithmetic mean of the magnitudes of its k
    nearest pool frames.
    """
    cfg = cfg if cfg is not None else SelfVcConfig()
    indices = knn_select(source_features, pool, cfg)
    logger.debug(f"Matched {source_features.num_frames} frames against pool '{pool.source_id}' "
                 f"({pool.size} frames, k={cfg.k}, {cfg.distance.value}).")
    return average_neighbours(indices, pool.magnitudes)
