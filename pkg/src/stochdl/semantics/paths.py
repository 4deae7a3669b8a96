"""Sample paths: lazily generated, memoized randomness keyed by a seed.

A path supplies uniforms for random assignment (indexed by draw number)
and standard normals for Brownian increments (indexed by coordinate name
and step). Values are produced in chunks from counter-based generator
streams, so re-querying an index always returns the same value.
"""

from __future__ import annotations

import zlib
from collections import OrderedDict

import numpy as np

CHUNK = 1024
_UNIFORM, _NORMAL, _BRIDGE = 0, 1, 2
_KEEP = 8


def _generate(seed: int, stream: int, coord: int, chunk: int) -> np.ndarray:
    rng = np.random.default_rng([seed, stream, coord, chunk])
    return rng.random(CHUNK) if stream == _UNIFORM else rng.standard_normal(CHUNK)


def coordinate_id(name: str) -> int:
    return zlib.crc32(name.encode())


class SamplePath:
    def __init__(self, seed: int):
        self.seed = int(seed)
        self._chunks: OrderedDict[tuple, np.ndarray] = OrderedDict()

    def _chunk(self, stream: int, coord: int, chunk: int) -> np.ndarray:
        key = (stream, coord, chunk)
        arr = self._chunks.get(key)
        if arr is None:
            arr = _generate(self.seed, stream, coord, chunk)
            self._chunks[key] = arr
            if len(self._chunks) > _KEEP:
                self._chunks.popitem(last=False)
        return arr

    def uniform(self, k: int) -> float:
        """The ``k``-th fresh uniform on [0, 1)."""
        return float(self._chunk(_UNIFORM, 0, k // CHUNK)[k % CHUNK])

    def normal_block(self, coord: str, chunk: int) -> np.ndarray:
        return self._chunk(_NORMAL, coordinate_id(coord), chunk)

    def bridge_block(self, coord: str, chunk: int) -> np.ndarray:
        return self._chunk(_BRIDGE, coordinate_id(coord), chunk)

    def normal(self, coord: str, k: int) -> float:
        """Standard normal driving step ``k`` of Brownian coordinate ``coord``."""
        return float(self.normal_block(coord, k // CHUNK)[k % CHUNK])

    def __repr__(self) -> str:
        return f"SamplePath(seed={self.seed})"


class PathPool:
    """Stacked per-sample randomness for batched evaluation."""

    def __init__(self, paths: list[SamplePath]):
        self.paths = list(paths)
        self._blocks: OrderedDict[tuple, np.ndarray] = OrderedDict()

    def __len__(self) -> int:
        return len(self.paths)

    def _block(self, kind: str, coord: str, chunk: int) -> np.ndarray:
        key = (kind, coord, chunk)
        block = self._blocks.get(key)
        if block is None:
            stream = _NORMAL if kind == "n" else _BRIDGE
            cid = coordinate_id(coord)
            if len(self.paths) == 1:
                block = self.paths[0]._chunk(stream, cid, chunk)[None, :]
            else:
                block = np.stack([_generate(p.seed, stream, cid, chunk) for p in self.paths])
            self._blocks[key] = block
            if len(self._blocks) > _KEEP:
                self._blocks.popitem(last=False)
        else:
            self._blocks.move_to_end(key)
        return block

    def normals(self, coord: str, k: int, sid: np.ndarray) -> np.ndarray:
        return self._block("n", coord, k // CHUNK)[sid, k % CHUNK]

    def bridges(self, coord: str, k: int, sid: np.ndarray) -> np.ndarray:
        return self._block("b", coord, k // CHUNK)[sid, k % CHUNK]

    def uniforms(self, sid: np.ndarray, draws: np.ndarray) -> np.ndarray:
        return np.array([self.paths[s].uniform(int(k)) for s, k in zip(sid, draws)], dtype=float)
