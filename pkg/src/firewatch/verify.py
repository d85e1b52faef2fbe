"""Pluggable smoke verification.

The gateway never trusts sensor fusion alone: after aiming the camera it
asks a verifier to confirm smoke/fire in the viewed sector. Verifiers
implement one method, ``verify(request)``, and come in three flavors: a
scripted mock for unit tests, a scene-coupled mock that consults the
simulation's ground truth, and a remote client that ships preprocessed
grid cells to an external model endpoint.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import requests

from firewatch.vision import GridSpec, preprocess, split_grid

# Synthetic verification latency default, matching the measured inference
# time of the full-size model this verifier stands in for (~1.7 min).
DEFAULT_VERIFY_LATENCY_MS = 102_000


class VerifierError(RuntimeError):
    """Verification could not be completed (timeouts, bad responses...)."""


@dataclass(frozen=True)
class VerifierVerdict:
    """Per-grid-cell smoke flags; ``overall`` is their OR."""

    cells: tuple[tuple[bool, ...], ...]
    latency_ms: int

    @property
    def overall(self) -> bool:
        return any(any(row) for row in self.cells)

    @classmethod
    def uniform(cls, value: bool, grid: GridSpec = GridSpec(),
                latency_ms: int = DEFAULT_VERIFY_LATENCY_MS) -> "VerifierVerdict":
        return cls(cells=tuple((value,) * grid.cols for _ in range(grid.rows)),
                   latency_ms=latency_ms)

    def to_lists(self) -> list[list[bool]]:
        return [list(row) for row in self.cells]


@dataclass
class VerificationRequest:
    """Everything a verifier might need; mocks ignore most of it."""

    grid: GridSpec = field(default_factory=GridSpec)
    cell_windows: list[list[np.ndarray]] | None = None  # row-major, per cell
    camera_azimuth_deg: float = 0.0
    t_ms: int = 0


class MockVerifier:
    """Returns scripted verdicts in order, repeating the last one forever."""

    def __init__(self, scripted: list[VerifierVerdict] | VerifierVerdict,
                 latency_ms: int = DEFAULT_VERIFY_LATENCY_MS):
        if isinstance(scripted, VerifierVerdict):
            scripted = [scripted]
        if not scripted:
            raise ValueError("need at least one scripted verdict")
        self._script = list(scripted)
        self._i = 0
        self.latency_ms = latency_ms

    def verify(self, request: VerificationRequest) -> VerifierVerdict:
        verdict = self._script[min(self._i, len(self._script) - 1)]
        self._i += 1
        return VerifierVerdict(cells=verdict.cells, latency_ms=self.latency_ms)


class SceneVerifier:
    """Ground-truth mock: positive iff the camera is aimed at an active fire.

    ``fire_azimuths`` is a callback into the running simulation returning
    the azimuths of currently burning fires; the pipeline binds it to its
    scene automatically via :meth:`bind_scene`. The flagged cell is the
    grid column under the fire bearing, middle row.
    """

    def __init__(self, fire_azimuths: Callable[[], list[float]] | None = None,
                 fov_deg: float = 62.0, grid: GridSpec = GridSpec(),
                 latency_ms: int = DEFAULT_VERIFY_LATENCY_MS):
        self.fire_azimuths = fire_azimuths
        self.fov_deg = fov_deg
        self.grid = grid
        self.latency_ms = latency_ms

    def bind_scene(self, scene):
        self.fire_azimuths = lambda: [f.azimuth_deg for f in scene.active_fires()]

    def verify(self, request: VerificationRequest) -> VerifierVerdict:
        if self.fire_azimuths is None:
            raise VerifierError("scene verifier is not bound to a scene")
        cells = [[False] * self.grid.cols for _ in range(self.grid.rows)]
        for az in self.fire_azimuths():
            offset = (az - request.camera_azimuth_deg + 180.0) % 360.0 - 180.0
            if abs(offset) <= self.fov_deg / 2.0:
                col = int((offset + self.fov_deg / 2.0) / self.fov_deg * self.grid.cols)
                col = min(col, self.grid.cols - 1)
                cells[self.grid.rows // 2][col] = True
        return VerifierVerdict(cells=tuple(tuple(row) for row in cells),
                               latency_ms=self.latency_ms)


class RemoteVerifier:
    """HTTP client for an external smoke model.

    Request body: ``{"grid": {"rows": R, "cols": C}, "cells": [b64...]}``
    where each cell entry is the base64 of that cell's preprocessed
    240x240 grayscale frames concatenated frame-major. Response body:
    ``{"cells": [[bool, ...], ...]}`` with R rows of C flags.
    """

    def __init__(self, url: str, timeout_s: float = 30.0):
        self.url = url
        self.timeout_s = timeout_s

    def verify(self, request: VerificationRequest) -> VerifierVerdict:
        if request.cell_windows is None:
            raise VerifierError("remote verification needs frames")
        body = {
            "grid": {"rows": request.grid.rows, "cols": request.grid.cols},
            "cells": [
                base64.b64encode(b"".join(f.tobytes() for f in window)).decode("ascii")
                for window in request.cell_windows
            ],
        }
        try:
            resp = requests.post(self.url, json=body, timeout=self.timeout_s)
        except requests.RequestException as e:
            raise VerifierError(f"remote verifier unreachable: {e}") from e
        if resp.status_code != 200:
            raise VerifierError(f"remote verifier returned HTTP {resp.status_code}")
        try:
            cells = resp.json()["cells"]
            verdict_cells = tuple(tuple(bool(v) for v in row) for row in cells)
        except (ValueError, KeyError, TypeError) as e:
            raise VerifierError(f"remote verifier sent a malformed response: {e}") from e
        if len(verdict_cells) != request.grid.rows or any(
            len(row) != request.grid.cols for row in verdict_cells
        ):
            raise VerifierError("remote verdict grid shape mismatch")
        return VerifierVerdict(cells=verdict_cells,
                               latency_ms=int(resp.elapsed.total_seconds() * 1000))


def verify_smoke(frames, verifier, grid: GridSpec = GridSpec(),
                 camera_azimuth_deg: float = 0.0, t_ms: int = 0) -> VerifierVerdict:
    """Split each frame into grid cells, preprocess, and ask the verifier.

    ``frames`` may be None for verifiers that do not look at pixels.
    """
    cell_windows = None
    if frames is not None:
        per_frame_cells = [split_grid(np.asarray(f), grid) for f in frames]
        cell_windows = [
            [preprocess(frame_cells[i]) for frame_cells in per_frame_cells]
            for i in range(grid.rows * grid.cols)
        ]
    request = VerificationRequest(grid=grid, cell_windows=cell_windows,
                                  camera_azimuth_deg=camera_azimuth_deg, t_ms=t_ms)
    return verifier.verify(request)
