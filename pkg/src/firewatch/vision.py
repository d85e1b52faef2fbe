"""Frame transforms and the nighttime fire detector.

Frames are numpy arrays: grayscale ``(h, w)`` or RGB ``(h, w, 3)``, dtype
uint8. The night detector combines four gates over a short clip: bright
region candidates, foreground against a running-average background,
flicker measured by the average magnitude difference function (AMDF), and
a warm-color check. A region must pass all four to count as fire.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
PREPROCESS_SIZE = 240

FRAMES_FORMAT = "firewatch-frames"
FRAMES_VERSION = 1


class FrameError(ValueError):
    """Bad frame geometry or dtype."""


def as_gray(frame: np.ndarray) -> np.ndarray:
    """Luma grayscale; a 2-D frame passes through unchanged."""
    frame = _check_frame(frame)
    if frame.ndim == 2:
        return frame
    r, g, b = LUMA_WEIGHTS
    gray = r * frame[:, :, 0] + g * frame[:, :, 1] + b * frame[:, :, 2]
    return np.rint(gray).astype(np.uint8)


def center_crop_square(frame: np.ndarray) -> np.ndarray:
    h, w = frame.shape[:2]
    side = min(h, w)
    top = (h - side) // 2
    left = (w - side) // 2
    return frame[top:top + side, left:left + side]


def resize_bilinear(frame: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Pixel-center-aligned bilinear resize; exact identity at equal sizes."""
    h, w = frame.shape[:2]
    if (h, w) == (out_h, out_w):
        return frame.copy()
    ys = np.clip((np.arange(out_h) + 0.5) * h / out_h - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * w / out_w - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    if frame.ndim == 3:
        wy = wy[..., None]
        wx = wx[..., None]
    f = frame.astype(float)
    top = (1 - wx) * f[np.ix_(y0, x0)] + wx * f[np.ix_(y0, x1)]
    bottom = (1 - wx) * f[np.ix_(y1, x0)] + wx * f[np.ix_(y1, x1)]
    return np.rint((1 - wy) * top + wy * bottom).astype(np.uint8)


def preprocess(frame: np.ndarray) -> np.ndarray:
    """Grayscale, center-crop to 1:1, resize to 240x240.

    Idempotent: a 240x240 grayscale frame comes back unchanged.
    """
    frame = _check_frame(frame)
    h, w = frame.shape[:2]
    if h < PREPROCESS_SIZE or w < PREPROCESS_SIZE:
        raise FrameError(f"frame {w}x{h} smaller than {PREPROCESS_SIZE}x{PREPROCESS_SIZE}")
    gray = as_gray(frame)
    square = center_crop_square(gray)
    return resize_bilinear(square, PREPROCESS_SIZE, PREPROCESS_SIZE)


@dataclass(frozen=True)
class GridSpec:
    cols: int = 8
    rows: int = 4

    def __post_init__(self):
        if self.cols < 1 or self.rows < 1:
            raise FrameError("grid needs at least one row and column")


def split_grid(frame: np.ndarray, spec: GridSpec = GridSpec()) -> list[np.ndarray]:
    """Tile the frame into rows x cols cells, row-major.

    Cell edges are ``floor(i * size / n)`` so widths/heights differ by at
    most one pixel when the frame does not divide evenly; the cells always
    partition the frame exactly.
    """
    frame = _check_frame(frame)
    h, w = frame.shape[:2]
    if h < spec.rows or w < spec.cols:
        raise FrameError(f"frame {w}x{h} smaller than grid {spec.cols}x{spec.rows}")
    ys = [r * h // spec.rows for r in range(spec.rows + 1)]
    xs = [c * w // spec.cols for c in range(spec.cols + 1)]
    return [
        frame[ys[r]:ys[r + 1], xs[c]:xs[c + 1]]
        for r in range(spec.rows)
        for c in range(spec.cols)
    ]


def join_grid(cells: list[np.ndarray], spec: GridSpec = GridSpec()) -> np.ndarray:
    """Inverse of :func:`split_grid` for partition checks."""
    rows = [
        np.concatenate(cells[r * spec.cols:(r + 1) * spec.cols], axis=1)
        for r in range(spec.rows)
    ]
    return np.concatenate(rows, axis=0)


@dataclass(frozen=True)
class Region:
    """One connected bright component."""

    label: int
    area: int
    bbox: tuple[int, int, int, int]  # (top, left, bottom, right), half-open


def brd_mask(gray: np.ndarray, threshold: int = 180,
             min_region_px: int = 1) -> tuple[np.ndarray, list[Region], np.ndarray]:
    """Bright-region detection: pixels >= threshold, 4-connected components.

    Returns (mask, regions at or above the area floor, labeled array).
    """
    gray = _check_frame(gray)
    if gray.ndim != 2:
        raise FrameError("brd_mask expects a grayscale frame")
    mask = gray >= threshold
    labeled, count = ndimage.label(mask)  # default structure is 4-connectivity
    regions = []
    for label_id, sl in enumerate(ndimage.find_objects(labeled), start=1):
        if sl is None:
            continue
        area = int(np.sum(labeled[sl] == label_id))
        if area >= min_region_px:
            regions.append(Region(
                label=label_id,
                area=area,
                bbox=(sl[0].start, sl[1].start, sl[0].stop, sl[1].stop),
            ))
    return mask, regions, labeled


def amdf_score(series, tau: int) -> float:
    """Average magnitude difference at lag tau, normalized by 255 into [0, 1]."""
    x = np.asarray(series, dtype=float)
    if tau < 1:
        raise ValueError(f"lag must be >= 1, got {tau}")
    if len(x) <= tau:
        raise ValueError(f"series of length {len(x)} too short for lag {tau}")
    return float(np.mean(np.abs(x[:-tau] - x[tau:]))) / 255.0


def flicker_score(series, lags=(1, 2, 3)) -> float:
    """Max AMDF over the configured lag set."""
    usable = [tau for tau in lags if tau < len(series)]
    if not usable:
        raise ValueError("series too short for every lag")
    return max(amdf_score(series, tau) for tau in usable)


class BackgroundModel:
    """Per-pixel exponential running average of grayscale frames."""

    def __init__(self, learning_rate: float = 0.05):
        if not 0.0 < learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        self.learning_rate = learning_rate
        self.background: np.ndarray | None = None

    def observe(self, gray: np.ndarray) -> np.ndarray:
        """Absolute deviation from the background *before* absorbing the frame.

        The first frame initializes the background, so its deviation is zero.
        """
        g = gray.astype(float)
        if self.background is None:
            self.background = g.copy()
            return np.zeros_like(g)
        diff = np.abs(g - self.background)
        self.background += self.learning_rate * (g - self.background)
        return diff


@dataclass(frozen=True)
class NightDetectorConfig:
    brd_threshold: int = 180
    amdf_threshold: float = 0.2
    background_learning_rate: float = 0.05
    min_region_px: int = 25
    color_margin: float = 10.0
    foreground_diff_threshold: float = 25.0
    window_frames: int = 16

    def __post_init__(self):
        if not 0 <= self.brd_threshold <= 255:
            raise ValueError("brd_threshold must be in [0, 255]")
        if not 0.0 <= self.amdf_threshold <= 1.0:
            raise ValueError("amdf_threshold must be in [0, 1]")
        if self.window_frames < 2:
            raise ValueError("window_frames must be >= 2")

    @classmethod
    def from_dict(cls, d: dict) -> "NightDetectorConfig":
        return cls(**d)


@dataclass(frozen=True)
class RegionVerdict:
    region: Region
    bright: bool
    foreground: bool
    flicker: float
    flicker_ok: bool
    color_ok: bool

    @property
    def is_fire(self) -> bool:
        return self.bright and self.foreground and self.flicker_ok and self.color_ok


@dataclass(frozen=True)
class FireVerdict:
    fire: bool
    regions: list[RegionVerdict]


def detect_night_fire(
    frames,
    config: NightDetectorConfig = NightDetectorConfig(),
    background: BackgroundModel | None = None,
) -> FireVerdict:
    """Run the four-gate night detector over one clip of RGB frames.

    Candidate regions come from bright-region detection on the pixelwise
    max over the clip (so a flickering source is caught regardless of
    which phase the last frame lands on). Each candidate must then be
    foreground, flicker above the AMDF threshold, and read warm (mean
    R >= mean G + margin and mean G >= mean B + margin) to count as fire.
    The supplied background model is updated in place frame by frame.
    """
    frames = [np.asarray(f) for f in frames]
    if len(frames) < config.window_frames:
        raise FrameError(f"need at least {config.window_frames} frames, got {len(frames)}")
    shapes = {f.shape for f in frames}
    if len(shapes) != 1:
        raise FrameError(f"mixed frame shapes in window: {sorted(shapes)}")
    if frames[0].ndim != 3:
        raise FrameError("night detector needs RGB frames for the color gate")

    grays = [as_gray(f) for f in frames]
    bg = background if background is not None else BackgroundModel(config.background_learning_rate)
    diffs = [bg.observe(g) for g in grays]

    bright_any = np.maximum.reduce(grays)
    _, regions, labeled = brd_mask(bright_any, config.brd_threshold, config.min_region_px)

    rgb_stack = np.stack(frames).astype(float)     # (t, h, w, 3)
    gray_stack = np.stack(grays).astype(float)     # (t, h, w)
    diff_stack = np.stack(diffs)                   # (t, h, w)

    verdicts = []
    for region in regions:
        mask = labeled == region.label
        series = gray_stack[:, mask].mean(axis=1)
        flicker = flicker_score(series)
        foreground = float(diff_stack[:, mask].mean()) > config.foreground_diff_threshold
        mean_rgb = rgb_stack[:, mask, :].mean(axis=(0, 1))
        color_ok = bool(
            mean_rgb[0] >= mean_rgb[1] + config.color_margin
            and mean_rgb[1] >= mean_rgb[2] + config.color_margin
        )
        verdicts.append(RegionVerdict(
            region=region,
            bright=True,
            foreground=foreground,
            flicker=flicker,
            flicker_ok=flicker > config.amdf_threshold,
            color_ok=color_ok,
        ))
    return FireVerdict(fire=any(v.is_fire for v in verdicts), regions=verdicts)


def write_frames(path: str | Path, frames: list[np.ndarray]):
    """Raw planar frame file: one JSON header line, then channel planes.

    Layout per frame: each channel's full ``h*w`` plane row-major, channels
    in R, G, B order (single plane for grayscale).
    """
    frames = [np.asarray(f, dtype=np.uint8) for f in frames]
    if frames:
        shapes = {f.shape for f in frames}
        if len(shapes) != 1:
            raise FrameError("all frames in a file must share one shape")
        h, w = frames[0].shape[:2]
        channels = 1 if frames[0].ndim == 2 else frames[0].shape[2]
    else:
        h = w = 0
        channels = 1
    header = {
        "format": FRAMES_FORMAT, "version": FRAMES_VERSION,
        "width": w, "height": h, "channels": channels, "count": len(frames),
    }
    with open(path, "wb") as f:
        f.write((json.dumps(header, separators=(",", ":")) + "\n").encode("ascii"))
        for frame in frames:
            if frame.ndim == 2:
                f.write(frame.tobytes())
            else:
                for c in range(channels):
                    f.write(np.ascontiguousarray(frame[:, :, c]).tobytes())


def read_frames(path: str | Path) -> list[np.ndarray]:
    with open(path, "rb") as f:
        header = json.loads(f.readline())
        if header.get("format") != FRAMES_FORMAT or header.get("version") != FRAMES_VERSION:
            raise FrameError(f"not a {FRAMES_FORMAT} v{FRAMES_VERSION} file: {path}")
        h, w, channels, count = (header[k] for k in ("height", "width", "channels", "count"))
        frames = []
        for _ in range(count):
            planes = []
            for _ in range(channels):
                data = f.read(h * w)
                if len(data) != h * w:
                    raise FrameError("truncated frame file")
                planes.append(np.frombuffer(data, dtype=np.uint8).reshape(h, w))
            frames.append(planes[0] if channels == 1 else np.stack(planes, axis=-1))
    return frames


def synth_video(spec: dict) -> list[np.ndarray]:
    """Generate a synthetic RGB clip from a blob spec (test fixtures).

    Spec keys: width, height, frames, background (gray level), optional
    seed (adds uniform noise), and blobs: a list of circles with cx, cy,
    radius, mode ("flicker" alternates level_lo/level_hi per frame,
    "static" holds level_hi), and color (per-channel multipliers).
    """
    width = int(spec["width"])
    height = int(spec["height"])
    count = int(spec["frames"])
    background = int(spec.get("background", 0))
    noise = float(spec.get("noise", 0.0))
    rng = np.random.default_rng(spec.get("seed", 0))
    yy, xx = np.mgrid[0:height, 0:width]

    frames = []
    for t in range(count):
        frame = np.full((height, width, 3), background, dtype=float)
        for blob in spec.get("blobs", []):
            mask = (yy - blob["cy"]) ** 2 + (xx - blob["cx"]) ** 2 <= blob["radius"] ** 2
            if blob.get("mode", "static") == "flicker":
                # Odd frames high so a standard even-length clip ends bright.
                level = blob["level_hi"] if t % 2 == 1 else blob["level_lo"]
            else:
                level = blob["level_hi"]
            color = blob.get("color", [1.0, 1.0, 1.0])
            for c in range(3):
                frame[:, :, c][mask] = level * color[c]
        if noise > 0:
            frame += rng.uniform(-noise, noise, size=frame.shape)
        frames.append(np.clip(np.rint(frame), 0, 255).astype(np.uint8))
    return frames


def _check_frame(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.ndim == 3 and frame.shape[2] != 3:
        raise FrameError(f"RGB frame must have 3 channels, got {frame.shape[2]}")
    if frame.ndim not in (2, 3):
        raise FrameError(f"frame must be 2-D or 3-D, got shape {frame.shape}")
    if frame.dtype != np.uint8:
        raise FrameError(f"frame dtype must be uint8, got {frame.dtype}")
    return frame
