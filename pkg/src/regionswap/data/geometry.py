"""Region extraction from portrait photographs.

Source photographs are 178 x 218 (width x height) with 68 facial
landmarks. The face region is the convex hull of the 41 landmarks
covering nose, eyes and mouth (indices 27 through 67), stretched 1.3x
horizontally and 1.4x vertically about the hull's area centroid. Two
fixed square windows crop the regions: the face window has its top-left
corner at (30, 70) with size 118, the hair window at (0, 20) with size
178. Masked-out pixels are filled with black.
"""
from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw
from scipy.spatial import ConvexHull

from ..images import resize_image, resize_mask

SOURCE_WIDTH = 178
SOURCE_HEIGHT = 218
N_LANDMARKS = 68
FACE_POINT_START = 27  # nose bridge; eyes and mouth follow
FACE_POINT_STOP = 68
FACE_WINDOW = ((30, 70), 118)  # (left, top), side
HAIR_WINDOW = ((0, 20), 178)
STRETCH_X = 1.3
STRETCH_Y = 1.4


def face_points(landmarks: np.ndarray) -> np.ndarray:
    pts = np.asarray(landmarks, dtype=np.float64)
    if pts.shape != (N_LANDMARKS, 2):
        raise ValueError(f"need ({N_LANDMARKS}, 2) landmarks, got {pts.shape}")
    return pts[FACE_POINT_START:FACE_POINT_STOP]


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Hull vertices in counter-clockwise order."""
    hull = ConvexHull(np.asarray(points, dtype=np.float64))
    return hull.points[hull.vertices]


def polygon_area_centroid(poly: np.ndarray) -> tuple[float, float]:
    """Area centroid by the shoelace formula; falls back to the vertex
    mean for degenerate (near zero area) polygons."""
    x = poly[:, 0]
    y = poly[:, 1]
    x2 = np.roll(x, -1)
    y2 = np.roll(y, -1)
    cross = x * y2 - x2 * y
    area = 0.5 * cross.sum()
    if abs(area) < 1e-9:
        return float(x.mean()), float(y.mean())
    cx = ((x + x2) * cross).sum() / (6.0 * area)
    cy = ((y + y2) * cross).sum() / (6.0 * area)
    return float(cx), float(cy)


def stretch_polygon(
    poly: np.ndarray, sx: float = STRETCH_X, sy: float = STRETCH_Y
) -> np.ndarray:
    cx, cy = polygon_area_centroid(poly)
    out = np.asarray(poly, dtype=np.float64).copy()
    out[:, 0] = cx + sx * (out[:, 0] - cx)
    out[:, 1] = cy + sy * (out[:, 1] - cy)
    return out


def rasterize_polygon(poly: np.ndarray, width: int, height: int) -> np.ndarray:
    """Filled polygon as a {0,1} float32 (height, width) mask."""
    canvas = Image.new("L", (width, height), 0)
    ImageDraw.Draw(canvas).polygon([(float(x), float(y)) for x, y in poly], fill=1)
    return np.asarray(canvas, dtype=np.float32)


def face_mask_from_landmarks(
    landmarks: np.ndarray, width: int = SOURCE_WIDTH, height: int = SOURCE_HEIGHT
) -> np.ndarray:
    hull = convex_hull(face_points(landmarks))
    return rasterize_polygon(stretch_polygon(hull), width, height)


def crop_window(img: np.ndarray, window: tuple[tuple[int, int], int]) -> np.ndarray:
    (left, top), side = window
    if img.shape[0] < top + side or img.shape[1] < left + side:
        raise ValueError(
            f"image {img.shape[:2]} too small for window {window}"
        )
    return img[top : top + side, left : left + side]


def face_window_in_hair_frame(resolution: int) -> tuple[float, float, float]:
    """(left, top, side) of the face window inside the hair crop, scaled
    to an output of the given resolution."""
    (f_left, f_top), f_side = FACE_WINDOW
    (h_left, h_top), h_side = HAIR_WINDOW
    scale = resolution / h_side
    return (f_left - h_left) * scale, (f_top - h_top) * scale, f_side * scale


def build_sample(
    image01: np.ndarray,
    landmarks: np.ndarray,
    fg_mask: np.ndarray,
    resolution: int,
) -> dict[str, np.ndarray]:
    """Full pipeline for one photograph.

    ``image01`` is (218, 178, 3) in [0, 1]; ``fg_mask`` is a (218, 178)
    person mask with 1 on the subject. Returns [0, 1] HWC arrays ``x``,
    ``x_f``, ``x_h``, the background mask ``m_bg`` and the face mask
    cropped to the hair window, all at resolution x resolution.
    """
    if image01.shape[:2] != (SOURCE_HEIGHT, SOURCE_WIDTH):
        raise ValueError(
            f"expected {SOURCE_HEIGHT}x{SOURCE_WIDTH} input, got {image01.shape[:2]}"
        )
    face_mask = face_mask_from_landmarks(landmarks)
    bg_mask = 1.0 - (np.asarray(fg_mask, dtype=np.float32) > 0.5).astype(np.float32)

    # masks are applied after resizing so the blanked areas are exactly
    # black under the resized masks, with no bilinear halo
    x = resize_image(crop_window(image01, HAIR_WINDOW), resolution)
    face_mask_hair = resize_mask(crop_window(face_mask, HAIR_WINDOW), resolution)
    face_mask_face = resize_mask(crop_window(face_mask, FACE_WINDOW), resolution)
    x_f = resize_image(crop_window(image01, FACE_WINDOW), resolution)

    return {
        "x": x,
        "x_f": x_f * face_mask_face[..., None],
        "x_h": x * (1.0 - face_mask_hair)[..., None],
        "m_bg": resize_mask(crop_window(bg_mask, HAIR_WINDOW), resolution),
        "face_mask": face_mask_hair,
    }
