"""Deterministic direct-lighting renderer.

Produces linear-RGB HDR component images (single-light-only, ambient-only)
that the compositor combines into training pairs.  Direct lighting only:
per-light images then compose additively, which is the property the pair
synthesis relies on.

Determinism contract: every Monte-Carlo draw comes from a counter-based
hash of (seed, stream, pixel, sample), so identical inputs give bit-identical
images regardless of tiling or thread count.

Radiometric conventions:

* a ``point_sphere`` light of total power E has intensity ``E / (4 pi)``;
  its surface is sampled uniformly at radius ``radius`` for soft shadows;
* an ``area_spread`` light is a disk of radius ``radius`` aimed at ``aim``,
  emitting with a cosine-lobe exponent mapped from ``spread_deg`` (90 deg =
  Lambertian, smaller spreads concentrate the beam), normalized so the total
  emitted power is E;
* ``env_constant`` / ``env_map`` give incident radiance per direction, and
  the ``energy`` field scales it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .geometry import normalize, orthonormal_basis_batch
from .scene import Box, Camera, LightSpec, Plane, Scene, Sphere

_AMBIENT_STREAM = 1 << 32  # stream id reserved for hemisphere sampling


@dataclass(frozen=True)
class LinearImage:
    """HDR linear-RGB pixel buffer, row-major, row 0 at the top."""

    pixels: np.ndarray  # (height, width, 3) float32, all finite and >= 0

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float32)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) pixel array, got {px.shape}")
        if not np.all(np.isfinite(px)) or np.any(px < 0):
            raise ValueError("pixel values must be finite and >= 0")
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class RenderSettings:
    shadow_samples: int = 16
    env_samples: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.shadow_samples < 1 or self.env_samples < 1:
            raise ValueError("sample counts must be >= 1")


# ---------------------------------------------------------------------------
# ray/primitive intersection

_T_MAX = np.inf


def _ray_eps(origins: np.ndarray) -> np.ndarray:
    # scale-aware bias against self-intersection; float64 noise is ~1e-16 relative
    return 1e-9 * (1.0 + np.linalg.norm(origins, axis=-1))


def _intersect_sphere(sph: Sphere, o: np.ndarray, d: np.ndarray, t_min: np.ndarray):
    oc = o - sph.center
    b = np.sum(oc * d, axis=1)
    c = np.sum(oc * oc, axis=1) - sph.radius**2
    disc = b * b - c
    ok = disc >= 0.0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t0 = -b - sq
    t1 = -b + sq
    t = np.where(t0 > t_min, t0, t1)
    t = np.where(ok & (t > t_min), t, _T_MAX)
    return t

def _intersect_plane(pl: Plane, o: np.ndarray, d: np.ndarray, t_min: np.ndarray):
    dn = d @ pl.normal
    num = (pl.point - o) @ pl.normal
    with np.errstate(divide="ignore", invalid="ignore"):
        t = num / dn
    t = np.where((dn != 0.0) & (t > t_min), t, _T_MAX)
    return t

def _intersect_box(bx: Box, o: np.ndarray, d: np.ndarray, t_min: np.ndarray):
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / d
        ta = (bx.min - o) * inv
        tb = (bx.max - o) * inv
    lo = np.minimum(ta, tb)
    hi = np.maximum(ta, tb)
    # rays parallel to a slab: inside -> (-inf, inf), outside -> empty
    par = d == 0.0
    inside = (o >= bx.min) & (o <= bx.max)
    lo = np.where(par, np.where(inside, -np.inf, np.inf), lo)
    hi = np.where(par, np.where(inside, np.inf, -np.inf), hi)
    t_near = lo.max(axis=1)
    t_far = hi.min(axis=1)
    ok = t_near <= t_far
    t = np.where(t_near > t_min, t_near, t_far)
    return np.where(ok & (t > t_min), t, _T_MAX)


def _box_normal(bx: Box, x: np.ndarray) -> np.ndarray:
    # face whose plane the hit point is closest to
    d_min = np.abs(x - bx.min)
    d_max = np.abs(x - bx.max)
    n = np.zeros_like(x)
    all_d = np.concatenate([d_min, d_max], axis=1)
    face = np.argmin(all_d, axis=1)
    rows = np.arange(x.shape[0])
    axis = face % 3
    sign = np.where(face < 3, -1.0, 1.0)
    n[rows, axis] = sign
    return n


def intersect_rays(scene: Scene, origins: np.ndarray, dirs: np.ndarray):
    """Nearest hit of each ray against the scene.

    Returns (t, normal, albedo, hit) arrays; normals are flipped to face the
    ray origin, t is +inf where there is no hit.
    """
    n_rays = origins.shape[0]
    t_min = _ray_eps(origins)
    best_t = np.full(n_rays, _T_MAX)
    best_idx = np.full(n_rays, -1, dtype=np.int64)
    for i, prim in enumerate(scene.primitives):
        if isinstance(prim, Sphere):
            t = _intersect_sphere(prim, origins, dirs, t_min)
        elif isinstance(prim, Plane):
            t = _intersect_plane(prim, origins, dirs, t_min)
        else:
            t = _intersect_box(prim, origins, dirs, t_min)
        closer = t < best_t
        best_t = np.where(closer, t, best_t)
        best_idx = np.where(closer, i, best_idx)

    hit = best_idx >= 0
    normals = np.zeros((n_rays, 3))
    albedo = np.zeros((n_rays, 3))
    x = origins + best_t[:, None] * dirs
    for i, prim in enumerate(scene.primitives):
        sel = best_idx == i
        if not np.any(sel):
            continue
        if isinstance(prim, Sphere):
            n = (x[sel] - prim.center) / prim.radius
        elif isinstance(prim, Plane):
            n = np.broadcast_to(prim.normal, (int(sel.sum()), 3)).copy()
        else:
            n = _box_normal(prim, x[sel])
        normals[sel] = n
        albedo[sel] = prim.albedo
    # shading normal faces the incoming ray
    flip = np.sum(normals * dirs, axis=1) > 0.0
    normals[flip] *= -1.0
    return best_t, normals, albedo, hit


def intersect(scene: Scene, origin, direction):
    """Single-ray convenience wrapper: (t, normal, albedo) or None."""
    o = np.asarray(origin, dtype=np.float64)[None, :]
    d = np.asarray(direction, dtype=np.float64)
    if np.all(d == 0):
        raise ValueError("ray direction must be non-zero")
    d = (d / np.linalg.norm(d))[None, :]
    t, n, a, hit = intersect_rays(scene, o, d)
    if not hit[0]:
        return None
    return float(t[0]), n[0], a[0]


def _occluded(scene: Scene, origins: np.ndarray, dirs_unit: np.ndarray, t_max: np.ndarray) -> np.ndarray:
    """True where any primitive blocks the segment (eps, t_max * (1 - eps))."""
    t_min = _ray_eps(origins)
    limit = t_max * (1.0 - 1e-9)
    blocked = np.zeros(origins.shape[0], dtype=bool)
    for prim in scene.primitives:
        if isinstance(prim, Sphere):
            t = _intersect_sphere(prim, origins, dirs_unit, t_min)
        elif isinstance(prim, Plane):
            t = _intersect_plane(prim, origins, dirs_unit, t_min)
        else:
            t = _intersect_box(prim, origins, dirs_unit, t_min)
        blocked |= t < limit
    return blocked


# ---------------------------------------------------------------------------
# camera rays


def camera_rays(camera: Camera, rows: slice | None = None):
    """Primary ray origins/directions for all pixels (optionally a row block)."""
    w, h = camera.resolution
    fwd = normalize(camera.look_at - camera.position)
    right = normalize(np.cross(fwd, camera.up))
    up = np.cross(right, fwd)
    half_h = np.tan(np.deg2rad(camera.vertical_fov_deg) / 2.0)
    half_w = half_h * w / h
    ys = np.arange(h)[rows] if rows is not None else np.arange(h)
    xs = np.arange(w)
    px, py = np.meshgrid(xs, ys)
    ndc_x = (px + 0.5) / w * 2.0 - 1.0
    ndc_y = 1.0 - (py + 0.5) / h * 2.0
    d = (
        fwd[None, None, :]
        + ndc_x[..., None] * half_w * right[None, None, :]
        + ndc_y[..., None] * half_h * up[None, None, :]
    )
    d = d / np.linalg.norm(d, axis=-1, keepdims=True)
    origins = np.broadcast_to(camera.position, d.shape).reshape(-1, 3).copy()
    flat_index = (py * w + px).reshape(-1)
    return origins, d.reshape(-1, 3), flat_index


def hit_mask(scene: Scene, camera: Camera) -> np.ndarray:
    """Foreground mask: pixels whose primary ray hits any primitive."""
    o, d, _ = camera_rays(camera)
    _, _, _, hit = intersect_rays(scene, o, d)
    w, h = camera.resolution
    return hit.reshape(h, w)


# ---------------------------------------------------------------------------
# light sampling


def _sphere_dirs(seed: int, stream: int, pix: np.ndarray, sample: int, n_samples: int) -> np.ndarray:
    """Stratified uniform directions on the unit sphere, one per pixel."""
    u1 = rng.uniform(seed, stream, pix, 2 * sample)
    u2 = rng.uniform(seed, stream, pix, 2 * sample + 1)
    cos_t = 2.0 * (sample + u1) / n_samples - 1.0  # stratified in cos(theta)
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t * cos_t))
    phi = 2.0 * np.pi * u2
    return np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=1)


def _disk_points(seed: int, stream: int, pix: np.ndarray, sample: int, n_samples: int) -> np.ndarray:
    """Stratified points on the unit disk (local z = 0 plane)."""
    u1 = rng.uniform(seed, stream, pix, 2 * sample)
    u2 = rng.uniform(seed, stream, pix, 2 * sample + 1)
    r = np.sqrt((sample + u1) / n_samples)
    phi = 2.0 * np.pi * u2
    return np.stack([r * np.cos(phi), r * np.sin(phi), np.zeros_like(r)], axis=1)


def _spread_exponent(spread_deg: float) -> float:
    # 90 deg -> 0 (Lambertian disk); smaller spreads tighten the cosine lobe
    return (90.0 / spread_deg) ** 2 - 1.0


def _shade_point_sphere(scene, light, x, n, alb, pix, settings, stream, frame):
    ns = settings.shadow_samples
    total = np.zeros((x.shape[0], 3))
    intensity = light.energy / (4.0 * np.pi) * light.color
    for s in range(ns):
        if light.radius > 0.0:
            u = _sphere_dirs(settings.seed, stream, pix, s, ns)
            q = light.position + light.radius * (u @ frame.T)
        else:
            q = np.broadcast_to(light.position, x.shape)
        vec = q - x
        dist = np.linalg.norm(vec, axis=1)
        w = vec / dist[:, None]
        cos_t = np.maximum(0.0, np.sum(n * w, axis=1))
        live = cos_t > 0.0
        vis = np.zeros(x.shape[0])
        if np.any(live):
            vis[live] = ~_occluded(scene, x[live], w[live], dist[live])
        total += (alb / np.pi) * intensity[None, :] * (cos_t * vis / dist**2)[:, None]
    return total / ns


def _shade_area_spread(scene, light, x, n, alb, pix, settings, stream, frame):
    ns = settings.shadow_samples
    # disk normal aims at light.aim; the basis is built in the canonical frame
    # and mapped through `frame` so samples correspond under rig transforms
    axis_world = normalize(light.aim - light.position) if np.linalg.norm(light.aim - light.position) > 0 else np.array([0.0, -1.0, 0.0])
    axis_canon = frame.T @ axis_world
    t_c, b_c = orthonormal_basis_batch(axis_canon[None, :])
    basis_canon = np.stack([t_c[0], b_c[0], axis_canon], axis=1)  # columns: tangent, bitangent, normal
    basis = frame @ basis_canon
    m = _spread_exponent(light.spread_deg)
    area = np.pi * light.radius**2
    # radiance L(gamma) = L0 cos^m(gamma); total power = area * L0 * 2 pi / (m + 2)
    l0 = light.energy * (m + 2.0) / (2.0 * np.pi * area)
    total = np.zeros((x.shape[0], 3))
    for s in range(ns):
        local = _disk_points(settings.seed, stream, pix, s, ns)
        q = light.position + light.radius * (local[:, :1] * basis[:, 0][None, :] + local[:, 1:2] * basis[:, 1][None, :])
        vec = x - q
        dist = np.linalg.norm(vec, axis=1)
        w_out = vec / dist[:, None]  # emitter -> surface
        cos_e = np.sum(w_out * basis[:, 2][None, :], axis=1)
        cos_s = np.maximum(0.0, -np.sum(n * w_out, axis=1))
        live = (cos_e > 0.0) & (cos_s > 0.0)
        vis = np.zeros(x.shape[0])
        if np.any(live):
            vis[live] = ~_occluded(scene, x[live], -w_out[live], dist[live])
        radiance = l0 * np.power(np.maximum(cos_e, 0.0), m)
        geom = cos_e * cos_s / dist**2
        total += (alb / np.pi) * light.color[None, :] * (radiance * geom * vis * area)[:, None]
    return total / ns


def _render_rows(scene, camera, light, settings, stream, frame, rows):
    o, d, pix = camera_rays(camera, rows)
    t, n, alb, hit = intersect_rays(scene, o, d)
    out = np.zeros((o.shape[0], 3))
    if np.any(hit):
        x = o[hit] + t[hit, None] * d[hit]
        if light.kind == "point_sphere":
            out[hit] = _shade_point_sphere(scene, light, x, n[hit], alb[hit], pix[hit], settings, stream, frame)
        else:
            out[hit] = _shade_area_spread(scene, light, x, n[hit], alb[hit], pix[hit], settings, stream, frame)
    return out


def _run_tiled(per_rows, height: int, width: int, threads: int) -> np.ndarray:
    out = np.zeros((height, width, 3))
    if threads <= 1:
        out[:] = per_rows(slice(0, height)).reshape(height, width, 3)
        return out
    n_tiles = min(threads * 4, height)
    bounds = np.linspace(0, height, n_tiles + 1, dtype=int)
    def work(i):
        lo, hi = bounds[i], bounds[i + 1]
        if lo < hi:
            out[lo:hi] = per_rows(slice(lo, hi)).reshape(hi - lo, width, 3)
    with ThreadPoolExecutor(max_workers=threads) as ex:
        list(ex.map(work, range(n_tiles)))
    return out


def render_light_component(
    scene: Scene,
    camera: Camera,
    light: LightSpec,
    settings: RenderSettings,
    stream: int = 0,
    sample_frame: np.ndarray | None = None,
    threads: int = 1,
) -> LinearImage:
    """Outgoing radiance from a single point/area light, no ambient term.

    ``stream`` separates RNG streams of different lights in a multi-light
    render.  ``sample_frame`` is a rotation applied to the canonical sample
    pattern; passing the placement rotation reproduces the exact same sample
    correspondence after a Sim(3) rig transform.
    """
    if light.kind not in ("point_sphere", "area_spread"):
        raise ValueError(f"render_light_component does not accept kind {light.kind!r}")
    frame = np.eye(3) if sample_frame is None else np.asarray(sample_frame, dtype=np.float64)
    w, h = camera.resolution
    per_rows = lambda rows: _render_rows(scene, camera, light, settings, stream, frame, rows)
    return LinearImage(_run_tiled(per_rows, h, w, threads))


def _cosine_dirs(n: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    t, b = orthonormal_basis_batch(n)
    r = np.sqrt(u1)
    phi = 2.0 * np.pi * u2
    z = np.sqrt(np.maximum(0.0, 1.0 - u1))
    return r[:, None] * (np.cos(phi)[:, None] * t + np.sin(phi)[:, None] * b) + z[:, None] * n


def _ambient_rows(scene, camera, ambient, settings, rows):
    o, d, pix = camera_rays(camera, rows)
    t, n, alb, hit = intersect_rays(scene, o, d)
    out = np.zeros((o.shape[0], 3))
    if not np.any(hit):
        return out
    x = o[hit] + t[hit, None] * d[hit]
    nh, ah, ph = n[hit], alb[hit], pix[hit]
    ns = settings.env_samples
    acc = np.zeros((x.shape[0], 3))
    for s in range(ns):
        u1 = rng.uniform(settings.seed, _AMBIENT_STREAM, ph, 2 * s)
        u2 = rng.uniform(settings.seed, _AMBIENT_STREAM, ph, 2 * s + 1)
        u1 = (s + u1) / ns  # stratify the cosine-weighted radius
        w_dir = _cosine_dirs(nh, u1, u2)
        open_sky = ~_occluded(scene, x, w_dir, np.full(x.shape[0], np.inf))
        if ambient.kind == "env_constant":
            radiance = np.broadcast_to(ambient.energy * ambient.color, (x.shape[0], 3))
        else:
            radiance = ambient.energy * ambient.color[None, :] * ambient.envmap.lookup(w_dir)
        acc += radiance * open_sky[:, None]
    out[hit] = ah * acc / ns
    return out


def render_ambient(
    scene: Scene,
    camera: Camera,
    ambient: LightSpec,
    settings: RenderSettings,
    threads: int = 1,
) -> LinearImage:
    """Lambertian shading under environment lighting (constant or lat-long map).

    Cosine-weighted hemisphere sampling with shadow rays; with no occluders a
    constant environment of radiance L gives exactly albedo * L in expectation.
    """
    if ambient.kind not in ("env_constant", "env_map"):
        raise ValueError(f"render_ambient does not accept kind {ambient.kind!r}")
    if ambient.kind == "env_map" and ambient.envmap is None:
        raise ValueError("env_map light requires an attached envmap")
    w, h = camera.resolution
    per_rows = lambda rows: _ambient_rows(scene, camera, ambient, settings, rows)
    return LinearImage(_run_tiled(per_rows, h, w, threads))


def render_full(
    scene: Scene,
    camera: Camera,
    lights: list[LightSpec],
    ambient: LightSpec | None,
    settings: RenderSettings,
    threads: int = 1,
) -> LinearImage:
    """Ambient plus the sum of per-light components, matched per-light RNG streams."""
    w, h = camera.resolution
    total = np.zeros((h, w, 3), dtype=np.float32)
    if ambient is not None:
        total = total + render_ambient(scene, camera, ambient, settings, threads=threads).pixels
    for i, light in enumerate(lights):
        total = total + render_light_component(scene, camera, light, settings, stream=i, threads=threads).pixels
    return LinearImage(total)


__all__ = [
    "LinearImage",
    "RenderSettings",
    "camera_rays",
    "hit_mask",
    "intersect",
    "intersect_rays",
    "render_ambient",
    "render_full",
    "render_light_component",
]
