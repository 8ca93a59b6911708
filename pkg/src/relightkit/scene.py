"""Scene, camera, light, and lighting-edit domain types.

All types are immutable value objects; arrays are defensively copied and
frozen at construction so instances can be shared across threads.

Canonical-rig conventions (declared constants, used by the rig transforms
and the tokenizer):

* light-sampling cube: ``[-1, 1]^3`` centered at the origin,
* canonical camera: position ``(0, 0, 2.5)`` looking at the origin with
  up ``(0, 1, 0)`` and a vertical field of view of 39.6 degrees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import is_rotation, normalize, vec3

CANONICAL_CENTER = np.zeros(3)
CANONICAL_CUBE_MIN = np.array([-1.0, -1.0, -1.0])
CANONICAL_CUBE_MAX = np.array([1.0, 1.0, 1.0])
CANONICAL_CAMERA_POSITION = np.array([0.0, 0.0, 2.5])
CANONICAL_FOV_DEG = 39.6
AMBIENT_SCALE_MAX = 2.0

LIGHT_KINDS = ("point_sphere", "area_spread", "env_constant", "env_map")
EDIT_MODES = ("ambient", "diffuse", "spatial", "visible", "multi")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# geometry primitives


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float
    albedo: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(vec3(self.center)))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "albedo", _frozen(vec3(self.albedo)))


@dataclass(frozen=True)
class Plane:
    point: np.ndarray
    normal: np.ndarray
    albedo: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", _frozen(vec3(self.point)))
        n = vec3(self.normal)
        # normals are normalized on load; zero normals are caught by validate_scene
        if np.linalg.norm(n) > 0:
            n = normalize(n)
        object.__setattr__(self, "normal", _frozen(n))
        object.__setattr__(self, "albedo", _frozen(vec3(self.albedo)))


@dataclass(frozen=True)
class Box:
    min: np.ndarray
    max: np.ndarray
    albedo: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "min", _frozen(vec3(self.min)))
        object.__setattr__(self, "max", _frozen(vec3(self.max)))
        object.__setattr__(self, "albedo", _frozen(vec3(self.albedo)))


Primitive = Sphere | Plane | Box


@dataclass(frozen=True)
class Scene:
    primitives: tuple[Primitive, ...]

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))


@dataclass(frozen=True)
class Camera:
    position: np.ndarray
    look_at: np.ndarray
    up: np.ndarray = (0.0, 1.0, 0.0)
    vertical_fov_deg: float = CANONICAL_FOV_DEG
    resolution: tuple[int, int] = (64, 64)  # (width, height)

    def __post_init__(self):
        object.__setattr__(self, "position", _frozen(vec3(self.position)))
        object.__setattr__(self, "look_at", _frozen(vec3(self.look_at)))
        object.__setattr__(self, "up", _frozen(vec3(self.up)))
        object.__setattr__(self, "vertical_fov_deg", float(self.vertical_fov_deg))
        w, h = self.resolution
        object.__setattr__(self, "resolution", (int(w), int(h)))
        if np.allclose(self.position, self.look_at):
            raise ValueError("camera position and look_at coincide")
        if not (0.0 < self.vertical_fov_deg < 180.0):
            raise ValueError("vertical_fov_deg must be in (0, 180)")


@dataclass(frozen=True)
class LightSpec:
    """One light source.

    ``energy`` is total emitted power for point/area kinds; for the env
    kinds it is the (scalar) radiance scale.  ``radius`` is the emitter
    sphere radius governing shadow softness for ``point_sphere`` and the
    disk radius for ``area_spread``.  ``aim`` is the point an area light
    faces (defaults to the canonical cube center).  Lights may intersect
    scene geometry; visibility handles it.
    """

    kind: str
    position: np.ndarray = (0.0, 0.0, 0.0)
    energy: float = 1.0
    radius: float = 0.0
    spread_deg: float = 90.0
    color: np.ndarray = (1.0, 1.0, 1.0)
    aim: np.ndarray = (0.0, 0.0, 0.0)
    envmap: Optional["object"] = None  # EnvMap, only for kind == "env_map"

    def __post_init__(self):
        if self.kind not in LIGHT_KINDS:
            raise ValueError(f"unknown light kind {self.kind!r}")
        object.__setattr__(self, "position", _frozen(vec3(self.position)))
        object.__setattr__(self, "energy", float(self.energy))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "spread_deg", float(self.spread_deg))
        object.__setattr__(self, "color", _frozen(vec3(self.color)))
        object.__setattr__(self, "aim", _frozen(vec3(self.aim)))
        if self.energy < 0:
            raise ValueError("light energy must be >= 0")
        if self.radius < 0:
            raise ValueError("light radius must be >= 0")
        if self.kind == "area_spread" and not (0.0 < self.spread_deg <= 90.0):
            raise ValueError("spread_deg must be in (0, 90]")


@dataclass(frozen=True)
class Sim3Placement:
    """Similarity transform placing the canonical cube in the world.

    Points map as ``q -> C_t + s * R @ (q + (C_t - C) - C_t)``, i.e. a
    translation of the cube center followed by uniform scaling and a
    rotation about the new center.
    """

    canonical_center: np.ndarray = (0.0, 0.0, 0.0)
    target_center: np.ndarray = (0.0, 0.0, 0.0)
    scale: float = 1.0
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "canonical_center", _frozen(vec3(self.canonical_center)))
        object.__setattr__(self, "target_center", _frozen(vec3(self.target_center)))
        object.__setattr__(self, "scale", float(self.scale))
        r = np.array(self.rotation, dtype=np.float64)
        object.__setattr__(self, "rotation", _frozen(r))
        if self.scale <= 0:
            raise ValueError("scale must be > 0")
        if not is_rotation(r):
            raise ValueError("rotation must be orthonormal with det +1 (within 1e-9)")

    def apply_point(self, q) -> np.ndarray:
        q = vec3(q)
        c, ct = self.canonical_center, self.target_center
        qt = q + (ct - c)
        qts = ct + self.scale * (qt - ct)
        return ct + self.rotation @ (qts - ct)

    def apply_direction(self, v) -> np.ndarray:
        return self.rotation @ vec3(v)


IDENTITY_PLACEMENT = Sim3Placement()


# ---------------------------------------------------------------------------
# lighting edits


@dataclass(frozen=True)
class AddLight:
    """Additional-light attributes: canonical position, color, intensity, diffuse level."""

    position: np.ndarray
    color: np.ndarray = (1.0, 1.0, 1.0)
    intensity: float = 1.0
    diffuse: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", _frozen(vec3(self.position)))
        object.__setattr__(self, "color", _frozen(vec3(self.color)))
        object.__setattr__(self, "intensity", float(self.intensity))
        object.__setattr__(self, "diffuse", float(self.diffuse))


@dataclass(frozen=True)
class InSceneLight:
    """Visible-fixture attributes: binary mask, color, intensity, transition flag."""

    mask: np.ndarray
    color: np.ndarray = (1.0, 1.0, 1.0)
    intensity: float = 1.0
    dimming: bool = False

    def __post_init__(self):
        m = np.array(self.mask, dtype=np.float64)
        if m.ndim != 2:
            raise ValueError("fixture mask must be a 2D image")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)
        object.__setattr__(self, "color", _frozen(vec3(self.color)))
        object.__setattr__(self, "intensity", float(self.intensity))
        object.__setattr__(self, "dimming", bool(self.dimming))


@dataclass(frozen=True)
class LightEdit:
    """A lighting change: ambient scale, global diffuse shift, and at most one
    of an added light, an in-scene fixture edit, or a multi-light block list."""

    ambient_scale: float = 1.0
    global_diffuse: float = 0.0
    add_light: Optional[AddLight] = None
    in_scene: Optional[InSceneLight] = None
    multi_lights: tuple[Optional[AddLight], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ambient_scale", float(self.ambient_scale))
        object.__setattr__(self, "global_diffuse", float(self.global_diffuse))
        object.__setattr__(self, "multi_lights", tuple(self.multi_lights))
        active = [
            self.add_light is not None,
            self.in_scene is not None,
            len(self.multi_lights) > 0,
        ]
        if sum(active) > 1:
            raise ValueError("at most one of add_light, in_scene, multi_lights may be set")
        if len(self.multi_lights) > 3:
            raise ValueError("multi_lights supports at most 3 blocks")
        if not (0.0 <= self.ambient_scale <= AMBIENT_SCALE_MAX):
            raise ValueError(f"ambient_scale must be in [0, {AMBIENT_SCALE_MAX}]")
        if not (-1.0 <= self.global_diffuse <= 1.0):
            raise ValueError("global_diffuse must be in [-1, 1]")

    @property
    def mode(self) -> str:
        if self.add_light is not None:
            return "spatial"
        if self.in_scene is not None:
            return "visible"
        if self.multi_lights:
            return "multi"
        if self.global_diffuse != 0.0:
            return "diffuse"
        return "ambient"


# ---------------------------------------------------------------------------
# validation


def validate_scene(scene: Scene) -> list[str]:
    """Report-only invariant check; empty list means the scene is valid."""
    violations: list[str] = []
    for i, prim in enumerate(scene.primitives):
        name = f"{type(prim).__name__.lower()}[{i}]"
        albedo = prim.albedo
        if np.any(albedo < 0.0) or np.any(albedo > 1.0):
            violations.append(f"{name}: albedo components must be in [0, 1]")
        if isinstance(prim, Sphere) and prim.radius <= 0:
            violations.append(f"{name}: radius > 0")
        if isinstance(prim, Box) and not np.all(prim.min < prim.max):
            violations.append(f"{name}: min < max componentwise")
        if isinstance(prim, Plane) and np.linalg.norm(prim.normal) == 0:
            violations.append(f"{name}: normal must be non-zero")
    return violations


# ---------------------------------------------------------------------------
# JSON (de)serialization — the scene-description file format


def _prim_to_dict(p: Primitive) -> dict:
    if isinstance(p, Sphere):
        return {"type": "sphere", "center": list(p.center), "radius": p.radius, "albedo": list(p.albedo)}
    if isinstance(p, Plane):
        return {"type": "plane", "point": list(p.point), "normal": list(p.normal), "albedo": list(p.albedo)}
    return {"type": "box", "min": list(p.min), "max": list(p.max), "albedo": list(p.albedo)}


def _prim_from_dict(d: dict) -> Primitive:
    kind = d.get("type")
    if kind == "sphere":
        return Sphere(d["center"], d["radius"], d["albedo"])
    if kind == "plane":
        return Plane(d["point"], d["normal"], d["albedo"])
    if kind == "box":
        return Box(d["min"], d["max"], d["albedo"])
    raise ValueError(f"unknown primitive type {kind!r}")


def scene_to_dict(scene: Scene, camera: Camera | None = None, lights: list[LightSpec] | None = None) -> dict:
    out: dict = {"primitives": [_prim_to_dict(p) for p in scene.primitives]}
    if camera is not None:
        out["camera"] = {
            "position": list(camera.position),
            "look_at": list(camera.look_at),
            "up": list(camera.up),
            "vertical_fov_deg": camera.vertical_fov_deg,
            "resolution": list(camera.resolution),
        }
    if lights is not None:
        out["lights"] = [
            {
                "kind": l.kind,
                "position": list(l.position),
                "energy": l.energy,
                "radius": l.radius,
                "spread_deg": l.spread_deg,
                "color": list(l.color),
            }
            for l in lights
        ]
    return out


def scene_from_dict(d: dict) -> tuple[Scene, Camera | None, list[LightSpec]]:
    scene = Scene(tuple(_prim_from_dict(p) for p in d.get("primitives", [])))
    camera = None
    if "camera" in d:
        c = d["camera"]
        camera = Camera(
            position=c["position"],
            look_at=c["look_at"],
            up=c.get("up", (0.0, 1.0, 0.0)),
            vertical_fov_deg=c.get("vertical_fov_deg", CANONICAL_FOV_DEG),
            resolution=tuple(c.get("resolution", (64, 64))),
        )
    lights = [
        LightSpec(
            kind=l["kind"],
            position=l.get("position", (0, 0, 0)),
            energy=l.get("energy", 1.0),
            radius=l.get("radius", 0.0),
            spread_deg=l.get("spread_deg", 90.0),
            color=l.get("color", (1, 1, 1)),
        )
        for l in d.get("lights", [])
    ]
    return scene, camera, lights


def save_scene(path, scene: Scene, camera: Camera | None = None, lights: list[LightSpec] | None = None) -> None:
    with open(path, "w") as f:
        json.dump(scene_to_dict(scene, camera, lights), f, indent=2)


def load_scene(path) -> tuple[Scene, Camera | None, list[LightSpec]]:
    with open(path) as f:
        return scene_from_dict(json.load(f))


def canonical_camera(resolution: tuple[int, int] = (64, 64)) -> Camera:
    return Camera(
        position=CANONICAL_CAMERA_POSITION,
        look_at=CANONICAL_CENTER,
        up=(0.0, 1.0, 0.0),
        vertical_fov_deg=CANONICAL_FOV_DEG,
        resolution=resolution,
    )


def in_canonical_cube(p) -> bool:
    p = vec3(p)
    return bool(np.all(p >= CANONICAL_CUBE_MIN) and np.all(p <= CANONICAL_CUBE_MAX))


__all__ = [
    "AMBIENT_SCALE_MAX",
    "AddLight",
    "Box",
    "Camera",
    "CANONICAL_CAMERA_POSITION",
    "CANONICAL_CENTER",
    "CANONICAL_CUBE_MAX",
    "CANONICAL_CUBE_MIN",
    "CANONICAL_FOV_DEG",
    "IDENTITY_PLACEMENT",
    "InSceneLight",
    "LightEdit",
    "LightSpec",
    "Plane",
    "Primitive",
    "Scene",
    "Sim3Placement",
    "Sphere",
    "canonical_camera",
    "in_canonical_cube",
    "load_scene",
    "save_scene",
    "scene_from_dict",
    "scene_to_dict",
    "validate_scene",
]
