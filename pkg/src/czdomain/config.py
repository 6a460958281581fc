"""Key/value config files describing domains and runs.

Format: one `key = value` per line, `#` comments, arrays as comma- or
space-separated numbers, vertex lists as `x y, x y, ...`.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .geometry import Disk, Domain, GraphDomain, Polygon, unit_square, zigzag_graph_domain


class ConfigError(ValueError):
    """Raised with line/field diagnostics on malformed configs."""


def parse_config(text: str) -> dict:
    out = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {ln}: empty key")
        if key in out:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def config_hash(cfg: dict) -> str:
    canon = "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _floats(value: str):
    toks = value.replace(",", " ").split()
    try:
        return [float(t) for t in toks]
    except ValueError as e:
        raise ConfigError(f"cannot parse number list {value!r}: {e}") from None


def domain_from_config(cfg: dict) -> Domain:
    kind = cfg.get("kind")
    if kind is None:
        raise ConfigError("missing field 'kind'")
    try:
        if kind == "disk":
            radius = float(cfg.get("radius", 1.0))
            return Disk(radius)
        if kind == "polygon":
            if "vertices" not in cfg:
                raise ConfigError("polygon needs field 'vertices'")
            pairs = [p.strip() for p in cfg["vertices"].split(",") if p.strip()]
            verts = []
            for p in pairs:
                xy = p.split()
                if len(xy) != 2:
                    raise ConfigError(f"bad vertex {p!r}; expected 'x y'")
                verts.append((float(xy[0]), float(xy[1])))
            window = float(cfg["window_side"]) if "window_side" in cfg else None
            return Polygon(verts, window_side=window)
        if kind == "square":
            return unit_square()
        if kind == "halfspace":
            return GraphDomain(d=int(cfg.get("dimension", 2)), window_side=float(cfg.get("window_side", 1.0)))
        if kind in ("graph", "zigzag"):
            delta = float(cfg.get("delta", 0.5))
            window = float(cfg.get("window_side", 1.0))
            if "heights" in cfg:
                hs = _floats(cfg["heights"])
                xs = _floats(cfg["knots"]) if "knots" in cfg else list(np.linspace(-2.5 * window, 2.5 * window, len(hs)))
                if len(xs) != len(hs):
                    raise ConfigError("knots and heights must have equal length")
                pl = np.stack([xs, hs], axis=-1)
                return GraphDomain(delta=delta, window_side=window, polyline=pl)
            seed = int(cfg.get("seed", 0))
            rng = np.random.default_rng(seed)
            return zigzag_graph_domain(rng, delta, window_side=window)
    except ConfigError:
        raise
    except (ValueError, TypeError) as e:
        raise ConfigError(f"invalid value in field of kind={kind!r}: {e}") from None
    raise ConfigError(f"unknown domain kind {kind!r}")


_BUILTINS = {
    "disk": "kind = disk\nradius = 1.0\n",
    "square": "kind = square\n",
    "halfspace": "kind = halfspace\n",
}


def load_domain(spec: str):
    """Domain from a builtin name or a config file path.

    Returns (domain, config_dict)."""
    if spec in _BUILTINS:
        cfg = parse_config(_BUILTINS[spec])
    else:
        try:
            with open(spec, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read domain config {spec!r}: {e}") from None
        cfg = parse_config(text)
    return domain_from_config(cfg), cfg


def parse_side(text: str) -> float:
    """Accept '2^-8', '2**-8' or a plain float."""
    t = text.strip().replace("**", "^")
    if "^" in t:
        base, expo = t.split("^", 1)
        return float(base) ** float(expo)
    return float(t)
