"""Network file I/O.

Networks are described by a JSON document with three top-level keys:

``buses``
    list of ``{"id": int, "kind": "generator"|"load", "m_hat": float,
    "d_hat": float}``; generator entries may carry per-bus bound
    overrides ``m_lb``/``m_ub``/``d_lb``/``d_ub``.
``lines``
    list of ``{"from": id, "to": id, "b": susceptance > 0}``.
``defaults``
    global bound values plus an optional ``ref_bus`` id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .netmodel import Bus, DeviceParams, Line, NetworkSpec, validate_network

DEFAULT_BOUNDS = {"m_lb": 0.0, "m_ub": 1.0, "d_lb": 0.0, "d_ub": 1.0}


@dataclass(frozen=True)
class NetworkDocument:
    """Parsed network file: the bus/line spec plus bound defaults."""

    spec: NetworkSpec
    defaults: dict[str, float] = field(default_factory=dict)
    bus_bounds: dict[int, dict[str, float]] = field(default_factory=dict)
    ref_bus: int | None = None


def bundled_network_path(name: str = "twelve_bus") -> Path:
    """Filesystem path of a dataset shipped with the package."""
    path = resources.files("vsmtune").joinpath(f"data/{name}.json")
    return Path(str(path))


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ValidationError(f"{context}: missing required key {key!r}")
    return mapping[key]


def parse_network(doc: dict) -> NetworkDocument:
    """Build a validated NetworkDocument from a decoded JSON object."""
    if not isinstance(doc, dict):
        raise ValidationError("network document must be a JSON object")

    buses = []
    bus_bounds: dict[int, dict[str, float]] = {}
    for raw in _require(doc, "buses", "network document"):
        bus_id = int(_require(raw, "id", "bus entry"))
        kind = str(_require(raw, "kind", f"bus {bus_id}"))
        buses.append(
            Bus(
                id=bus_id,
                kind=kind,
                m_hat=float(raw.get("m_hat", 0.0)),
                d_hat=float(raw.get("d_hat", 0.0)),
            )
        )
        overrides = {k: float(raw[k]) for k in DEFAULT_BOUNDS if k in raw}
        if overrides:
            bus_bounds[bus_id] = overrides

    lines = []
    for raw in _require(doc, "lines", "network document"):
        lines.append(
            Line(
                from_bus=int(_require(raw, "from", "line entry")),
                to_bus=int(_require(raw, "to", "line entry")),
                b=float(_require(raw, "b", "line entry")),
            )
        )

    spec = NetworkSpec(buses=tuple(buses), lines=tuple(lines))
    validate_network(spec)

    raw_defaults = doc.get("defaults", {})
    defaults = {k: float(raw_defaults.get(k, v)) for k, v in DEFAULT_BOUNDS.items()}
    ref_bus = raw_defaults.get("ref_bus")
    if ref_bus is not None:
        ref_bus = int(ref_bus)
        if ref_bus not in spec.generator_ids:
            raise ValidationError(f"defaults.ref_bus {ref_bus} is not a generator bus")
    return NetworkDocument(spec=spec, defaults=defaults, bus_bounds=bus_bounds, ref_bus=ref_bus)


def load_network(path: str | Path) -> NetworkDocument:
    """Read and parse a network JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read network file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"network file {path} is not valid JSON: {exc}") from exc
    return parse_network(doc)


def serialize_network(doc: NetworkDocument) -> dict:
    """Inverse of parse_network; round-trips the NetworkSpec exactly."""
    buses = []
    for bus in doc.spec.buses:
        entry: dict = {"id": bus.id, "kind": bus.kind}
        if bus.kind == "generator":
            entry["m_hat"] = bus.m_hat
            entry["d_hat"] = bus.d_hat
        entry.update(doc.bus_bounds.get(bus.id, {}))
        buses.append(entry)
    lines = [{"from": ln.from_bus, "to": ln.to_bus, "b": ln.b} for ln in doc.spec.lines]
    defaults = dict(doc.defaults)
    if doc.ref_bus is not None:
        defaults["ref_bus"] = doc.ref_bus
    return {"defaults": defaults, "buses": buses, "lines": lines}


def device_params(
    doc: NetworkDocument,
    gen_ids: tuple[int, ...],
    bounds_override: dict[str, float] | None = None,
) -> DeviceParams:
    """Assemble DeviceParams for the reduced generator ordering.

    Bound precedence: ``bounds_override`` (e.g. from the command line)
    replaces everything; otherwise per-bus overrides sit on top of the
    file defaults. Decision vectors start at the box midpoint.
    """
    by_id = {b.id: b for b in doc.spec.buses}
    n = len(gen_ids)
    bounds = {k: np.empty(n) for k in DEFAULT_BOUNDS}
    m_hat = np.empty(n)
    d_hat = np.empty(n)
    for i, gid in enumerate(gen_ids):
        bus = by_id[gid]
        m_hat[i] = bus.m_hat
        d_hat[i] = bus.d_hat
        for key in DEFAULT_BOUNDS:
            if bounds_override is not None:
                bounds[key][i] = bounds_override[key]
            else:
                per_bus = doc.bus_bounds.get(gid, {})
                bounds[key][i] = per_bus.get(key, doc.defaults[key])
    m0 = 0.5 * (bounds["m_lb"] + bounds["m_ub"])
    d0 = 0.5 * (bounds["d_lb"] + bounds["d_ub"])
    return DeviceParams(
        m_hat=m_hat,
        d_hat=d_hat,
        m=m0,
        d=d0,
        m_lb=bounds["m_lb"],
        m_ub=bounds["m_ub"],
        d_lb=bounds["d_lb"],
        d_ub=bounds["d_ub"],
    )
