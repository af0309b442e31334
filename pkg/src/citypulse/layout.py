"""Deterministic 3D city geometry: shelf-packed package tiles, class boxes with
metric-driven heights, heat-spot anchors, and aggregated communication edges.

All geometry is a pure function of (structure tree, instance counts): identical
inputs produce bit-identical output. Children of every node are packed
left-to-right into rows in name order with fixed padding; a package tile is the
bounding box of its children plus padding on every side.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .structure import ApplicationTree, ClassNode, PackageNode, app_key_to_str
from .traces import CallEvent

TILE_THICKNESS = 0.2


@dataclass(frozen=True, slots=True)
class LayoutBox:
    node_id: str
    kind: str  # "foundation" | "package" | "class"
    x: float
    z: float
    width: float
    depth: float
    y_base: float
    height: float

    def to_dict(self) -> dict:
        return {
            "nodeId": self.node_id,
            "kind": self.kind,
            "x": self.x,
            "z": self.z,
            "width": self.width,
            "depth": self.depth,
            "yBase": self.y_base,
            "height": self.height,
        }


@dataclass(frozen=True, slots=True)
class HeatSpotAnchor:
    class_id: str
    x: float  # class box footprint center on the foundation plate
    z: float

    def to_dict(self) -> dict:
        return {"classId": self.class_id, "x": self.x, "z": self.z}


@dataclass(frozen=True, slots=True)
class CommunicationEdge:
    caller_class_id: str
    callee_class_id: str
    call_count: int
    thickness_class: str  # "small" | "medium" | "large"

    def to_dict(self) -> dict:
        return {
            "callerClassId": self.caller_class_id,
            "calleeClassId": self.callee_class_id,
            "callCount": self.call_count,
            "thicknessClass": self.thickness_class,
        }


@dataclass(frozen=True)
class CityLayout:
    boxes: tuple[LayoutBox, ...]
    anchors: tuple[HeatSpotAnchor, ...]


@dataclass(slots=True)
class _Sized:
    name: str
    node: PackageNode | ClassNode
    kind: str
    width: float
    depth: float
    children: list["_Sized"]
    positions: list[tuple[float, float]]  # child offsets relative to own origin


def _shelf_pack(sizes: Sequence[tuple[float, float]], padding: float) -> tuple[list[tuple[float, float]], float, float]:
    """Place footprints left-to-right into rows. Returns (offsets, width, depth).

    The target row width balances the layout toward a square: the square root
    of the total padded area, never narrower than the widest item.
    """
    if not sizes:
        return [], 0.0, 0.0
    total_area = sum((w + padding) * (d + padding) for w, d in sizes)
    target = max(math.sqrt(total_area), max(w for w, _ in sizes))

    offsets: list[tuple[float, float]] = []
    x = 0.0
    z = 0.0
    row_depth = 0.0
    bounds_w = 0.0
    for width, depth in sizes:
        if x > 0.0 and x + width > target + 1e-12:
            z += row_depth + padding
            x = 0.0
            row_depth = 0.0
        offsets.append((x, z))
        x += width + padding
        bounds_w = max(bounds_w, x - padding)
        row_depth = max(row_depth, depth)
    return offsets, bounds_w, z + row_depth


def _sorted_children(node: PackageNode) -> list[tuple[str, PackageNode | ClassNode, str]]:
    entries: list[tuple[str, PackageNode | ClassNode, str]] = []
    for name in node.subpackages:
        entries.append((name, node.subpackages[name], "package"))
    for name in node.classes:
        entries.append((name, node.classes[name], "class"))
    entries.sort(key=lambda e: (e[0], e[2]))
    return entries


def _measure(
    name: str,
    node: PackageNode | ClassNode,
    kind: str,
    footprint: float,
    padding: float,
) -> _Sized:
    if kind == "class":
        return _Sized(name, node, kind, footprint, footprint, [], [])
    assert isinstance(node, PackageNode)
    children = [
        _measure(child_name, child, child_kind, footprint, padding)
        for child_name, child, child_kind in _sorted_children(node)
    ]
    offsets, inner_w, inner_d = _shelf_pack([(c.width, c.depth) for c in children], padding)
    return _Sized(
        name,
        node,
        kind,
        inner_w + 2 * padding,
        inner_d + 2 * padding,
        children,
        offsets,
    )


def layout(
    tree: ApplicationTree,
    instance_counts: Mapping[str, float],
    *,
    min_height: float = 1.0,
    max_height: float = 6.0,
    footprint: float = 1.0,
    padding: float = 0.3,
) -> CityLayout:
    """Compute the full city geometry for one application.

    Class height linearly maps the class's current-window instance count onto
    [min_height, max_height] over the snapshot's count range; when all counts
    are equal every class sits at min_height. Every class gets one heat-spot
    anchor at its footprint center.
    """
    class_ids = tree.class_ids()
    counts = {cid: float(instance_counts.get(cid, 0.0)) for cid in class_ids}
    if counts:
        cmin = min(counts.values())
        cmax = max(counts.values())
    else:
        cmin = cmax = 0.0
    span = cmax - cmin

    def class_height(class_id: str) -> float:
        if span == 0.0:
            return min_height
        return min_height + (max_height - min_height) * (counts[class_id] - cmin) / span

    roots = [
        _measure(name, tree.root_packages[name], "package", footprint, padding)
        for name in sorted(tree.root_packages)
    ]
    root_offsets, inner_w, inner_d = _shelf_pack([(r.width, r.depth) for r in roots], padding)

    boxes: list[LayoutBox] = []
    anchors: list[HeatSpotAnchor] = []
    boxes.append(
        LayoutBox(
            node_id=app_key_to_str(tree.app_key),
            kind="foundation",
            x=0.0,
            z=0.0,
            width=inner_w + 2 * padding,
            depth=inner_d + 2 * padding,
            y_base=0.0,
            height=TILE_THICKNESS,
        )
    )

    def place(sized: _Sized, x: float, z: float, level: int) -> None:
        if sized.kind == "class":
            assert isinstance(sized.node, ClassNode)
            class_id = sized.node.class_id
            boxes.append(
                LayoutBox(
                    node_id=class_id,
                    kind="class",
                    x=x,
                    z=z,
                    width=sized.width,
                    depth=sized.depth,
                    y_base=level * TILE_THICKNESS,
                    height=class_height(class_id),
                )
            )
            anchors.append(
                HeatSpotAnchor(class_id=class_id, x=x + sized.width / 2, z=z + sized.depth / 2)
            )
            return
        assert isinstance(sized.node, PackageNode)
        boxes.append(
            LayoutBox(
                node_id=sized.node.package_id,
                kind="package",
                x=x,
                z=z,
                width=sized.width,
                depth=sized.depth,
                y_base=level * TILE_THICKNESS,
                height=TILE_THICKNESS,
            )
        )
        for child, (dx, dz) in zip(sized.children, sized.positions):
            place(child, x + padding + dx, z + padding + dz, level + 1)

    for sized, (dx, dz) in zip(roots, root_offsets):
        place(sized, padding + dx, padding + dz, 1)

    return CityLayout(boxes=tuple(boxes), anchors=tuple(anchors))


def aggregate_edges(events: Sequence[CallEvent]) -> list[CommunicationEdge]:
    """Collapse one window's call events into per-(caller, callee) edges.

    Root events have no caller and produce no edge. Thickness classes split the
    edge population at the nearest-rank terciles of call_count.
    """
    pair_counts: Counter[tuple[str, str]] = Counter()
    for event in events:
        if event.caller_class_id is not None:
            pair_counts[(event.caller_class_id, event.callee_class_id)] += 1
    if not pair_counts:
        return []

    ordered_counts = sorted(pair_counts.values())
    n = len(ordered_counts)
    lower = ordered_counts[max(0, math.ceil(n / 3) - 1)]
    upper = ordered_counts[max(0, math.ceil(2 * n / 3) - 1)]

    def thickness(count: int) -> str:
        if count <= lower:
            return "small"
        if count <= upper:
            return "medium"
        return "large"

    return [
        CommunicationEdge(caller, callee, count, thickness(count))
        for (caller, callee), count in sorted(pair_counts.items())
    ]
