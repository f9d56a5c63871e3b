"""Reading and joining areal geometry and attribute data.

Geometry arrives as RFC 7946 feature collections restricted to Polygon and
MultiPolygon features; attributes arrive as comma-delimited text with a
header row.  The two sources are joined on a shared unit identifier, with
unmatched units either dropped (and reported) or treated as fatal.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AreaUnit",
    "AttributeTable",
    "MergedDataset",
    "parse_geometry",
    "serialize_geometry",
    "to_feature_collection",
    "parse_attributes",
    "merge",
    "drop_missing_rows",
]

# geometry is stored as polygons -> rings -> (x, y) points; ring 0 is the
# outer ring, normalized counterclockwise, holes clockwise
Ring = list[tuple[float, float]]
PolygonGeom = list[Ring]


@dataclass(frozen=True)
class AreaUnit:
    """One areal unit: an identifier, a multipolygon, and its raw properties."""

    id: str
    geometry: tuple
    properties: dict = field(compare=False)


@dataclass(eq=False)
class AttributeTable:
    """Numeric attribute matrix keyed by unit id.

    Missing cells (empty or non-numeric tokens in the source) are stored as
    NaN and enumerable through :meth:`missing_cells`.
    """

    ids: list[str]
    columns: list[str]
    values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.ids)

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.columns.index(name)
        except ValueError:
            raise KeyError(f"no attribute column named {name!r}") from None
        return self.values[:, j]

    def missing_cells(self) -> list[tuple[int, str]]:
        """(row index, column name) pairs for every flagged-missing cell."""
        rows, cols = np.nonzero(np.isnan(self.values))
        return [(int(i), self.columns[j]) for i, j in zip(rows, cols)]


@dataclass(eq=False)
class MergedDataset:
    """Geometry and attributes aligned on id, geometry-file order preserved."""

    units: list[AreaUnit]
    table: AttributeTable
    dropped_geometry_ids: list[str]
    dropped_table_ids: list[str]

    @property
    def dropped_ids(self) -> list[str]:
        """Ids present in exactly one source, geometry side first."""
        return list(self.dropped_geometry_ids) + list(self.dropped_table_ids)

    @property
    def n(self) -> int:
        return len(self.units)


def _signed_area(ring: Ring) -> float:
    # shoelace; positive for counterclockwise rings in planar coordinates
    a = 0.0
    for (x0, y0), (x1, y1) in zip(ring[:-1], ring[1:]):
        a += x0 * y1 - x1 * y0
    return 0.5 * a


def _normalize_ring(ring: Ring, outer: bool) -> Ring:
    area = _signed_area(ring)
    if area == 0.0:
        return ring
    if outer != (area > 0.0):
        return ring[::-1]
    return ring


def _check_ring(ring, where: str) -> Ring:
    if not isinstance(ring, (list, tuple)) or len(ring) < 4:
        raise ValueError(f"{where}: ring must have at least 4 points")
    pts = []
    for pt in ring:
        if not isinstance(pt, (list, tuple)) or len(pt) < 2:
            raise ValueError(f"{where}: ring point must be an (x, y) pair")
        pts.append((float(pt[0]), float(pt[1])))
    if pts[0] != pts[-1]:
        raise ValueError(f"{where}: ring is not closed (first point != last)")
    return pts


def _unit_id(raw, index: int) -> str:
    if isinstance(raw, str):
        if not raw:
            raise ValueError(f"feature {index}: empty id")
        return raw
    if isinstance(raw, int) and not isinstance(raw, bool):
        return str(raw)
    raise ValueError(
        f"feature {index}: id property must be a string or integer, got {type(raw).__name__}"
    )


def parse_geometry(data: bytes | str, id_property: str) -> list[AreaUnit]:
    """Parse an RFC 7946 feature collection into a list of AreaUnit.

    Every feature must carry ``id_property`` and a Polygon or MultiPolygon
    geometry.  Outer rings are normalized counterclockwise and holes
    clockwise so downstream area computations are sign-stable; coordinate
    order is otherwise preserved.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed geometry document: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ValueError("geometry document is not a FeatureCollection")
    features = doc.get("features")
    if not isinstance(features, list):
        raise ValueError("FeatureCollection has no feature list")

    units: list[AreaUnit] = []
    seen: dict[str, int] = {}
    for idx, feat in enumerate(features):
        if not isinstance(feat, dict):
            raise ValueError(f"feature {idx} is not an object")
        props = feat.get("properties") or {}
        if id_property not in props:
            raise ValueError(f"feature {idx} is missing id property {id_property!r}")
        uid = _unit_id(props[id_property], idx)
        if uid in seen:
            raise ValueError(
                f"duplicate unit id {uid!r} (features {seen[uid]} and {idx})"
            )
        seen[uid] = idx

        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        if gtype == "Polygon":
            raw_polys = [geom.get("coordinates")]
        elif gtype == "MultiPolygon":
            raw_polys = geom.get("coordinates")
        else:
            raise ValueError(
                f"feature {idx} ({uid!r}): geometry type must be Polygon or "
                f"MultiPolygon, got {gtype!r}"
            )
        if not isinstance(raw_polys, list) or not raw_polys:
            raise ValueError(f"feature {idx} ({uid!r}): empty geometry")

        polygons = []
        for p, raw_rings in enumerate(raw_polys):
            if not isinstance(raw_rings, list) or not raw_rings:
                raise ValueError(f"feature {idx} ({uid!r}): polygon {p} has no rings")
            rings = []
            for r, raw_ring in enumerate(raw_rings):
                ring = _check_ring(raw_ring, f"feature {idx} ({uid!r}) polygon {p} ring {r}")
                rings.append(tuple(_normalize_ring(ring, outer=(r == 0))))
            polygons.append(tuple(rings))
        units.append(AreaUnit(id=uid, geometry=tuple(polygons), properties=dict(props)))
    return units


def to_feature_collection(
    units: list[AreaUnit], extra_properties: dict[str, list] | None = None
) -> dict:
    """Build a feature-collection dict, optionally appending per-unit columns."""
    feats = []
    for i, unit in enumerate(units):
        props = dict(unit.properties)
        if extra_properties:
            for name, values in extra_properties.items():
                props[name] = values[i]
        polys = [[list(map(list, ring)) for ring in poly] for poly in unit.geometry]
        if len(polys) == 1:
            geometry = {"type": "Polygon", "coordinates": polys[0]}
        else:
            geometry = {"type": "MultiPolygon", "coordinates": polys}
        feats.append({"type": "Feature", "properties": props, "geometry": geometry})
    return {"type": "FeatureCollection", "features": feats}


def serialize_geometry(units: list[AreaUnit]) -> bytes:
    """Inverse of parse_geometry; coordinates round-trip exactly."""
    return json.dumps(to_feature_collection(units), sort_keys=True).encode("utf-8")


def parse_attributes(data: bytes | str, id_column: str) -> AttributeTable:
    """Parse a comma-delimited table with a header row.

    Non-id columns are parsed as numerics; empty cells and non-numeric
    tokens become NaN (flagged missing), never zero.  Row order is
    preserved.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.reader(io.StringIO(data))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("attribute table is empty") from None
    if id_column not in header:
        raise ValueError(f"attribute table has no id column {id_column!r}")
    id_idx = header.index(id_column)
    columns = [name for name in header if name != id_column]

    ids: list[str] = []
    rows: list[list[float]] = []
    seen: dict[str, int] = {}
    for i, row in enumerate(reader):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(
                f"ragged row {i}: expected {len(header)} cells, got {len(row)}"
            )
        uid = row[id_idx]
        if not uid:
            raise ValueError(f"row {i}: empty id")
        if uid in seen:
            raise ValueError(f"duplicate id {uid!r} (rows {seen[uid]} and {i})")
        seen[uid] = i
        ids.append(uid)
        parsed = []
        for j, cell in enumerate(row):
            if j == id_idx:
                continue
            token = cell.strip()
            if not token:
                parsed.append(math.nan)
                continue
            try:
                parsed.append(float(token))
            except ValueError:
                parsed.append(math.nan)
        rows.append(parsed)

    values = np.array(rows, dtype=float) if rows else np.empty((0, len(columns)))
    return AttributeTable(ids=ids, columns=columns, values=values)


def merge(
    units: list[AreaUnit],
    table: AttributeTable,
    policy: str = "drop-with-report",
) -> MergedDataset:
    """Inner-join geometry and attributes on unit id.

    The output preserves geometry-file order restricted to retained ids.
    ``policy`` is either ``"drop-with-report"`` (unmatched ids recorded on
    both sides) or ``"fail-on-any-unmatched"``.
    """
    if policy not in ("drop-with-report", "fail-on-any-unmatched"):
        raise ValueError(f"unknown merge policy {policy!r}")
    if not units:
        raise ValueError("no geometry units to merge")
    if table.n == 0:
        raise ValueError("no attribute rows to merge")

    row_of = {uid: i for i, uid in enumerate(table.ids)}
    unit_ids = {u.id for u in units}
    retained = [u for u in units if u.id in row_of]
    dropped_geo = [u.id for u in units if u.id not in row_of]
    dropped_tab = [uid for uid in table.ids if uid not in unit_ids]

    if not retained:
        raise ValueError("geometry and attribute ids have an empty intersection")
    if policy == "fail-on-any-unmatched" and (dropped_geo or dropped_tab):
        raise ValueError(
            "unmatched ids under fail-on-any-unmatched policy: "
            f"geometry-only {dropped_geo}, attributes-only {dropped_tab}"
        )

    order = [row_of[u.id] for u in retained]
    sub = AttributeTable(
        ids=[u.id for u in retained],
        columns=list(table.columns),
        values=table.values[order, :].copy(),
    )
    return MergedDataset(
        units=retained,
        table=sub,
        dropped_geometry_ids=dropped_geo,
        dropped_table_ids=dropped_tab,
    )


def drop_missing_rows(
    dataset: MergedDataset, columns: list[str]
) -> tuple[MergedDataset, list[str]]:
    """Listwise deletion: drop units with any missing value in ``columns``.

    Returns the reduced dataset and the ids that were dropped, for the
    pipeline's dropped-unit report.
    """
    unknown = [c for c in columns if c not in dataset.table.columns]
    if unknown:
        raise KeyError(f"no such columns {unknown}")
    idx = [dataset.table.columns.index(c) for c in columns]
    bad = np.isnan(dataset.table.values[:, idx]).any(axis=1)
    if not bad.any():
        return dataset, []
    keep = ~bad
    dropped = [dataset.table.ids[i] for i in np.nonzero(bad)[0]]
    sub = AttributeTable(
        ids=[uid for uid, k in zip(dataset.table.ids, keep) if k],
        columns=list(dataset.table.columns),
        values=dataset.table.values[keep, :].copy(),
    )
    reduced = MergedDataset(
        units=[u for u, k in zip(dataset.units, keep) if k],
        table=sub,
        dropped_geometry_ids=list(dataset.dropped_geometry_ids),
        dropped_table_ids=list(dataset.dropped_table_ids),
    )
    return reduced, dropped
