//! Building-footprint ingestion: Overpass fetching with an on-disk cache,
//! parsing of Overpass XML / Overpass JSON / GeoJSON into local-meter scenes,
//! the location-selection heuristic, and scene rasterization.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{PixelGrid, Point2, Polygon2, Segment2};
use crate::parallel;

/// Side length of every scene, meters.
pub const SCENE_EXTENT_M: f64 = 500.0;

/// Mean Earth radius used by the local equirectangular projection.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Minimum number of buildings within [`SELECTION_RADIUS_M`] of the center
/// for a location to qualify.
pub const SELECTION_MIN_BUILDINGS: usize = 10;
pub const SELECTION_RADIUS_M: f64 = 200.0;
/// Keep-out clearance between the center and the nearest building wall.
pub const SELECTION_CLEARANCE_M: f64 = 50.0;

/// Footprints smaller than this are dropped as noise after clipping.
const MIN_BUILDING_AREA_M2: f64 = 1.0;

/// A WGS84 location with a free-text city tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoLocation {
    pub latitude: f64,
    pub longitude: f64,
    pub city_tag: String,
}

impl GeoLocation {
    pub fn new(latitude: f64, longitude: f64, city_tag: impl Into<String>) -> Result<Self> {
        if !latitude.is_finite() || latitude.abs() > 90.0 {
            return Err(Error::Validation(format!("latitude {latitude} out of range")));
        }
        if !longitude.is_finite() || longitude.abs() > 180.0 {
            return Err(Error::Validation(format!(
                "longitude {longitude} out of range"
            )));
        }
        Ok(Self {
            latitude,
            longitude,
            city_tag: city_tag.into(),
        })
    }
}

/// The simulated world: clipped building footprints in local meters around a
/// central source.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scene {
    buildings: Vec<Polygon2>,
    pub extent_m: f64,
    pub source: Point2,
    pub origin: GeoLocation,
}

impl Scene {
    /// Validates extent containment and that the source is not inside (or on
    /// the boundary of) any building.
    pub fn new(buildings: Vec<Polygon2>, origin: GeoLocation) -> Result<Self> {
        let half = 0.5 * SCENE_EXTENT_M;
        let source = Point2::new(0.0, 0.0);
        for poly in &buildings {
            for v in poly.vertices() {
                if v.x.abs() > half + 1e-6 || v.y.abs() > half + 1e-6 {
                    return Err(Error::Validation(format!(
                        "building vertex ({}, {}) outside the scene extent",
                        v.x, v.y
                    )));
                }
            }
            if poly.contains(source) {
                return Err(Error::Validation(
                    "scene source lies inside a building".into(),
                ));
            }
        }
        Ok(Self {
            buildings,
            extent_m: SCENE_EXTENT_M,
            source,
            origin,
        })
    }

    pub fn buildings(&self) -> &[Polygon2] {
        &self.buildings
    }

    /// Restores derived polygon caches after deserialization.
    pub fn rebuild_caches(&mut self) {
        for b in &mut self.buildings {
            b.rebuild_cache();
        }
    }
}

/// Projects WGS84 coordinates to local meters around `origin`
/// (equirectangular, exact enough over a 500 m window).
pub fn project(origin: &GeoLocation, latitude: f64, longitude: f64) -> Point2 {
    let lat0 = origin.latitude.to_radians();
    let x = EARTH_RADIUS_M * (longitude - origin.longitude).to_radians() * lat0.cos();
    let y = EARTH_RADIUS_M * (latitude - origin.latitude).to_radians();
    Point2::new(x, y)
}

/// Inverse of [`project`].
pub fn unproject(origin: &GeoLocation, p: Point2) -> (f64, f64) {
    let lat0 = origin.latitude.to_radians();
    let latitude = origin.latitude + (p.y / EARTH_RADIUS_M).to_degrees();
    let longitude = origin.longitude + (p.x / (EARTH_RADIUS_M * lat0.cos())).to_degrees();
    (latitude, longitude)
}

/// WGS84 bounding box `(west, south, east, north)` covering the scene square
/// centered on `loc`.
pub fn scene_bbox(loc: &GeoLocation) -> (f64, f64, f64, f64) {
    let half = 0.5 * SCENE_EXTENT_M;
    let dlat = (half / EARTH_RADIUS_M).to_degrees();
    let dlon = (half / (EARTH_RADIUS_M * loc.latitude.to_radians().cos())).to_degrees();
    (
        loc.longitude - dlon,
        loc.latitude - dlat,
        loc.longitude + dlon,
        loc.latitude + dlat,
    )
}

/// Options for [`fetch_osm`].
#[derive(Debug, Clone)]
pub struct FetchOptions {
    /// Base endpoint; the bbox query string is appended.
    pub endpoint: String,
    pub cache_dir: PathBuf,
    pub timeout: Duration,
    /// When set, only the cache is consulted; a miss is a network error.
    pub offline: bool,
}

impl FetchOptions {
    pub fn new(endpoint: impl Into<String>, cache_dir: impl Into<PathBuf>) -> Self {
        Self {
            endpoint: endpoint.into(),
            cache_dir: cache_dir.into(),
            timeout: Duration::from_secs(30),
            offline: false,
        }
    }
}

/// Default public Overpass endpoint.
pub const DEFAULT_OVERPASS_ENDPOINT: &str = "http://overpass-api.de/api/map";

fn cache_path(opts: &FetchOptions, loc: &GeoLocation) -> PathBuf {
    // Keyed by rounded coordinates: 5 decimals ≈ 1 m, finer than any
    // meaningful distinction between candidate locations.
    opts.cache_dir
        .join(format!("osm_{:.5}_{:.5}.osm", loc.latitude, loc.longitude))
}

/// Fetches the raw map document for the 500 m square around `loc`, caching
/// responses on disk. A cache hit returns the stored bytes without touching
/// the network.
pub fn fetch_osm(loc: &GeoLocation, opts: &FetchOptions) -> Result<Vec<u8>> {
    let path = cache_path(opts, loc);
    if path.exists() {
        return std::fs::read(&path).map_err(|e| Error::io(&path, e));
    }
    let (w, s, e, n) = scene_bbox(loc);
    let bbox = format!("{w},{s},{e},{n}");
    let url = format!("{}?bbox={}", opts.endpoint, bbox);
    if opts.offline {
        return Err(Error::Network {
            url,
            bbox,
            detail: "offline mode and no cached response".into(),
        });
    }

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(opts.timeout))
        .build()
        .into();

    let mut last_err = String::new();
    for attempt in 0..3u32 {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(250 * (1 << attempt)));
        }
        match agent.get(&url).call() {
            Ok(mut resp) => {
                let bytes = resp.body_mut().read_to_vec().map_err(|e| Error::Network {
                    url: url.clone(),
                    bbox: bbox.clone(),
                    detail: format!("reading body: {e}"),
                })?;
                let trimmed = bytes.iter().position(|b| !b.is_ascii_whitespace());
                match trimmed.map(|i| bytes[i]) {
                    Some(b'<') | Some(b'{') => {}
                    _ => {
                        return Err(Error::Parse(format!(
                            "response from {url} is neither XML nor JSON"
                        )))
                    }
                }
                write_atomic(&path, &bytes)?;
                return Ok(bytes);
            }
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(Error::Network {
        url,
        bbox,
        detail: format!("3 attempts failed, last error: {last_err}"),
    })
}

/// Writes a file via a temporary sibling and an atomic rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("file"),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Parses a raw map document (Overpass XML, Overpass JSON, or GeoJSON) into
/// a scene centered on `loc`. Unusable ways are skipped silently; see
/// [`parse_buildings_with_report`] to inspect them.
pub fn parse_buildings(raw: &[u8], loc: &GeoLocation) -> Result<Scene> {
    parse_buildings_with_report(raw, loc).map(|(scene, _)| scene)
}

/// Like [`parse_buildings`] but also returns one note per skipped feature.
pub fn parse_buildings_with_report(raw: &[u8], loc: &GeoLocation) -> Result<(Scene, Vec<String>)> {
    let start = raw
        .iter()
        .position(|b| !b.is_ascii_whitespace())
        .ok_or_else(|| Error::Parse("empty map document".into()))?;
    let rings = match raw[start] {
        b'<' => parse_osm_xml(raw)?,
        b'{' => {
            let value: Value = serde_json::from_slice(raw)
                .map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
            if value.get("type").and_then(Value::as_str) == Some("FeatureCollection") {
                parse_geojson(&value)?
            } else if value.get("elements").is_some() {
                parse_overpass_json(&value)?
            } else {
                return Err(Error::Parse(
                    "JSON document is neither GeoJSON nor an Overpass response".into(),
                ));
            }
        }
        other => {
            return Err(Error::Parse(format!(
                "unrecognized document start byte {other:#x}"
            )))
        }
    };

    let mut skipped = Vec::new();
    let mut buildings = Vec::new();
    let half = 0.5 * SCENE_EXTENT_M;
    for ring in rings {
        match ring.into_scene_polygon(loc, half) {
            Ok(Some(poly)) => buildings.push(poly),
            Ok(None) => {} // clipped away entirely
            Err(reason) => skipped.push(reason),
        }
    }
    let scene = Scene::new(buildings, loc.clone())?;
    Ok((scene, skipped))
}

/// A raw building ring in WGS84, before projection and clipping.
struct RawRing {
    id: String,
    closed: bool,
    coords: Vec<(f64, f64)>, // (lat, lon)
}

impl RawRing {
    fn into_scene_polygon(
        self,
        loc: &GeoLocation,
        half: f64,
    ) -> std::result::Result<Option<Polygon2>, String> {
        if !self.closed {
            return Err(format!("way {}: open ring skipped", self.id));
        }
        if self.coords.len() < 3 {
            return Err(format!(
                "way {}: only {} vertices",
                self.id,
                self.coords.len()
            ));
        }
        let projected: Vec<Point2> = self
            .coords
            .iter()
            .map(|&(lat, lon)| project(loc, lat, lon))
            .collect();
        let clipped = clip_to_square(&projected, half);
        if clipped.len() < 3 {
            return Ok(None);
        }
        match Polygon2::new(clipped) {
            Ok(poly) if poly.area() >= MIN_BUILDING_AREA_M2 => Ok(Some(poly)),
            Ok(_) => Ok(None),
            Err(_) => Ok(None), // degenerate after clipping
        }
    }
}

/// Sutherland–Hodgman clip of a ring against the square `[-half, half]²`.
fn clip_to_square(ring: &[Point2], half: f64) -> Vec<Point2> {
    // Each clip plane keeps points with `keep(p) >= 0`.
    type Plane = (fn(Point2, f64) -> f64, f64);
    let planes: [Plane; 4] = [
        (|p, h| h - p.x, half),  // east
        (|p, h| p.x + h, half),  // west
        (|p, h| h - p.y, half),  // north
        (|p, h| p.y + h, half),  // south
    ];
    let mut current: Vec<Point2> = ring.to_vec();
    for (keep, h) in planes {
        if current.is_empty() {
            break;
        }
        let mut next = Vec::with_capacity(current.len() + 4);
        for i in 0..current.len() {
            let a = current[i];
            let b = current[(i + 1) % current.len()];
            let da = keep(a, h);
            let db = keep(b, h);
            if da >= 0.0 {
                next.push(a);
            }
            if (da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0) {
                let t = da / (da - db);
                next.push(a + (b - a) * t);
            }
        }
        current = next;
    }
    current
}

fn parse_osm_xml(raw: &[u8]) -> Result<Vec<RawRing>> {
    use quick_xml::events::Event;
    use std::collections::HashMap;

    let text = std::str::from_utf8(raw).map_err(|e| Error::Parse(format!("not UTF-8: {e}")))?;
    let mut reader = quick_xml::Reader::from_str(text);
    reader.config_mut().trim_text(true);

    let mut nodes: HashMap<i64, (f64, f64)> = HashMap::new();
    let mut rings = Vec::new();
    let mut way_refs: Vec<i64> = Vec::new();
    let mut way_id = String::new();
    let mut way_is_building = false;
    let mut in_way = false;

    let attr = |e: &quick_xml::events::BytesStart<'_>, name: &str| -> Option<String> {
        e.attributes().flatten().find_map(|a| {
            (a.key.as_ref() == name.as_bytes())
                .then(|| String::from_utf8_lossy(&a.value).into_owned())
        })
    };

    loop {
        match reader
            .read_event()
            .map_err(|e| Error::Parse(format!("XML error: {e}")))?
        {
            Event::Start(e) | Event::Empty(e) => match e.name().as_ref() {
                b"node" => {
                    let id = attr(&e, "id").and_then(|v| v.parse::<i64>().ok());
                    let lat = attr(&e, "lat").and_then(|v| v.parse::<f64>().ok());
                    let lon = attr(&e, "lon").and_then(|v| v.parse::<f64>().ok());
                    if let (Some(id), Some(lat), Some(lon)) = (id, lat, lon) {
                        nodes.insert(id, (lat, lon));
                    }
                }
                b"way" => {
                    in_way = true;
                    way_refs.clear();
                    way_is_building = false;
                    way_id = attr(&e, "id").unwrap_or_default();
                }
                b"nd" if in_way => {
                    if let Some(r) = attr(&e, "ref").and_then(|v| v.parse::<i64>().ok()) {
                        way_refs.push(r);
                    }
                }
                b"tag" if in_way => {
                    if attr(&e, "k").as_deref() == Some("building") {
                        way_is_building = true;
                    }
                }
                _ => {}
            },
            Event::End(e) if e.name().as_ref() == b"way" => {
                if way_is_building {
                    let closed = way_refs.len() >= 4 && way_refs.first() == way_refs.last();
                    let mut coords = Vec::with_capacity(way_refs.len());
                    let mut complete = true;
                    let span = if closed {
                        &way_refs[..way_refs.len() - 1]
                    } else {
                        &way_refs[..]
                    };
                    for r in span {
                        match nodes.get(r) {
                            Some(&c) => coords.push(c),
                            None => complete = false,
                        }
                    }
                    if complete {
                        rings.push(RawRing {
                            id: way_id.clone(),
                            closed,
                            coords,
                        });
                    } else {
                        rings.push(RawRing {
                            id: format!("{way_id} (missing nodes)"),
                            closed: false,
                            coords: Vec::new(),
                        });
                    }
                }
                in_way = false;
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(rings)
}

fn parse_overpass_json(value: &Value) -> Result<Vec<RawRing>> {
    use std::collections::HashMap;
    let elements = value
        .get("elements")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("Overpass JSON without elements array".into()))?;

    let mut nodes: HashMap<i64, (f64, f64)> = HashMap::new();
    for el in elements {
        if el.get("type").and_then(Value::as_str) == Some("node") {
            if let (Some(id), Some(lat), Some(lon)) = (
                el.get("id").and_then(Value::as_i64),
                el.get("lat").and_then(Value::as_f64),
                el.get("lon").and_then(Value::as_f64),
            ) {
                nodes.insert(id, (lat, lon));
            }
        }
    }
    let mut rings = Vec::new();
    for el in elements {
        if el.get("type").and_then(Value::as_str) != Some("way") {
            continue;
        }
        let is_building = el
            .get("tags")
            .and_then(Value::as_object)
            .is_some_and(|t| t.contains_key("building"));
        if !is_building {
            continue;
        }
        let id = el
            .get("id")
            .and_then(Value::as_i64)
            .map(|v| v.to_string())
            .unwrap_or_default();
        let refs: Vec<i64> = el
            .get("nodes")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_i64).collect())
            .unwrap_or_default();
        let closed = refs.len() >= 4 && refs.first() == refs.last();
        let span = if closed { &refs[..refs.len() - 1] } else { &refs[..] };
        let coords: Option<Vec<(f64, f64)>> = span.iter().map(|r| nodes.get(r).copied()).collect();
        match coords {
            Some(coords) => rings.push(RawRing { id, closed, coords }),
            None => rings.push(RawRing {
                id: format!("{id} (missing nodes)"),
                closed: false,
                coords: Vec::new(),
            }),
        }
    }
    Ok(rings)
}

fn parse_geojson(value: &Value) -> Result<Vec<RawRing>> {
    let features = value
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("FeatureCollection without features".into()))?;
    let mut rings = Vec::new();
    for (idx, feature) in features.iter().enumerate() {
        let id = feature
            .get("id")
            .map(|v| v.to_string())
            .unwrap_or_else(|| format!("feature {idx}"));
        let is_building = feature
            .get("properties")
            .and_then(Value::as_object)
            .is_some_and(|p| p.contains_key("building"));
        if !is_building {
            continue;
        }
        let geometry = feature.get("geometry").unwrap_or(&Value::Null);
        if geometry.get("type").and_then(Value::as_str) != Some("Polygon") {
            rings.push(RawRing {
                id: format!("{id} (non-polygon geometry)"),
                closed: false,
                coords: Vec::new(),
            });
            continue;
        }
        // Exterior ring only; holes are dropped.
        let Some(exterior) = geometry
            .get("coordinates")
            .and_then(Value::as_array)
            .and_then(|rings| rings.first())
            .and_then(Value::as_array)
        else {
            rings.push(RawRing {
                id: format!("{id} (no exterior ring)"),
                closed: false,
                coords: Vec::new(),
            });
            continue;
        };
        let mut coords: Vec<(f64, f64)> = Vec::with_capacity(exterior.len());
        for pos in exterior {
            let lonlat = pos.as_array();
            let lon = lonlat.and_then(|a| a.first()).and_then(Value::as_f64);
            let lat = lonlat.and_then(|a| a.get(1)).and_then(Value::as_f64);
            match (lat, lon) {
                (Some(lat), Some(lon)) => coords.push((lat, lon)),
                _ => {
                    return Err(Error::Parse(format!(
                        "feature {id}: malformed coordinate"
                    )))
                }
            }
        }
        let closed = coords.len() >= 4
            && {
                let f = coords[0];
                let l = coords[coords.len() - 1];
                (f.0 - l.0).abs() < 1e-12 && (f.1 - l.1).abs() < 1e-12
            };
        if closed {
            coords.pop();
        }
        rings.push(RawRing { id, closed, coords });
    }
    Ok(rings)
}

/// Reads the optional `center` (`[lon, lat]`) and `city` foreign members from
/// a GeoJSON document. Falls back to the bbox centroid of all coordinates.
pub fn geojson_origin(raw: &[u8]) -> Result<GeoLocation> {
    let value: Value =
        serde_json::from_slice(raw).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    let city = value
        .get("city")
        .and_then(Value::as_str)
        .unwrap_or("unknown")
        .to_string();
    if let Some(center) = value.get("center").and_then(Value::as_array) {
        let lon = center.first().and_then(Value::as_f64);
        let lat = center.get(1).and_then(Value::as_f64);
        if let (Some(lon), Some(lat)) = (lon, lat) {
            return GeoLocation::new(lat, lon, city);
        }
    }
    // Bounding-box center of every position in the document.
    let mut min = (f64::INFINITY, f64::INFINITY);
    let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    fn walk(v: &Value, min: &mut (f64, f64), max: &mut (f64, f64)) {
        if let Some(arr) = v.as_array() {
            if arr.len() == 2 {
                if let (Some(lon), Some(lat)) = (arr[0].as_f64(), arr[1].as_f64()) {
                    min.0 = min.0.min(lon);
                    min.1 = min.1.min(lat);
                    max.0 = max.0.max(lon);
                    max.1 = max.1.max(lat);
                    return;
                }
            }
            for item in arr {
                walk(item, min, max);
            }
        } else if let Some(obj) = v.as_object() {
            if let Some(coords) = obj.get("coordinates") {
                walk(coords, min, max);
            } else {
                for item in obj.values() {
                    walk(item, min, max);
                }
            }
        }
    }
    walk(&value, &mut min, &mut max);
    if !min.0.is_finite() {
        return Err(Error::Parse("GeoJSON contains no coordinates".into()));
    }
    GeoLocation::new(0.5 * (min.1 + max.1), 0.5 * (min.0 + max.0), city)
}

/// Serializes a scene back to GeoJSON (WGS84) with `center` and `city`
/// foreign members, round-trippable through [`parse_buildings`].
pub fn scene_to_geojson(scene: &Scene) -> String {
    let features: Vec<Value> = scene
        .buildings()
        .iter()
        .map(|poly| {
            let mut ring: Vec<Value> = poly
                .vertices()
                .iter()
                .map(|&p| {
                    let (lat, lon) = unproject(&scene.origin, p);
                    serde_json::json!([lon, lat])
                })
                .collect();
            if let Some(first) = ring.first().cloned() {
                ring.push(first);
            }
            serde_json::json!({
                "type": "Feature",
                "properties": { "building": "yes" },
                "geometry": { "type": "Polygon", "coordinates": [ring] }
            })
        })
        .collect();
    serde_json::json!({
        "type": "FeatureCollection",
        "center": [scene.origin.longitude, scene.origin.latitude],
        "city": scene.origin.city_tag,
        "features": features,
    })
    .to_string()
}

/// Does a parsed scene satisfy the location-selection heuristic?
pub fn scene_passes_selection(scene: &Scene) -> bool {
    let center = scene.source;
    let near = scene
        .buildings()
        .iter()
        .filter(|poly| {
            poly.vertices()
                .iter()
                .any(|v| v.distance(center) <= SELECTION_RADIUS_M)
        })
        .count();
    if near < SELECTION_MIN_BUILDINGS {
        return false;
    }
    let clearance_ok = scene.buildings().iter().all(|poly| {
        poly.edges()
            .all(|e: Segment2| e.distance_to_point(center) >= SELECTION_CLEARANCE_M)
    });
    clearance_ok
}

/// Order-preserving filter of candidates by the selection heuristic.
pub fn select_locations(candidates: &[(GeoLocation, Scene)]) -> Vec<GeoLocation> {
    candidates
        .iter()
        .filter(|(_, scene)| scene_passes_selection(scene))
        .map(|(loc, _)| loc.clone())
        .collect()
}

/// Rasterizes the building mask: 0 where the pixel center falls inside a
/// building, 255 elsewhere. Row 0 is the north edge.
pub fn rasterize_scene(scene: &Scene, resolution: u32) -> Vec<u8> {
    let grid = PixelGrid::new(resolution, scene.extent_m);
    let rows = parallel::map_range(resolution as usize, |row| {
        let row = row as u32;
        (0..resolution)
            .map(|col| {
                let c = grid.center(row, col);
                if scene.buildings().iter().any(|b| b.contains(c)) {
                    0u8
                } else {
                    255u8
                }
            })
            .collect::<Vec<_>>()
    });
    rows.into_iter().flatten().collect()
}

/// Convenience: fully ingest one GeoJSON document (origin + scene).
pub fn scene_from_geojson(raw: &[u8]) -> Result<Scene> {
    let origin = geojson_origin(raw)?;
    parse_buildings(raw, &origin)
}

/// Reads a whole file and parses it as GeoJSON.
pub fn scene_from_geojson_file(path: &Path) -> Result<Scene> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    scene_from_geojson(&bytes)
}
