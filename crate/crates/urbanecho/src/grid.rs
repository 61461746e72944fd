//! Receiver-set construction: a regular lattice over the scene extent plus
//! receivers along building edges and at (offset) building corners, with
//! points inside buildings removed and near-duplicates merged.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{offset_corners, Point2};
use crate::osm::Scene;

/// Default lattice spacing in meters.
pub const DEFAULT_SPACING_M: f64 = 5.0;

/// Merge radius for duplicate receivers. Slightly below the 1 cm corner
/// offset so an offset corner and the building vertex it belongs to stay
/// distinct.
const MERGE_TOL_M: f64 = 0.0099;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    Lattice,
    Edge,
    Corner,
}

impl ReceiverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReceiverKind::Lattice => "lattice",
            ReceiverKind::Edge => "edge",
            ReceiverKind::Corner => "corner",
        }
    }
}

/// A single simulation receiver; `level_db` is set by the simulation and
/// `None` marks a silent receiver (no path reached it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Receiver {
    pub position: Point2,
    pub kind: ReceiverKind,
    pub level_db: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReceiverGrid {
    pub receivers: Vec<Receiver>,
    pub spacing_m: f64,
}

impl ReceiverGrid {
    pub fn receivers(&self) -> &[Receiver] {
        &self.receivers
    }

    pub fn len(&self) -> usize {
        self.receivers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.receivers.is_empty()
    }

    /// Debug dump: `x,y,kind` CSV.
    pub fn write_positions_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("x,y,kind\n");
        for r in &self.receivers {
            out.push_str(&format!("{},{},{}\n", r.position.x, r.position.y, r.kind.as_str()));
        }
        crate::osm::write_atomic(path, out.as_bytes())
    }
}

/// Sample positions along one edge: every `spacing` from the first vertex,
/// plus the far vertex; `ceil(len/spacing) + 1` points in total.
fn edge_samples(a: Point2, b: Point2, spacing: f64) -> Vec<Point2> {
    let len = a.distance(b);
    let n = (len / spacing - 1e-9).ceil().max(1.0) as usize;
    let dir = (b - a) * (1.0 / len);
    let mut pts: Vec<Point2> = (0..n).map(|j| a + dir * (j as f64 * spacing)).collect();
    pts.push(b);
    pts
}

/// 1 cm spatial hash used to merge receivers within [`MERGE_TOL_M`].
struct MergeIndex {
    cells: HashMap<(i64, i64), Vec<Point2>>,
}

impl MergeIndex {
    fn new() -> Self {
        Self {
            cells: HashMap::new(),
        }
    }

    fn key(p: Point2) -> (i64, i64) {
        ((p.x / MERGE_TOL_M).floor() as i64, (p.y / MERGE_TOL_M).floor() as i64)
    }

    fn is_duplicate(&self, p: Point2) -> bool {
        let (kx, ky) = Self::key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.cells.get(&(kx + dx, ky + dy)) {
                    if bucket.iter().any(|q| q.distance(p) < MERGE_TOL_M) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn insert(&mut self, p: Point2) {
        self.cells.entry(Self::key(p)).or_default().push(p);
    }
}

/// Builds the receiver set for a scene:
/// corners (offset 1 cm outward), edge samples every `spacing` meters, and
/// the regular lattice anchored at the extent corner. Points strictly inside
/// buildings are removed; duplicates within 1 cm are merged with corner
/// receivers winning over edge receivers winning over lattice receivers.
/// Output is sorted by `(y, x)`.
pub fn build_grid(scene: &Scene, spacing_m: f64) -> Result<ReceiverGrid> {
    if !(spacing_m > 0.0) || !spacing_m.is_finite() {
        return Err(Error::Domain(format!(
            "grid spacing must be positive, got {spacing_m}"
        )));
    }
    let half = 0.5 * scene.extent_m;
    let strictly_inside =
        |p: Point2| scene.buildings().iter().any(|poly| poly.contains_strict(p));

    let mut index = MergeIndex::new();
    let mut receivers: Vec<Receiver> = Vec::new();
    let mut push = |p: Point2, kind: ReceiverKind, index: &mut MergeIndex| {
        if strictly_inside(p) || index.is_duplicate(p) {
            return;
        }
        index.insert(p);
        receivers.push(Receiver {
            position: p,
            kind,
            level_db: None,
        });
    };

    for poly in scene.buildings() {
        for corner in offset_corners(poly) {
            push(corner, ReceiverKind::Corner, &mut index);
        }
    }
    for poly in scene.buildings() {
        for edge in poly.edges() {
            for p in edge_samples(edge.a, edge.b, spacing_m) {
                push(p, ReceiverKind::Edge, &mut index);
            }
        }
    }
    let steps = (scene.extent_m / spacing_m + 1e-9).floor() as u32;
    for iy in 0..=steps {
        for ix in 0..=steps {
            let p = Point2::new(-half + ix as f64 * spacing_m, -half + iy as f64 * spacing_m);
            push(p, ReceiverKind::Lattice, &mut index);
        }
    }

    receivers.sort_by(|a, b| {
        a.position
            .y
            .total_cmp(&b.position.y)
            .then(a.position.x.total_cmp(&b.position.x))
    });
    Ok(ReceiverGrid {
        receivers,
        spacing_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon2;
    use crate::osm::GeoLocation;

    fn scene_with(buildings: Vec<Polygon2>) -> Scene {
        Scene::new(buildings, GeoLocation::new(0.0, 0.0, "test").unwrap()).unwrap()
    }

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon2 {
        Polygon2::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
        .unwrap()
    }

    #[test]
    fn empty_scene_full_lattice() {
        let grid = build_grid(&scene_with(vec![]), 5.0).unwrap();
        assert_eq!(grid.len(), 101 * 101);
        assert!(grid
            .receivers()
            .iter()
            .all(|r| r.kind == ReceiverKind::Lattice));
    }

    #[test]
    fn degenerate_spacing_hits_extent_corners() {
        let grid = build_grid(&scene_with(vec![]), 500.0).unwrap();
        assert_eq!(grid.len(), 4);
        for r in grid.receivers() {
            assert_eq!(r.position.x.abs(), 250.0);
            assert_eq!(r.position.y.abs(), 250.0);
        }
    }

    #[test]
    fn invalid_spacing_rejected() {
        assert!(build_grid(&scene_with(vec![]), 0.0).is_err());
        assert!(build_grid(&scene_with(vec![]), -1.0).is_err());
    }

    #[test]
    fn edge_sample_count_matches_ceil_rule() {
        let a = Point2::new(0.0, 0.0);
        for &(len, expect) in &[(10.0, 3), (7.0, 3), (4.9, 2), (5.0, 2), (20.0, 5), (23.0, 6)] {
            let pts = edge_samples(a, Point2::new(len, 0.0), 5.0);
            assert_eq!(pts.len(), expect, "length {len}");
            assert_eq!(pts[0], a);
            assert!((pts.last().unwrap().x - len).abs() < 1e-12);
        }
    }

    #[test]
    fn single_building_receiver_census() {
        // 10 m x 10 m building away from the center, aligned to the lattice.
        let building = rect(100.0, 100.0, 110.0, 110.0);
        let scene = scene_with(vec![building.clone()]);
        let grid = build_grid(&scene, 5.0).unwrap();

        let corners: Vec<_> = grid
            .receivers()
            .iter()
            .filter(|r| r.kind == ReceiverKind::Corner)
            .collect();
        let edges: Vec<_> = grid
            .receivers()
            .iter()
            .filter(|r| r.kind == ReceiverKind::Edge)
            .collect();
        assert_eq!(corners.len(), 4);
        // Four vertices + four edge midpoints (shared endpoints deduped).
        assert_eq!(edges.len(), 8);

        // The lattice point at the building center is gone; boundary-aligned
        // lattice points were merged into edge receivers.
        assert!(!grid
            .receivers()
            .iter()
            .any(|r| r.position.distance(Point2::new(105.0, 105.0)) < 1.0));
        let full = 101 * 101;
        let lattice_count = grid
            .receivers()
            .iter()
            .filter(|r| r.kind == ReceiverKind::Lattice)
            .count();
        // 3x3 lattice block covered by the building footprint (interior or
        // merged into boundary receivers): 9 points minus nothing else.
        assert_eq!(full - lattice_count, 9);

        // Nothing strictly inside.
        for r in grid.receivers() {
            assert!(!building.contains_strict(r.position), "{:?}", r.position);
        }
    }

    #[test]
    fn order_independent_of_building_ordering() {
        let a = rect(50.0, 50.0, 70.0, 65.0);
        let b = rect(-120.0, -80.0, -90.0, -60.0);
        let g1 = build_grid(&scene_with(vec![a.clone(), b.clone()]), 10.0).unwrap();
        let g2 = build_grid(&scene_with(vec![b, a]), 10.0).unwrap();
        assert_eq!(g1.len(), g2.len());
        for (r1, r2) in g1.receivers().iter().zip(g2.receivers()) {
            assert_eq!(r1.position, r2.position);
            assert_eq!(r1.kind, r2.kind);
        }
    }

    #[test]
    fn no_duplicates_within_merge_radius() {
        let scene = scene_with(vec![rect(30.0, 30.0, 47.0, 41.0), rect(-60.0, 10.0, -40.0, 22.0)]);
        let grid = build_grid(&scene, 5.0).unwrap();
        // O(n²) check on a reduced region to keep the test quick.
        let near: Vec<_> = grid
            .receivers()
            .iter()
            .filter(|r| r.position.x.abs() < 80.0 && r.position.y.abs() < 80.0)
            .collect();
        for (i, r1) in near.iter().enumerate() {
            for r2 in &near[i + 1..] {
                assert!(
                    r1.position.distance(r2.position) >= MERGE_TOL_M,
                    "{:?} vs {:?}",
                    r1,
                    r2
                );
            }
        }
    }
}
