//! Deterministic synthetic scenes for tests, benches, and offline demo runs:
//! rotated rectangular footprints scattered around the center with the
//! selection heuristic's clearance respected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::geometry::{Aabb, Point2, Polygon2};
use crate::osm::{scene_to_geojson, GeoLocation, Scene};

/// Generates a deterministic scene with up to `n_buildings` non-overlapping
/// rectangular footprints, all at least 55 m from the center.
pub fn synthetic_scene(seed: u64, n_buildings: usize) -> Scene {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut buildings: Vec<Polygon2> = Vec::new();
    let mut boxes: Vec<Aabb> = Vec::new();

    'outer: for _ in 0..n_buildings {
        for _attempt in 0..60 {
            let radius = rng.random_range(70.0..230.0);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let cx = radius * angle.cos();
            let cy = radius * angle.sin();
            let hw = rng.random_range(5.0..18.0);
            let hh = rng.random_range(5.0..18.0);
            let rot = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
            let (sin, cos) = rot.sin_cos();
            let corners: Vec<Point2> = [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
                .iter()
                .map(|&(dx, dy)| {
                    Point2::new(cx + dx * cos - dy * sin, cy + dx * sin + dy * cos)
                })
                .collect();
            if corners
                .iter()
                .any(|p| p.x.abs() > 248.0 || p.y.abs() > 248.0)
            {
                continue;
            }
            let Ok(poly) = Polygon2::new(corners) else {
                continue;
            };
            // Clearance from the center, with margin over the 50 m rule.
            if poly
                .edges()
                .any(|e| e.distance_to_point(Point2::new(0.0, 0.0)) < 55.0)
            {
                continue;
            }
            let bbox = poly.bbox();
            let padded = Aabb {
                min: Point2::new(bbox.min.x - 2.0, bbox.min.y - 2.0),
                max: Point2::new(bbox.max.x + 2.0, bbox.max.y + 2.0),
            };
            if boxes.iter().any(|b| b.intersects(&padded, 0.0)) {
                continue;
            }
            boxes.push(padded);
            buildings.push(poly);
            continue 'outer;
        }
        // Could not place this footprint; accept a sparser scene.
    }

    let origin = GeoLocation::new(
        45.0 + (seed % 997) as f64 * 0.002,
        8.0 + (seed % 389) as f64 * 0.003,
        format!("synth-{}", seed % 10),
    )
    .expect("synthetic origin in range");
    Scene::new(buildings, origin).expect("synthetic scenes keep the center clear")
}

/// GeoJSON rendition of [`synthetic_scene`], for offline pipeline inputs.
pub fn synthetic_geojson(seed: u64, n_buildings: usize) -> String {
    scene_to_geojson(&synthetic_scene(seed, n_buildings))
}
