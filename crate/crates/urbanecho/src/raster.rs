//! Scattered-receiver to raster interpolation and the dB ↔ grayscale
//! encoding used by every emitted sound map.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, FloatTriangulation, HasPosition, Point2 as SpadePoint, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::PixelGrid;
use crate::grid::ReceiverGrid;
use crate::osm::Scene;
use crate::parallel;
use crate::propagation::TaskConfig;

/// A rendered sound map: dB field, grayscale encoding, and building mask at
/// a fixed resolution. Row 0 is the north edge.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SoundMap {
    pub resolution: u32,
    pub db_values: Vec<f64>,
    pub gray: Vec<u8>,
    pub building_mask: Vec<bool>,
    pub pixel_pitch_m: f64,
}

/// Maps the 0–100 dB range onto 0–255, rounding half away from zero.
pub fn encode_gray(db: f64) -> u8 {
    let clamped = if db.is_nan() { 0.0 } else { db.clamp(0.0, 100.0) };
    (clamped * 255.0 / 100.0).round() as u8
}

/// Inverse of [`encode_gray`] up to quantization.
pub fn decode_gray(gray: u8) -> f64 {
    gray as f64 * 100.0 / 255.0
}

struct Sample {
    pos: SpadePoint<f64>,
    value: f64,
}

impl HasPosition for Sample {
    type Scalar = f64;
    fn position(&self) -> SpadePoint<f64> {
        self.pos
    }
}

/// Interpolates receiver levels onto a raster: barycentric interpolation on
/// the Delaunay triangulation of the receivers, nearest-receiver fallback
/// outside the convex hull, silent receivers as 0 dB, and building pixels
/// forced to 0 dB.
pub fn interpolate(grid: &ReceiverGrid, scene: &Scene, resolution: u32) -> Result<SoundMap> {
    let mut triangulation: DelaunayTriangulation<Sample> = DelaunayTriangulation::new();
    for r in grid.receivers() {
        triangulation
            .insert(Sample {
                pos: SpadePoint::new(r.position.x, r.position.y),
                value: r.level_db.unwrap_or(0.0),
            })
            .map_err(|e| Error::DegenerateInput(format!("receiver triangulation: {e}")))?;
    }
    if triangulation.num_inner_faces() == 0 {
        return Err(Error::DegenerateInput(
            "need at least 3 non-collinear receivers to interpolate".into(),
        ));
    }

    let pixel_grid = PixelGrid::new(resolution, scene.extent_m);
    let rows: Vec<Vec<(f64, bool)>> = parallel::map_range(resolution as usize, |row| {
        let row = row as u32;
        let barycentric = triangulation.barycentric();
        (0..resolution)
            .map(|col| {
                let c = pixel_grid.center(row, col);
                if scene.buildings().iter().any(|b| b.contains(c)) {
                    return (0.0, true);
                }
                let p = SpadePoint::new(c.x, c.y);
                let db = barycentric
                    .interpolate(|v| v.data().value, p)
                    .unwrap_or_else(|| {
                        triangulation
                            .nearest_neighbor(p)
                            .map(|v| v.data().value)
                            .unwrap_or(0.0)
                    });
                (db, false)
            })
            .collect()
    });

    let mut db_values = Vec::with_capacity(pixel_grid.len());
    let mut building_mask = Vec::with_capacity(pixel_grid.len());
    for row in rows {
        for (db, building) in row {
            db_values.push(db);
            building_mask.push(building);
        }
    }
    let gray = db_values.iter().map(|&db| encode_gray(db)).collect();
    Ok(SoundMap {
        resolution,
        db_values,
        gray,
        building_mask,
        pixel_pitch_m: pixel_grid.pitch_m(),
    })
}

impl SoundMap {
    pub fn write_png(&self, path: &Path) -> Result<()> {
        write_gray_png(path, &self.gray, self.resolution)
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        write_gray_pgm(path, &self.gray, self.resolution)
    }

    /// Sidecar metadata describing how the map was produced.
    pub fn metadata_json(&self, config: &TaskConfig) -> String {
        serde_json::json!({
            "resolution": self.resolution,
            "pixel_pitch_m": self.pixel_pitch_m,
            "task": config.variant.as_str(),
            "config": config,
        })
        .to_string()
    }
}

/// Encodes a square 8-bit grayscale raster as PNG bytes.
pub fn encode_gray_png(pixels: &[u8], side: u32) -> Result<Vec<u8>> {
    use image::{GrayImage, ImageEncoder};
    let img = GrayImage::from_raw(side, side, pixels.to_vec())
        .ok_or_else(|| Error::DimensionMismatch("pixel buffer does not match side".into()))?;
    let mut bytes = Vec::new();
    image::codecs::png::PngEncoder::new(&mut bytes)
        .write_image(&img, side, side, image::ExtendedColorType::L8)
        .map_err(|e| Error::Parse(format!("PNG encode: {e}")))?;
    Ok(bytes)
}

pub fn write_gray_png(path: &Path, pixels: &[u8], side: u32) -> Result<()> {
    let bytes = encode_gray_png(pixels, side)?;
    crate::osm::write_atomic(path, &bytes)
}

pub fn write_gray_pgm(path: &Path, pixels: &[u8], side: u32) -> Result<()> {
    let mut bytes = format!("P5\n{side} {side}\n255\n").into_bytes();
    bytes.extend_from_slice(pixels);
    crate::osm::write_atomic(path, &bytes)
}

/// Loads an 8-bit grayscale image (any format the decoder recognizes),
/// returning pixels and the square side length.
pub fn load_gray_image(path: &Path) -> Result<(Vec<u8>, u32)> {
    let img = image::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let gray = img.to_luma8();
    let (w, h) = gray.dimensions();
    if w != h {
        return Err(Error::DimensionMismatch(format!(
            "{}: expected a square image, got {w}x{h}",
            path.display()
        )));
    }
    Ok((gray.into_raw(), w))
}
