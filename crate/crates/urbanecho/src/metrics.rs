//! Evaluation harness: MAE and capped wMAPE in grayscale units, overall and
//! split by ray-traced line-of-sight visibility.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{visibility_mask, CellVisibility, Point2};
use crate::osm::Scene;
use crate::raster::SoundMap;

/// Metric bundle for one prediction/truth pair. The LoS/NLoS fields are
/// `None` when the corresponding pixel set is empty (an empty scene has no
/// shadow, so no NLoS metrics exist).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub wmape: f64,
    pub los_mae: Option<f64>,
    pub nlos_mae: Option<f64>,
    pub los_wmape: Option<f64>,
    pub nlos_wmape: Option<f64>,
    pub n_pixels: u64,
    pub n_los: u64,
    pub n_nlos: u64,
}

fn check_dims(pred: &[u8], truth: &[u8], mask: &[bool]) -> Result<()> {
    if pred.len() != truth.len() || pred.len() != mask.len() {
        return Err(Error::DimensionMismatch(format!(
            "pred {}, truth {}, mask {}",
            pred.len(),
            truth.len(),
            mask.len()
        )));
    }
    Ok(())
}

/// Mean absolute pixel difference over the masked pixels, grayscale units.
pub fn mae(pred: &[u8], truth: &[u8], mask: &[bool]) -> Result<f64> {
    check_dims(pred, truth, mask)?;
    let mut sum: u64 = 0;
    let mut count: u64 = 0;
    for i in 0..pred.len() {
        if mask[i] {
            sum += (pred[i] as i16 - truth[i] as i16).unsigned_abs() as u64;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(sum as f64 / count as f64)
}

/// Capped weighted mean absolute percentage error over the masked pixels:
/// per pixel `min(|p - t| / max(t, 1), 1)`, averaged and scaled to percent.
/// Pixels where the truth is dark and the prediction bright therefore
/// saturate at 100%.
pub fn wmape(pred: &[u8], truth: &[u8], mask: &[bool]) -> Result<f64> {
    check_dims(pred, truth, mask)?;
    let mut sum = 0.0;
    let mut count: u64 = 0;
    for i in 0..pred.len() {
        if mask[i] {
            let diff = (pred[i] as i16 - truth[i] as i16).unsigned_abs() as f64;
            let denom = (truth[i] as f64).max(1.0);
            sum += (diff / denom).min(1.0);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(100.0 * sum / count as f64)
}

fn metrics_over(pred: &[u8], truth: &[u8], mask: &[bool]) -> Result<Option<(f64, f64, u64)>> {
    let count = mask.iter().filter(|&&m| m).count() as u64;
    if count == 0 {
        return Ok(None);
    }
    Ok(Some((
        mae(pred, truth, mask)?,
        wmape(pred, truth, mask)?,
        count,
    )))
}

/// Evaluates a prediction against the simulated truth: ray-traces visibility
/// from the source and reports MAE/wMAPE over all non-building pixels and
/// over the LoS and NLoS subsets. Building pixels never count.
pub fn evaluate(
    pred: &SoundMap,
    truth: &SoundMap,
    scene: &Scene,
    source: Point2,
) -> Result<MetricsReport> {
    if pred.resolution != truth.resolution {
        return Err(Error::DimensionMismatch(format!(
            "prediction {} vs truth {}",
            pred.resolution, truth.resolution
        )));
    }
    let visibility = visibility_mask(scene, source, truth.resolution)?;
    let evaluated: Vec<bool> = visibility
        .iter()
        .zip(&truth.building_mask)
        .map(|(v, &b)| *v != CellVisibility::Building && !b)
        .collect();
    let los: Vec<bool> = visibility
        .iter()
        .zip(&evaluated)
        .map(|(v, &e)| e && *v == CellVisibility::Los)
        .collect();
    let nlos: Vec<bool> = visibility
        .iter()
        .zip(&evaluated)
        .map(|(v, &e)| e && *v == CellVisibility::NLos)
        .collect();

    let Some((overall_mae, overall_wmape, n_pixels)) =
        metrics_over(&pred.gray, &truth.gray, &evaluated)?
    else {
        return Err(Error::EmptyMask);
    };
    let los_metrics = metrics_over(&pred.gray, &truth.gray, &los)?;
    let nlos_metrics = metrics_over(&pred.gray, &truth.gray, &nlos)?;

    Ok(MetricsReport {
        mae: overall_mae,
        wmape: overall_wmape,
        los_mae: los_metrics.map(|m| m.0),
        los_wmape: los_metrics.map(|m| m.1),
        nlos_mae: nlos_metrics.map(|m| m.0),
        nlos_wmape: nlos_metrics.map(|m| m.1),
        n_pixels,
        n_los: los_metrics.map_or(0, |m| m.2),
        n_nlos: nlos_metrics.map_or(0, |m| m.2),
    })
}

/// Macro-average of per-sample reports: metric means over the samples where
/// each metric exists, pixel counts summed.
pub fn aggregate(reports: &[MetricsReport]) -> Option<MetricsReport> {
    if reports.is_empty() {
        return None;
    }
    fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
        let v: Vec<f64> = values.collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
    Some(MetricsReport {
        mae: mean_of(reports.iter().map(|r| r.mae)).unwrap(),
        wmape: mean_of(reports.iter().map(|r| r.wmape)).unwrap(),
        los_mae: mean_of(reports.iter().filter_map(|r| r.los_mae)),
        nlos_mae: mean_of(reports.iter().filter_map(|r| r.nlos_mae)),
        los_wmape: mean_of(reports.iter().filter_map(|r| r.los_wmape)),
        nlos_wmape: mean_of(reports.iter().filter_map(|r| r.nlos_wmape)),
        n_pixels: reports.iter().map(|r| r.n_pixels).sum(),
        n_los: reports.iter().map(|r| r.n_los).sum(),
        n_nlos: reports.iter().map(|r| r.n_nlos).sum(),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

/// Aligned text table of labeled reports, one row per label.
pub fn format_table(rows: &[(String, MetricsReport)]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24} {:>8} {:>8} {:>9} {:>9} {:>11} {:>11}\n",
        "label", "MAE", "wMAPE", "LoS MAE", "NLoS MAE", "LoS wMAPE", "NLoS wMAPE"
    ));
    for (label, r) in rows {
        out.push_str(&format!(
            "{:<24} {:>8.2} {:>8.2} {:>9} {:>9} {:>11} {:>11}\n",
            label,
            r.mae,
            r.wmape,
            fmt_opt(r.los_mae),
            fmt_opt(r.nlos_mae),
            fmt_opt(r.los_wmape),
            fmt_opt(r.nlos_wmape),
        ));
    }
    out
}
