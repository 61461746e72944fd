//! Sample persistence: image pairs, the CSV manifest, and the
//! train/validation/test split.
//!
//! Layout per task: `<out>/<task>/osm/osm_<id>.png` (+ a `.geojson` geometry
//! sidecar), `<out>/<task>/soundmaps/<task>_<id>_LAEQ.png` (+ a `.json`
//! metadata sidecar), `<out>/<task>/manifest.csv`, and `splits.json`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::osm::write_atomic;
use crate::propagation::{TaskConfig, TaskVariant};
use crate::raster::{encode_gray_png, SoundMap};

const MANIFEST_HEADER: [&str; 9] = [
    "sample_id",
    "city",
    "lat",
    "long",
    "osm_path",
    "soundmap_path",
    "db",
    "temperature",
    "humidity",
];

/// One manifest row. Paths are relative to the manifest's directory so the
/// dataset stays relocatable; temperature and humidity are present only for
/// tasks that vary them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: u64,
    pub city: String,
    pub lat: f64,
    pub lon: f64,
    pub osm_path: String,
    pub soundmap_path: String,
    pub db: f64,
    pub temperature: Option<f64>,
    pub humidity: Option<f64>,
}

/// Inputs for one sample write.
#[derive(Debug, Clone)]
pub struct SampleMeta {
    pub sample_id: u64,
    pub city: String,
    pub lat: f64,
    pub lon: f64,
    pub db: f64,
    pub temperature: Option<f64>,
    pub humidity: Option<f64>,
}

fn format_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn manifest_csv(rows: &[SampleRecord]) -> String {
    let mut out = MANIFEST_HEADER.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.sample_id,
            r.city,
            r.lat,
            r.lon,
            r.osm_path,
            r.soundmap_path,
            r.db,
            format_opt(r.temperature),
            format_opt(r.humidity),
        ));
    }
    out
}

/// Writer for one task's dataset directory. Appends are crash-tolerant: both
/// images are written atomically before the manifest row is committed, and a
/// rerun after a crash converges by rewriting the images and adding the
/// missing row.
pub struct DatasetWriter {
    task: TaskVariant,
    task_dir: PathBuf,
    rows: Vec<SampleRecord>,
    known_ids: HashSet<u64>,
}

impl DatasetWriter {
    /// Opens (creating if necessary) `<out_dir>/<task>/`, loading any
    /// existing manifest so duplicate ids are rejected across runs.
    pub fn open(out_dir: &Path, task: TaskVariant) -> Result<Self> {
        let task_dir = out_dir.join(task.as_str());
        for sub in ["osm", "soundmaps"] {
            let dir = task_dir.join(sub);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        let manifest = task_dir.join("manifest.csv");
        let rows = if manifest.exists() {
            read_manifest(&manifest)?
        } else {
            Vec::new()
        };
        let known_ids = rows.iter().map(|r| r.sample_id).collect();
        Ok(Self {
            task,
            task_dir,
            rows,
            known_ids,
        })
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.task_dir.join("manifest.csv")
    }

    pub fn task_dir(&self) -> &Path {
        &self.task_dir
    }

    pub fn rows(&self) -> &[SampleRecord] {
        &self.rows
    }

    /// Persists one sample: building-mask PNG, geometry sidecar, sound-map
    /// PNG, metadata sidecar, then the manifest row.
    pub fn write_sample(
        &mut self,
        meta: &SampleMeta,
        scene_mask: &[u8],
        mask_resolution: u32,
        scene_geojson: &str,
        sound_map: &SoundMap,
        config: &TaskConfig,
    ) -> Result<SampleRecord> {
        if self.known_ids.contains(&meta.sample_id) {
            return Err(Error::DuplicateSampleId(meta.sample_id));
        }
        let id = meta.sample_id;
        let osm_rel = format!("osm/osm_{id}.png");
        let sound_rel = format!("soundmaps/{}_{id}_LAEQ.png", self.task.as_str());

        let osm_png = encode_gray_png(scene_mask, mask_resolution)?;
        write_atomic(&self.task_dir.join(&osm_rel), &osm_png)?;
        write_atomic(
            &self.task_dir.join(format!("osm/osm_{id}.geojson")),
            scene_geojson.as_bytes(),
        )?;
        let map_png = encode_gray_png(&sound_map.gray, sound_map.resolution)?;
        write_atomic(&self.task_dir.join(&sound_rel), &map_png)?;
        write_atomic(
            &self
                .task_dir
                .join(format!("soundmaps/{}_{id}_LAEQ.json", self.task.as_str())),
            sound_map.metadata_json(config).as_bytes(),
        )?;

        let record = SampleRecord {
            sample_id: id,
            city: meta.city.clone(),
            lat: meta.lat,
            lon: meta.lon,
            osm_path: osm_rel,
            soundmap_path: sound_rel,
            db: meta.db,
            temperature: meta.temperature,
            humidity: meta.humidity,
        };
        self.rows.push(record.clone());
        self.known_ids.insert(id);
        // Keep the on-disk manifest sorted and complete after every sample;
        // the rewrite is atomic so a crash leaves a valid previous version.
        self.rows.sort_by_key(|r| r.sample_id);
        write_atomic(&self.manifest_path(), manifest_csv(&self.rows).as_bytes())?;
        Ok(record)
    }
}

/// Reads a manifest back into records. Unknown extra columns are ignored;
/// missing required columns or malformed rows fail with their location.
pub fn read_manifest(path: &Path) -> Result<Vec<SampleRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        .clone();
    let mut col = std::collections::HashMap::new();
    for (i, name) in headers.iter().enumerate() {
        col.insert(name.to_string(), i);
    }
    for required in MANIFEST_HEADER {
        if !col.contains_key(required) {
            return Err(Error::Parse(format!(
                "{}: missing manifest column '{required}'",
                path.display()
            )));
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |name: &str| -> Result<&str> {
            record
                .get(col[name])
                .ok_or_else(|| Error::ManifestRow {
                    line,
                    detail: format!("missing field '{name}'"),
                })
        };
        let parse_f64 = |name: &str| -> Result<f64> {
            field(name)?.parse().map_err(|_| Error::ManifestRow {
                line,
                detail: format!("field '{name}' is not a number: '{}'", field(name).unwrap()),
            })
        };
        let parse_opt = |name: &str| -> Result<Option<f64>> {
            let raw = field(name)?;
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse().map(Some).map_err(|_| Error::ManifestRow {
                line,
                detail: format!("field '{name}' is not a number: '{raw}'"),
            })
        };
        rows.push(SampleRecord {
            sample_id: field("sample_id")?.parse().map_err(|_| Error::ManifestRow {
                line,
                detail: format!("bad sample_id '{}'", field("sample_id").unwrap()),
            })?,
            city: field("city")?.to_string(),
            lat: parse_f64("lat")?,
            lon: parse_f64("long")?,
            osm_path: field("osm_path")?.to_string(),
            soundmap_path: field("soundmap_path")?.to_string(),
            db: parse_f64("db")?,
            temperature: parse_opt("temperature")?,
            humidity: parse_opt("humidity")?,
        });
    }
    Ok(rows)
}

/// Disjoint train/validation/test id sets covering every input id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub train: Vec<u64>,
    pub validation: Vec<u64>,
    pub test: Vec<u64>,
}

/// Split fractions: 80% train, 15% validation, 5% test.
pub const SPLIT_FRACTIONS: [f64; 3] = [0.80, 0.15, 0.05];

/// Deterministically partitions ids 80/15/5 by count using largest-remainder
/// rounding (remainder ties go to the emptier partition, test first), after a
/// seed-keyed shuffle.
pub fn make_split(ids: &[u64], seed: u64) -> Result<SplitAssignment> {
    if ids.is_empty() {
        return Err(Error::Validation("cannot split an empty id list".into()));
    }
    let unique: HashSet<u64> = ids.iter().copied().collect();
    if unique.len() != ids.len() {
        return Err(Error::Validation("duplicate sample ids in split".into()));
    }
    let mut shuffled: Vec<u64> = ids.to_vec();
    shuffled.sort_unstable();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);

    let n = shuffled.len();
    let quotas: Vec<f64> = SPLIT_FRACTIONS.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    // Largest remainder first; ties prefer the partition with fewer ids and,
    // on a full tie, the later partition (test before validation).
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - counts[a] as f64;
        let rb = quotas[b] - counts[b] as f64;
        rb.total_cmp(&ra)
            .then(counts[a].cmp(&counts[b]))
            .then(b.cmp(&a))
    });
    for i in 0..(n - assigned) {
        counts[order[i % 3]] += 1;
    }

    let train: Vec<u64> = shuffled[..counts[0]].to_vec();
    let validation: Vec<u64> = shuffled[counts[0]..counts[0] + counts[1]].to_vec();
    let test: Vec<u64> = shuffled[counts[0] + counts[1]..].to_vec();
    let mut split = SplitAssignment {
        train,
        validation,
        test,
    };
    split.train.sort_unstable();
    split.validation.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

pub fn write_splits_json(path: &Path, split: &SplitAssignment) -> Result<()> {
    let json = serde_json::to_string_pretty(split)
        .map_err(|e| Error::Parse(format!("serializing splits: {e}")))?;
    write_atomic(path, json.as_bytes())
}

pub fn read_splits_json(path: &Path) -> Result<SplitAssignment> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::TaskVariant;
    use crate::scenario::make_task;

    fn tiny_soundmap() -> SoundMap {
        let res = 8u32;
        let n = (res * res) as usize;
        SoundMap {
            resolution: res,
            db_values: vec![50.0; n],
            gray: vec![128; n],
            building_mask: vec![false; n],
            pixel_pitch_m: 500.0 / res as f64,
        }
    }

    fn meta(id: u64) -> SampleMeta {
        SampleMeta {
            sample_id: id,
            city: "testville".into(),
            lat: 48.1,
            lon: 11.5,
            db: 95.0,
            temperature: None,
            humidity: None,
        }
    }

    #[test]
    fn write_then_read_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let config = make_task(TaskVariant::Baseline, 0, 0);
        let mut writer = DatasetWriter::open(dir.path(), TaskVariant::Baseline).unwrap();
        let mask = vec![255u8; 64];
        for id in [3u64, 1, 2] {
            writer
                .write_sample(&meta(id), &mask, 8, "{}", &tiny_soundmap(), &config)
                .unwrap();
        }
        let rows = read_manifest(&writer.manifest_path()).unwrap();
        assert_eq!(rows.len(), 3);
        // Manifest is sorted by id regardless of write order.
        assert_eq!(
            rows.iter().map(|r| r.sample_id).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
        for r in &rows {
            assert!(dir
                .path()
                .join("baseline")
                .join(&r.osm_path)
                .exists());
            assert!(dir
                .path()
                .join("baseline")
                .join(&r.soundmap_path)
                .exists());
            assert_eq!(r.db, 95.0);
            assert_eq!(r.temperature, None);
        }
        assert!(rows[0].osm_path.contains("osm_1.png"));
        assert!(rows[0].soundmap_path.contains("baseline_1_LAEQ.png"));
    }

    #[test]
    fn duplicate_id_rejected_manifest_unchanged() {
        let dir = tempfile::tempdir().unwrap();
        let config = make_task(TaskVariant::Baseline, 0, 0);
        let mut writer = DatasetWriter::open(dir.path(), TaskVariant::Baseline).unwrap();
        let mask = vec![255u8; 64];
        writer
            .write_sample(&meta(42), &mask, 8, "{}", &tiny_soundmap(), &config)
            .unwrap();
        let before = std::fs::read(writer.manifest_path()).unwrap();
        let err = writer
            .write_sample(&meta(42), &mask, 8, "{}", &tiny_soundmap(), &config)
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateSampleId(42)));
        let after = std::fs::read(writer.manifest_path()).unwrap();
        assert_eq!(before, after);

        // Also rejected across a reopen.
        let mut reopened = DatasetWriter::open(dir.path(), TaskVariant::Baseline).unwrap();
        assert!(reopened
            .write_sample(&meta(42), &mask, 8, "{}", &tiny_soundmap(), &config)
            .is_err());
    }

    #[test]
    fn crash_between_images_and_manifest_converges_on_rerun() {
        let dir = tempfile::tempdir().unwrap();
        let config = make_task(TaskVariant::Baseline, 0, 0);
        // Simulate the crash: image files exist, manifest row does not.
        let task_dir = dir.path().join("baseline");
        std::fs::create_dir_all(task_dir.join("osm")).unwrap();
        std::fs::create_dir_all(task_dir.join("soundmaps")).unwrap();
        std::fs::write(task_dir.join("osm/osm_7.png"), b"stale").unwrap();
        std::fs::write(task_dir.join("soundmaps/baseline_7_LAEQ.png"), b"stale").unwrap();

        let mut writer = DatasetWriter::open(dir.path(), TaskVariant::Baseline).unwrap();
        let mask = vec![255u8; 64];
        writer
            .write_sample(&meta(7), &mask, 8, "{}", &tiny_soundmap(), &config)
            .unwrap();
        let rows = read_manifest(&writer.manifest_path()).unwrap();
        assert_eq!(rows.len(), 1);
        // The stale image was replaced with a real PNG.
        let bytes = std::fs::read(task_dir.join("osm/osm_7.png")).unwrap();
        assert_eq!(&bytes[1..4], b"PNG");
    }

    #[test]
    fn split_ratios_exact_for_1000() {
        let ids: Vec<u64> = (0..1000).collect();
        let split = make_split(&ids, 17).unwrap();
        assert_eq!(split.train.len(), 800);
        assert_eq!(split.validation.len(), 150);
        assert_eq!(split.test.len(), 50);
    }

    #[test]
    fn split_small_set_largest_remainder() {
        let ids: Vec<u64> = (0..10).collect();
        let split = make_split(&ids, 3).unwrap();
        assert_eq!(
            (split.train.len(), split.validation.len(), split.test.len()),
            (8, 1, 1)
        );
    }

    #[test]
    fn split_deterministic_disjoint_covering() {
        let ids: Vec<u64> = (0..137).map(|i| i * 3 + 1).collect();
        let a = make_split(&ids, 9).unwrap();
        let b = make_split(&ids, 9).unwrap();
        assert_eq!(a, b);
        let c = make_split(&ids, 10).unwrap();
        assert_ne!(a, c);

        let mut all: Vec<u64> = a
            .train
            .iter()
            .chain(&a.validation)
            .chain(&a.test)
            .copied()
            .collect();
        all.sort_unstable();
        let mut expect = ids.clone();
        expect.sort_unstable();
        assert_eq!(all, expect);
    }

    #[test]
    fn split_rejects_bad_input() {
        assert!(make_split(&[], 0).is_err());
        assert!(make_split(&[1, 1, 2], 0).is_err());
    }

    #[test]
    fn manifest_missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        std::fs::write(
            &path,
            "sample_id,city,lat,long,osm_path,soundmap_path,db,temperature\n1,x,0,0,a,b,95,\n",
        )
        .unwrap();
        let err = read_manifest(&path).unwrap_err();
        assert!(err.to_string().contains("humidity"), "{err}");
    }

    #[test]
    fn manifest_extra_column_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        std::fs::write(
            &path,
            "sample_id,city,lat,long,osm_path,soundmap_path,db,temperature,humidity,note\n\
             5,x,1.5,2.5,a.png,b.png,87.25,12,55,hello\n",
        )
        .unwrap();
        let rows = read_manifest(&path).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].sample_id, 5);
        assert_eq!(rows[0].lat, 1.5);
        assert_eq!(rows[0].lon, 2.5);
        assert_eq!(rows[0].db, 87.25);
        assert_eq!(rows[0].temperature, Some(12.0));
        assert_eq!(rows[0].humidity, Some(55.0));
    }

    #[test]
    fn manifest_bad_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        std::fs::write(
            &path,
            "sample_id,city,lat,long,osm_path,soundmap_path,db,temperature,humidity\n\
             1,x,0,0,a,b,95,,\n\
             oops,x,0,0,a,b,95,,\n",
        )
        .unwrap();
        let err = read_manifest(&path).unwrap_err();
        assert!(matches!(err, Error::ManifestRow { line: 3, .. }), "{err}");
    }

    #[test]
    fn splits_json_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("splits.json");
        let split = make_split(&(0..50).collect::<Vec<u64>>(), 1).unwrap();
        write_splits_json(&path, &split).unwrap();
        assert_eq!(read_splits_json(&path).unwrap(), split);
    }
}
