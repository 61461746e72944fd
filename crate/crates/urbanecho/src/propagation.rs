//! The physics engine: enumerates direct, diffracted, and specularly
//! reflected propagation paths per receiver and combines per-path levels
//! energetically.
//!
//! Per-path received level is source level (adjusted for reflection losses)
//! minus geometrical spreading, atmospheric absorption, and diffraction
//! attenuation. Ground effect and vertical diffraction are outside this
//! model: the engine is strictly 2D horizontal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    self, line_of_sight, orient, DetourField, Point2, Segment2, VisibilityGraph,
};
use crate::grid::ReceiverGrid;
use crate::osm::Scene;
use crate::parallel;

/// Speed of sound used for the diffraction wavelength, m/s.
pub const SPEED_OF_SOUND_M_S: f64 = 340.0;

/// Spreading and absorption are evaluated at no less than this distance, so
/// a receiver sitting on the source stays finite.
pub const MIN_ATTENUATION_DISTANCE_M: f64 = 1.0;

/// Sound source: a single power level at a single frequency band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub level_db: f64,
    pub frequency_hz: f64,
}

impl SourceSpec {
    pub fn new(level_db: f64, frequency_hz: f64) -> Result<Self> {
        if !level_db.is_finite() || !(0.0..=200.0).contains(&level_db) {
            return Err(Error::Validation(format!(
                "source level {level_db} dB out of range"
            )));
        }
        if !frequency_hz.is_finite() || frequency_hz <= 0.0 {
            return Err(Error::Validation(format!(
                "frequency {frequency_hz} Hz must be positive"
            )));
        }
        Ok(Self {
            level_db,
            frequency_hz,
        })
    }
}

/// Atmospheric conditions for the absorption model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub temperature_c: f64,
    pub humidity_pct: f64,
}

impl Environment {
    pub fn new(temperature_c: f64, humidity_pct: f64) -> Result<Self> {
        if !(-20.0..=40.0).contains(&temperature_c) {
            return Err(Error::Validation(format!(
                "temperature {temperature_c} °C out of range [-20, 40]"
            )));
        }
        if !(10.0..=100.0).contains(&humidity_pct) {
            return Err(Error::Validation(format!(
                "humidity {humidity_pct} % out of range [10, 100]"
            )));
        }
        Ok(Self {
            temperature_c,
            humidity_pct,
        })
    }
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            temperature_c: 20.0,
            humidity_pct: 70.0,
        }
    }
}

/// The four benchmark task variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskVariant {
    Baseline,
    Diffraction,
    Reflection,
    Combined,
}

impl TaskVariant {
    pub const ALL: [TaskVariant; 4] = [
        TaskVariant::Baseline,
        TaskVariant::Diffraction,
        TaskVariant::Reflection,
        TaskVariant::Combined,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TaskVariant::Baseline => "baseline",
            TaskVariant::Diffraction => "diffraction",
            TaskVariant::Reflection => "reflection",
            TaskVariant::Combined => "combined",
        }
    }
}

impl std::fmt::Display for TaskVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TaskVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(TaskVariant::Baseline),
            "diffraction" => Ok(TaskVariant::Diffraction),
            "reflection" => Ok(TaskVariant::Reflection),
            "combined" => Ok(TaskVariant::Combined),
            other => Err(Error::Validation(format!("unknown task variant '{other}'"))),
        }
    }
}

/// Task variant plus every physics knob needed to simulate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskConfig {
    pub variant: TaskVariant,
    pub source: SourceSpec,
    pub env: Environment,
    pub enable_diffraction: bool,
    pub max_reflection_order: u32,
    pub alpha_vert: f64,
    pub enable_atmosphere: bool,
}

impl TaskConfig {
    /// Checks the structural invariants of each variant.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha_vert) {
            return Err(Error::Domain(format!(
                "alpha_vert {} outside [0, 1)",
                self.alpha_vert
            )));
        }
        match self.variant {
            TaskVariant::Baseline => {
                if self.enable_diffraction || self.max_reflection_order != 0 {
                    return Err(Error::Validation(
                        "baseline task must disable diffraction and reflections".into(),
                    ));
                }
            }
            TaskVariant::Diffraction => {
                if !self.enable_diffraction || self.max_reflection_order != 0 {
                    return Err(Error::Validation(
                        "diffraction task needs diffraction on and reflections off".into(),
                    ));
                }
            }
            TaskVariant::Reflection => {
                if self.max_reflection_order == 0 {
                    return Err(Error::Validation(
                        "reflection task needs reflection order >= 1".into(),
                    ));
                }
            }
            TaskVariant::Combined => {
                if !self.enable_diffraction || self.max_reflection_order == 0 {
                    return Err(Error::Validation(
                        "combined task needs diffraction and reflections enabled".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// How a path travels from source to receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Direct,
    Diffracted,
    Reflected,
}

impl PathKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PathKind::Direct => "direct",
            PathKind::Diffracted => "diffracted",
            PathKind::Reflected => "reflected",
        }
    }
}

/// One propagation path with the geometry the attenuation terms need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationPath {
    pub kind: PathKind,
    pub length_m: f64,
    pub reflection_order: u32,
    /// Extra length of the detour over the straight line (diffracted only).
    pub detour_delta_m: f64,
    pub vertices: Vec<Point2>,
}

/// Attenuation breakdown of a single path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathAttenuation {
    pub a_div_db: f64,
    pub a_atm_db: f64,
    pub a_dif_db: f64,
    pub adjusted_source_db: f64,
}

/// Geometrical spreading of a point source: `20·log10(d) + 11`.
pub fn attenuation_div(distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::Domain(format!(
            "spreading distance must be positive, got {distance_m}"
        )));
    }
    Ok(20.0 * distance_m.log10() + 11.0)
}

/// Pure-air absorption coefficient in dB/km at reference pressure
/// (ISO 9613-1 closed form).
pub fn air_absorption_db_per_km(frequency_hz: f64, env: &Environment) -> f64 {
    let t_kelvin = env.temperature_c + 273.15;
    let t_rel = t_kelvin / 293.15;
    // Molar water-vapor concentration from relative humidity via the
    // saturation pressure exponent (273.16 K = triple point).
    let c = -6.8346 * (273.16 / t_kelvin).powf(1.261) + 4.6151;
    let h = env.humidity_pct * 10f64.powf(c);
    let fr_o = 24.0 + 4.04e4 * h * (0.02 + h) / (0.391 + h);
    let fr_n =
        t_rel.powf(-0.5) * (9.0 + 280.0 * h * (-4.170 * (t_rel.powf(-1.0 / 3.0) - 1.0)).exp());
    let f2 = frequency_hz * frequency_hz;
    let alpha_per_m = 8.686
        * f2
        * (1.84e-11 * t_rel.sqrt()
            + t_rel.powf(-2.5)
                * (0.01275 * (-2239.1 / t_kelvin).exp() / (fr_o + f2 / fr_o)
                    + 0.1068 * (-3352.0 / t_kelvin).exp() / (fr_n + f2 / fr_n)));
    1000.0 * alpha_per_m
}

/// Atmospheric absorption over `distance_m` at the given band and conditions.
pub fn attenuation_atm(distance_m: f64, frequency_hz: f64, env: &Environment) -> f64 {
    debug_assert!(distance_m >= 0.0);
    air_absorption_db_per_km(frequency_hz, env) * distance_m / 1000.0
}

/// Horizontal diffraction attenuation from the detour excess `delta`:
/// `max(0, 10·log10(3 + (40/λ)·δ))` with `λ = 340 / f`.
pub fn attenuation_dif(delta_m: f64, frequency_hz: f64) -> Result<f64> {
    if delta_m < 0.0 {
        return Err(Error::Domain(format!(
            "detour delta must be nonnegative, got {delta_m}"
        )));
    }
    let lambda = SPEED_OF_SOUND_M_S / frequency_hz;
    Ok((10.0 * (3.0 + 40.0 / lambda * delta_m).log10()).max(0.0))
}

/// Source power after `n_ref` wall reflections with absorption `alpha_vert`:
/// the recurrence `L(n) = L(n-1) + n·10·log10(1 - α)` unrolled from zero,
/// i.e. `L(n) = L(0) + (n(n+1)/2)·10·log10(1 - α)`.
pub fn reflection_adjusted_source(level_db: f64, n_ref: u32, alpha_vert: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha_vert) {
        return Err(Error::Domain(format!(
            "alpha_vert {alpha_vert} outside [0, 1)"
        )));
    }
    let triangular = (n_ref as f64) * (n_ref as f64 + 1.0) / 2.0;
    Ok(level_db + triangular * 10.0 * (1.0 - alpha_vert).log10())
}

/// Attenuation terms of one path under a task configuration.
pub fn path_attenuation(path: &PropagationPath, config: &TaskConfig) -> Result<PathAttenuation> {
    let d = path.length_m.max(MIN_ATTENUATION_DISTANCE_M);
    let a_div_db = attenuation_div(d)?;
    let a_atm_db = if config.enable_atmosphere {
        attenuation_atm(d, config.source.frequency_hz, &config.env)
    } else {
        0.0
    };
    let a_dif_db = if path.kind == PathKind::Diffracted {
        attenuation_dif(path.detour_delta_m, config.source.frequency_hz)?
    } else {
        0.0
    };
    let adjusted_source_db = reflection_adjusted_source(
        config.source.level_db,
        path.reflection_order,
        config.alpha_vert,
    )?;
    Ok(PathAttenuation {
        a_div_db,
        a_atm_db,
        a_dif_db,
        adjusted_source_db,
    })
}

/// Received level of one path in dB.
pub fn path_level_db(path: &PropagationPath, config: &TaskConfig) -> Result<f64> {
    let att = path_attenuation(path, config)?;
    Ok(att.adjusted_source_db - att.a_div_db - att.a_atm_db - att.a_dif_db)
}

/// Energetic combination of path levels: `10·log10(Σ 10^(Lᵢ/10))`, or `None`
/// when no path reaches the receiver. Contributions are accumulated in a
/// canonical order, so the result is exactly permutation-invariant.
pub fn receiver_level(paths: &[PropagationPath], config: &TaskConfig) -> Result<Option<f64>> {
    if paths.is_empty() {
        return Ok(None);
    }
    let mut powers = Vec::with_capacity(paths.len());
    for path in paths {
        powers.push(10f64.powf(path_level_db(path, config)? / 10.0));
    }
    powers.sort_by(|a, b| a.total_cmp(b));
    let total: f64 = powers.iter().sum();
    Ok(Some(10.0 * total.log10()))
}

const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct MirrorNode {
    image: Point2,
    wall: u32,
    parent: u32,
    order: u32,
}

/// Image-source tree: source images over wall-bounce sequences up to a
/// maximum order, shared by every receiver of a scene. Children are pruned
/// when the reflected beam off the parent wall cannot reach them.
#[derive(Debug, Clone)]
struct MirrorTree {
    walls: Vec<Segment2>,
    nodes: Vec<MirrorNode>,
}

fn mirror_across(p: Point2, wall: &Segment2) -> Point2 {
    let d = wall.b - wall.a;
    let t = (p - wall.a).dot(d) / d.dot(d);
    let foot = wall.a + d * t;
    foot + (foot - p)
}

/// Intersection of segment `image -> target` with the wall's carrier line,
/// valid only when it falls inside both spans.
fn specular_point(image: Point2, target: Point2, wall: &Segment2) -> Option<Point2> {
    let d_wall = wall.b - wall.a;
    let d_ray = target - image;
    let denom = d_wall.cross(d_ray);
    if denom.abs() < 1e-12 {
        return None;
    }
    let diff = image - wall.a;
    let s = diff.cross(d_ray) / denom;
    let t = diff.cross(d_wall) / denom;
    let eps_t = 1e-12;
    if !(eps_t..=1.0 - eps_t).contains(&t) {
        return None;
    }
    let wall_len = d_wall.norm();
    let eps_s = geometry::ORIENT_EPS / wall_len;
    if !(-eps_s..=1.0 + eps_s).contains(&s) {
        return None;
    }
    Some(wall.a + d_wall * s.clamp(0.0, 1.0))
}

impl MirrorTree {
    fn build(scene: &Scene, source: Point2, max_order: u32) -> Self {
        let walls: Vec<Segment2> = scene
            .buildings()
            .iter()
            .flat_map(|poly| poly.edges().collect::<Vec<_>>())
            .collect();
        let mut nodes: Vec<MirrorNode> = Vec::new();
        if max_order == 0 || walls.is_empty() {
            return Self { walls, nodes };
        }

        let mut frontier: Vec<u32> = Vec::new();
        for (w_idx, wall) in walls.iter().enumerate() {
            let side = orient(wall.a, wall.b, source);
            if side.abs() <= geometry::ORIENT_EPS {
                continue; // source on the wall line: no meaningful mirror
            }
            nodes.push(MirrorNode {
                image: mirror_across(source, wall),
                wall: w_idx as u32,
                parent: NO_PARENT,
                order: 1,
            });
            frontier.push(nodes.len() as u32 - 1);
        }

        for _order in 2..=max_order {
            let mut next = Vec::new();
            for &node_idx in &frontier {
                let node = nodes[node_idx as usize];
                let wall = walls[node.wall as usize];
                for (w_idx, candidate) in walls.iter().enumerate() {
                    if w_idx as u32 == node.wall {
                        continue;
                    }
                    if !beam_may_reach(node.image, &wall, candidate) {
                        continue;
                    }
                    let side = orient(candidate.a, candidate.b, node.image);
                    if side.abs() <= geometry::ORIENT_EPS {
                        continue;
                    }
                    nodes.push(MirrorNode {
                        image: mirror_across(node.image, candidate),
                        wall: w_idx as u32,
                        parent: node_idx,
                        order: node.order + 1,
                    });
                    next.push(nodes.len() as u32 - 1);
                }
            }
            frontier = next;
        }
        Self { walls, nodes }
    }

    /// Validates every image node against one receiver, returning the
    /// realizable reflected paths.
    fn paths_to(&self, scene: &Scene, source: Point2, receiver: Point2) -> Vec<PropagationPath> {
        let mut out = Vec::new();
        let mut chain: Vec<Point2> = Vec::new();
        'nodes: for node in &self.nodes {
            chain.clear();
            let mut target = receiver;
            let mut cursor = node;
            loop {
                let wall = &self.walls[cursor.wall as usize];
                let Some(p) = specular_point(cursor.image, target, wall) else {
                    continue 'nodes;
                };
                chain.push(p);
                target = p;
                if cursor.parent == NO_PARENT {
                    break;
                }
                cursor = &self.nodes[cursor.parent as usize];
            }
            chain.push(source);
            chain.reverse(); // source, P1, ..., Pk
            chain.push(receiver);
            for leg in chain.windows(2) {
                if leg[0].distance_sq(leg[1]) <= 1e-18 {
                    continue 'nodes; // degenerate bounce
                }
                if !line_of_sight(scene, leg[0], leg[1]) {
                    continue 'nodes;
                }
            }
            out.push(PropagationPath {
                kind: PathKind::Reflected,
                length_m: node.image.distance(receiver),
                reflection_order: node.order,
                detour_delta_m: 0.0,
                vertices: chain.clone(),
            });
        }
        // Coincident walls (shared party walls between adjacent footprints)
        // can yield geometrically identical paths; keep one of each.
        out.sort_by(|a, b| {
            a.reflection_order
                .cmp(&b.reflection_order)
                .then(a.length_m.total_cmp(&b.length_m))
        });
        out.dedup_by(|a, b| {
            a.reflection_order == b.reflection_order
                && (a.length_m - b.length_m).abs() < 1e-9
                && a.vertices.len() == b.vertices.len()
                && a.vertices
                    .iter()
                    .zip(&b.vertices)
                    .all(|(p, q)| p.distance_sq(*q) < 1e-12)
        });
        out
    }
}

/// Can any ray from image `j` through wall `w` reach segment `candidate`?
/// Conservative: only prunes candidates provably outside the reflected beam.
fn beam_may_reach(image: Point2, wall: &Segment2, candidate: &Segment2) -> bool {
    let side_image = orient(wall.a, wall.b, image);
    let s1 = orient(wall.a, wall.b, candidate.a);
    let s2 = orient(wall.a, wall.b, candidate.b);
    let eps = geometry::ORIENT_EPS;
    // Both endpoints strictly on the image's side of the wall line: the beam
    // (which exits on the far side) cannot touch it.
    if s1 * side_image.signum() > eps && s2 * side_image.signum() > eps {
        return false;
    }
    // Angular span: both endpoints strictly outside the same wedge ray.
    let u = orient(image, wall.a, wall.b);
    if u.abs() <= eps {
        return true; // degenerate wedge, keep
    }
    let c1a = orient(image, wall.a, candidate.a) * u.signum();
    let c1b = orient(image, wall.a, candidate.b) * u.signum();
    if c1a < -eps && c1b < -eps {
        return false;
    }
    let c2a = orient(image, wall.b, candidate.a) * u.signum();
    let c2b = orient(image, wall.b, candidate.b) * u.signum();
    if c2a > eps && c2b > eps {
        return false;
    }
    true
}

/// Per-scene path finder: precomputes the image-source tree and the detour
/// field once, then answers per-receiver queries. Immutable and safe to share
/// across worker threads.
pub struct Propagator<'a> {
    scene: &'a Scene,
    source: Point2,
    config: &'a TaskConfig,
    mirrors: MirrorTree,
    detours: Option<(VisibilityGraph, DetourField)>,
}

impl<'a> Propagator<'a> {
    pub fn new(scene: &'a Scene, source: Point2, config: &'a TaskConfig) -> Result<Self> {
        config.validate()?;
        let mirrors = MirrorTree::build(scene, source, config.max_reflection_order);
        let detours = if config.enable_diffraction {
            let graph = VisibilityGraph::build(scene);
            let field = graph.from_point(scene, source);
            Some((graph, field))
        } else {
            None
        };
        Ok(Self {
            scene,
            source,
            config,
            mirrors,
            detours,
        })
    }

    pub fn source(&self) -> Point2 {
        self.source
    }

    /// All propagation paths reaching `receiver` under this configuration.
    pub fn find_paths(&self, receiver: Point2) -> Result<Vec<PropagationPath>> {
        if self
            .scene
            .buildings()
            .iter()
            .any(|b| b.contains_strict(receiver))
        {
            return Err(Error::Domain(format!(
                "receiver ({}, {}) lies inside a building",
                receiver.x, receiver.y
            )));
        }
        let mut paths = Vec::new();
        let direct_dist = self.source.distance(receiver);
        let has_sight = line_of_sight(self.scene, self.source, receiver);
        if has_sight {
            paths.push(PropagationPath {
                kind: PathKind::Direct,
                length_m: direct_dist,
                reflection_order: 0,
                detour_delta_m: 0.0,
                vertices: vec![self.source, receiver],
            });
        } else if let Some((graph, field)) = &self.detours {
            if let Some((vertices, length)) = field.detour_to(graph, self.scene, receiver) {
                paths.push(PropagationPath {
                    kind: PathKind::Diffracted,
                    length_m: length,
                    reflection_order: 0,
                    detour_delta_m: (length - direct_dist).max(0.0),
                    vertices,
                });
            }
        }
        if self.config.max_reflection_order > 0 {
            paths.extend(self.mirrors.paths_to(self.scene, self.source, receiver));
        }
        Ok(paths)
    }

    /// Combined level and path count for one receiver.
    pub fn receiver_report(&self, receiver: Point2) -> Result<(Option<f64>, usize)> {
        let paths = self.find_paths(receiver)?;
        let level = receiver_level(&paths, self.config)?;
        Ok((level, paths.len()))
    }
}

/// Convenience single-receiver entry point; batch callers should construct a
/// [`Propagator`] once per scene.
pub fn find_paths(
    scene: &Scene,
    source: Point2,
    receiver: Point2,
    config: &TaskConfig,
) -> Result<Vec<PropagationPath>> {
    Propagator::new(scene, source, config)?.find_paths(receiver)
}

/// Simulates every receiver of the grid, returning a new grid with levels
/// set. Receivers are independent; the result does not depend on worker
/// count or scheduling.
pub fn simulate(scene: &Scene, grid: &ReceiverGrid, config: &TaskConfig) -> Result<ReceiverGrid> {
    let propagator = Propagator::new(scene, scene.source, config)?;
    let levels = parallel::map_slice(grid.receivers(), |r| {
        propagator
            .find_paths(r.position)
            .and_then(|paths| receiver_level(&paths, config))
    });
    let mut receivers = grid.receivers().to_vec();
    for (receiver, level) in receivers.iter_mut().zip(levels) {
        // Levels are floored at 0 dB (the grayscale range floor); silent
        // receivers stay unset.
        receiver.level_db = level?.map(|db| db.clamp(0.0, 200.0));
    }
    Ok(ReceiverGrid {
        receivers,
        spacing_m: grid.spacing_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::osm::GeoLocation;
    use approx::assert_abs_diff_eq;

    fn pt(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn scene_with(buildings: Vec<crate::geometry::Polygon2>) -> Scene {
        Scene::new(buildings, GeoLocation::new(0.0, 0.0, "test").unwrap()).unwrap()
    }

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> crate::geometry::Polygon2 {
        crate::geometry::Polygon2::new(vec![pt(x0, y0), pt(x1, y0), pt(x1, y1), pt(x0, y1)])
            .unwrap()
    }

    fn baseline_config() -> TaskConfig {
        TaskConfig {
            variant: TaskVariant::Baseline,
            source: SourceSpec::new(95.0, 500.0).unwrap(),
            env: Environment::default(),
            enable_diffraction: false,
            max_reflection_order: 0,
            alpha_vert: 0.0,
            enable_atmosphere: false,
        }
    }

    #[test]
    fn spreading_examples() {
        assert_abs_diff_eq!(attenuation_div(1.0).unwrap(), 11.0, epsilon = 1e-12);
        assert_abs_diff_eq!(attenuation_div(100.0).unwrap(), 51.0, epsilon = 1e-12);
        let delta = attenuation_div(84.0).unwrap() - attenuation_div(42.0).unwrap();
        assert_abs_diff_eq!(delta, 20.0 * 2f64.log10(), epsilon = 1e-12);
        assert!(attenuation_div(0.0).is_err());
        assert!(attenuation_div(-3.0).is_err());
    }

    /// Independent transcription of the ISO 9613-1 closed form, arranged
    /// differently from the production code.
    fn air_absorption_oracle(f: f64, t_c: f64, rh: f64) -> f64 {
        let t = t_c + 273.15;
        let t0 = 293.15_f64;
        let psat_ratio = 10f64.powf(-6.8346 * (273.16_f64 / t).powf(1.261) + 4.6151);
        let h = rh * psat_ratio;
        let fro = 24.0 + 40_400.0 * h * (0.02 + h) / (0.391 + h);
        let frn = (t / t0).sqrt().recip()
            * (9.0 + 280.0 * h * f64::exp(-4.170 * ((t / t0).cbrt().recip() - 1.0)));
        let classical = 1.84e-11 * (t / t0).sqrt();
        let oxygen = 0.01275 * f64::exp(-2239.1 / t) * (fro / (fro * fro + f * f));
        let nitrogen = 0.1068 * f64::exp(-3352.0 / t) * (frn / (frn * frn + f * f));
        let relaxation = (t / t0).powi(-2) * (t / t0).sqrt().recip() * (oxygen + nitrogen);
        1000.0 * 8.686 * f * f * (classical + relaxation)
    }

    #[test]
    fn atmosphere_matches_independent_transcription() {
        for &t in &[-10.0, 0.0, 10.0, 20.0, 30.0] {
            for &rh in &[20.0, 50.0, 70.0, 90.0] {
                for &f in &[125.0, 250.0, 500.0, 1000.0, 2000.0] {
                    let env = Environment::new(t, rh).unwrap();
                    let got = air_absorption_db_per_km(f, &env);
                    let want = air_absorption_oracle(f, t, rh);
                    assert!(
                        (got - want).abs() < 1e-6,
                        "f={f} t={t} rh={rh}: {got} vs {want}"
                    );
                }
            }
        }
        // Ballpark sanity against published 500 Hz / 20 °C / 70 % RH values.
        let env = Environment::new(20.0, 70.0).unwrap();
        let alpha = air_absorption_db_per_km(500.0, &env);
        assert!((2.2..3.4).contains(&alpha), "alpha {alpha} dB/km");
        assert_abs_diff_eq!(
            attenuation_atm(1000.0, 500.0, &env),
            alpha,
            epsilon = 1e-12
        );
        assert_eq!(attenuation_atm(0.0, 500.0, &env), 0.0);
    }

    #[test]
    fn diffraction_attenuation_examples() {
        assert_abs_diff_eq!(
            attenuation_dif(0.0, 500.0).unwrap(),
            10.0 * 3f64.log10(),
            epsilon = 1e-12
        );
        // delta equal to one wavelength at 500 Hz.
        let lambda = SPEED_OF_SOUND_M_S / 500.0;
        assert_abs_diff_eq!(
            attenuation_dif(lambda, 500.0).unwrap(),
            10.0 * 43f64.log10(),
            epsilon = 1e-12
        );
        let mut prev = 0.0;
        for i in 0..200 {
            let a = attenuation_dif(i as f64 * 0.5, 500.0).unwrap();
            assert!(a >= prev);
            prev = a;
        }
        assert!(attenuation_dif(-0.1, 500.0).is_err());
    }

    #[test]
    fn reflection_adjustment_follows_recurrence() {
        assert_eq!(reflection_adjusted_source(95.0, 0, 0.1).unwrap(), 95.0);
        let step = 10.0 * 0.9_f64.log10();
        assert_abs_diff_eq!(
            reflection_adjusted_source(95.0, 1, 0.1).unwrap(),
            95.0 + step,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            reflection_adjusted_source(95.0, 2, 0.1).unwrap(),
            95.0 + 3.0 * step,
            epsilon = 1e-12
        );
        // The literal recurrence, step by step, agrees with the closed form.
        for order in 0..8u32 {
            let mut level = 80.0;
            for i in 1..=order {
                level += i as f64 * 10.0 * (1.0 - 0.25_f64).log10();
            }
            let closed = reflection_adjusted_source(80.0, order, 0.25).unwrap();
            assert_abs_diff_eq!(level, closed, epsilon = 1e-9);
        }
        // Zero absorption: unchanged at any order.
        for order in 0..6u32 {
            assert_eq!(reflection_adjusted_source(77.0, order, 0.0).unwrap(), 77.0);
        }
        assert!(reflection_adjusted_source(95.0, 1, 1.0).is_err());
        assert!(reflection_adjusted_source(95.0, 1, -0.1).is_err());
    }

    #[test]
    fn energetic_sum_examples() {
        let config = baseline_config();
        let path = |len: f64| PropagationPath {
            kind: PathKind::Direct,
            length_m: len,
            reflection_order: 0,
            detour_delta_m: 0.0,
            vertices: vec![],
        };
        // Two identical paths at 60 dB each -> 63.0103 dB. Choose the length
        // so that a single path sits at 60 dB: 95 - (20·log10(d) + 11) = 60.
        let d = 10f64.powf((95.0 - 11.0 - 60.0) / 20.0);
        let two = receiver_level(&[path(d), path(d)], &config).unwrap().unwrap();
        assert_abs_diff_eq!(two, 63.010_299_956_639_81, epsilon = 1e-9);

        // Single 100 m path, atmosphere off: 95 - 51 = 44 dB.
        let one = receiver_level(&[path(100.0)], &config).unwrap().unwrap();
        assert_abs_diff_eq!(one, 44.0, epsilon = 1e-12);

        assert!(receiver_level(&[], &config).unwrap().is_none());
    }

    #[test]
    fn energetic_sum_permutation_invariant_and_monotone() {
        let config = baseline_config();
        let mk = |len: f64, order: u32| PropagationPath {
            kind: if order == 0 {
                PathKind::Direct
            } else {
                PathKind::Reflected
            },
            length_m: len,
            reflection_order: order,
            detour_delta_m: 0.0,
            vertices: vec![],
        };
        let paths = vec![mk(31.0, 0), mk(57.0, 1), mk(113.0, 2), mk(241.0, 1)];
        let forward = receiver_level(&paths, &config).unwrap().unwrap();
        let mut shuffled = paths.clone();
        shuffled.reverse();
        shuffled.swap(0, 2);
        let back = receiver_level(&shuffled, &config).unwrap().unwrap();
        assert_eq!(forward.to_bits(), back.to_bits());

        // Supersets never decrease the level.
        let smaller = receiver_level(&paths[..2], &config).unwrap().unwrap();
        assert!(forward >= smaller);
    }

    #[test]
    fn free_field_single_direct_path() {
        let scene = scene_with(vec![]);
        let config = baseline_config();
        let paths = find_paths(&scene, pt(0.0, 0.0), pt(30.0, 40.0), &config).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].kind, PathKind::Direct);
        assert_abs_diff_eq!(paths[0].length_m, 50.0, epsilon = 1e-12);
    }

    #[test]
    fn blocked_receiver_without_mechanisms_gets_nothing() {
        let scene = scene_with(vec![rect(-10.0, 20.0, 10.0, 30.0)]);
        let config = baseline_config();
        let paths = find_paths(&scene, pt(0.0, 0.0), pt(0.0, 50.0), &config).unwrap();
        assert!(paths.is_empty());
    }

    #[test]
    fn receiver_inside_building_is_domain_error() {
        let scene = scene_with(vec![rect(-10.0, 20.0, 10.0, 30.0)]);
        let config = baseline_config();
        assert!(find_paths(&scene, pt(0.0, 0.0), pt(0.0, 25.0), &config).is_err());
    }

    #[test]
    fn single_wall_mirror_geometry() {
        // Thin slab whose south face y = 10 acts as the mirror.
        let scene = scene_with(vec![rect(-20.0, 10.0, 20.0, 11.0)]);
        let mut config = baseline_config();
        config.variant = TaskVariant::Reflection;
        config.max_reflection_order = 1;
        config.alpha_vert = 0.1;

        let source = pt(0.0, 0.0);
        let receiver = pt(10.0, 0.0);
        let paths = find_paths(&scene, source, receiver, &config).unwrap();
        let direct: Vec<_> = paths.iter().filter(|p| p.kind == PathKind::Direct).collect();
        let reflected: Vec<_> = paths
            .iter()
            .filter(|p| p.kind == PathKind::Reflected)
            .collect();
        assert_eq!(direct.len(), 1);
        assert_eq!(reflected.len(), 1, "paths: {paths:?}");

        // Image of the source across y = 10 sits at (0, 20).
        let expected_len = pt(0.0, 20.0).distance(receiver);
        assert_abs_diff_eq!(reflected[0].length_m, expected_len, epsilon = 1e-9);

        // The bounce point is on the wall and obeys specular symmetry: the
        // tangential component is preserved, so incoming and outgoing legs
        // make the same angle with the wall.
        let p = reflected[0].vertices[1];
        assert_abs_diff_eq!(p.y, 10.0, epsilon = 1e-9);
        let incoming = (p - source).normalized();
        let outgoing = (receiver - p).normalized();
        let wall_dir = pt(1.0, 0.0);
        let angle_in = incoming.dot(wall_dir).acos();
        let angle_out = outgoing.dot(wall_dir).acos();
        assert_abs_diff_eq!(angle_in, angle_out, epsilon = 1e-9);
    }

    #[test]
    fn diffraction_reaches_shadowed_receiver() {
        let scene = scene_with(vec![rect(-25.0, 25.0, 25.0, 35.0)]);
        let mut config = baseline_config();
        config.variant = TaskVariant::Diffraction;
        config.enable_diffraction = true;

        let receiver = pt(0.0, 60.0);
        let paths = find_paths(&scene, pt(0.0, 0.0), receiver, &config).unwrap();
        assert_eq!(paths.len(), 1);
        let path = &paths[0];
        assert_eq!(path.kind, PathKind::Diffracted);
        assert!(path.detour_delta_m > 0.0);
        assert!(path.length_m > receiver.norm());
        // Every leg of the detour is sight-valid.
        for leg in path.vertices.windows(2) {
            assert!(line_of_sight(&scene, leg[0], leg[1]));
        }
    }

    #[test]
    fn simulate_monotone_in_mechanisms() {
        use crate::grid::build_grid;
        let scene = scene_with(vec![rect(-25.0, 25.0, 25.0, 35.0)]);
        let grid = build_grid(&scene, 25.0).unwrap();

        let baseline = simulate(&scene, &grid, &baseline_config()).unwrap();

        let mut diff_cfg = baseline_config();
        diff_cfg.variant = TaskVariant::Diffraction;
        diff_cfg.enable_diffraction = true;
        let diffraction = simulate(&scene, &grid, &diff_cfg).unwrap();

        let mut refl_cfg = baseline_config();
        refl_cfg.variant = TaskVariant::Reflection;
        refl_cfg.max_reflection_order = 1;
        refl_cfg.alpha_vert = 0.1;
        let reflection = simulate(&scene, &grid, &refl_cfg).unwrap();

        for ((b, d), r) in baseline
            .receivers()
            .iter()
            .zip(diffraction.receivers())
            .zip(reflection.receivers())
        {
            match (b.level_db, d.level_db) {
                (Some(lb), Some(ld)) => assert_abs_diff_eq!(lb, ld, epsilon = 1e-9),
                (None, Some(_)) | (None, None) => {}
                (Some(_), None) => panic!("diffraction removed a level"),
            }
            if let (Some(lb), Some(lr)) = (b.level_db, r.level_db) {
                assert!(lr >= lb - 1e-12);
            }
        }
    }

    #[test]
    fn simulate_is_deterministic() {
        use crate::grid::build_grid;
        let scene = scene_with(vec![rect(-25.0, 25.0, 25.0, 35.0), rect(40.0, -60.0, 70.0, -30.0)]);
        let grid = build_grid(&scene, 20.0).unwrap();
        let mut config = baseline_config();
        config.variant = TaskVariant::Combined;
        config.enable_diffraction = true;
        config.max_reflection_order = 1;
        config.alpha_vert = 0.1;
        config.enable_atmosphere = true;

        let a = simulate(&scene, &grid, &config).unwrap();
        let b = simulate(&scene, &grid, &config).unwrap();
        for (ra, rb) in a.receivers().iter().zip(b.receivers()) {
            assert_eq!(
                ra.level_db.map(f64::to_bits),
                rb.level_db.map(f64::to_bits)
            );
        }
    }
}
