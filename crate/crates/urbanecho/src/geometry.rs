//! 2D computational-geometry kernel: points, segments, polygons, visibility
//! queries and shortest detours around building footprints.
//!
//! All predicates are pure and deterministic. Robustness is epsilon-based
//! (no exact arithmetic): orientation determinants compare against
//! [`ORIENT_EPS`], which is ample for scenes up to a few hundred meters with
//! metre-scale features.
//!
//! Conventions fixed here and relied on everywhere else:
//! * points exactly on a polygon edge count as *inside* the polygon,
//! * sight rays touching an edge (including grazing along it) are *blocked*,
//! * contacts exactly at a sight segment's own endpoints do not block it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::osm::Scene;
use crate::parallel;

/// Tolerance applied to orientation determinants and point/edge distances.
pub const ORIENT_EPS: f64 = 1e-9;

/// Outward offset applied to polygon corners when they are used as receiver
/// or detour positions, so the boundary-inclusive containment rule does not
/// swallow them.
pub const CORNER_OFFSET_M: f64 = 0.01;

/// A position in the local scene frame, meters east (`x`) and north (`y`)
/// of the scene center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Self) -> f64 {
        (other - self).norm()
    }

    pub fn distance_sq(self, other: Self) -> f64 {
        let d = other - self;
        d.dot(d)
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Twice the signed area of triangle `(a, b, c)`; positive for a left turn.
#[inline]
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// A straight segment between two distinct points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2 {
    pub a: Point2,
    pub b: Point2,
}

impl Segment2 {
    pub fn new(a: Point2, b: Point2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    /// Closest point on the closed segment to `p`.
    pub fn closest_point(&self, p: Point2) -> Point2 {
        let d = self.b - self.a;
        let len_sq = d.dot(d);
        if len_sq <= 0.0 {
            return self.a;
        }
        let t = ((p - self.a).dot(d) / len_sq).clamp(0.0, 1.0);
        self.a + d * t
    }

    pub fn distance_to_point(&self, p: Point2) -> f64 {
        self.closest_point(p).distance(p)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy)]
pub struct Aabb {
    pub min: Point2,
    pub max: Point2,
}

impl Aabb {
    pub fn of_points(points: &[Point2]) -> Self {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Self { min, max }
    }

    pub fn of_segment(s: &Segment2) -> Self {
        Self::of_points(&[s.a, s.b])
    }

    pub fn intersects(&self, other: &Aabb, eps: f64) -> bool {
        self.min.x <= other.max.x + eps
            && other.min.x <= self.max.x + eps
            && self.min.y <= other.max.y + eps
            && other.min.y <= self.max.y + eps
    }

    pub fn contains(&self, p: Point2, eps: f64) -> bool {
        p.x >= self.min.x - eps
            && p.x <= self.max.x + eps
            && p.y >= self.min.y - eps
            && p.y <= self.max.y + eps
    }
}

/// A simple polygon given by its exterior ring. Construction normalizes the
/// winding to counterclockwise and rejects degenerate rings; callers are
/// responsible for not feeding self-intersecting rings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2 {
    vertices: Vec<Point2>,
    #[serde(skip, default = "empty_bbox")]
    bbox: (Point2, Point2),
}

fn empty_bbox() -> (Point2, Point2) {
    (Point2::new(0.0, 0.0), Point2::new(0.0, 0.0))
}

impl Polygon2 {
    /// Builds a polygon from an open ring (first vertex not repeated at the
    /// end; a repeated closing vertex is tolerated and dropped).
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() >= 2 {
            let first = vertices[0];
            if let Some(last) = vertices.last().copied() {
                if first.distance_sq(last) <= ORIENT_EPS * ORIENT_EPS {
                    vertices.pop();
                }
            }
        }
        vertices.dedup_by(|a, b| a.distance_sq(*b) <= ORIENT_EPS * ORIENT_EPS);
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "ring has {} distinct vertices, need at least 3",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        let area2 = signed_area_2(&vertices);
        if area2.abs() <= ORIENT_EPS {
            return Err(Error::InvalidPolygon("zero area ring".into()));
        }
        if area2 < 0.0 {
            vertices.reverse();
        }
        let bbox = Aabb::of_points(&vertices);
        Ok(Self {
            vertices,
            bbox: (bbox.min, bbox.max),
        })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn bbox(&self) -> Aabb {
        Aabb {
            min: self.bbox.0,
            max: self.bbox.1,
        }
    }

    pub fn area(&self) -> f64 {
        0.5 * signed_area_2(&self.vertices).abs()
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment2> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment2::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Recomputes the cached bounding box (needed after deserialization).
    pub fn rebuild_cache(&mut self) {
        let bbox = Aabb::of_points(&self.vertices);
        self.bbox = (bbox.min, bbox.max);
    }

    pub fn on_boundary(&self, p: Point2) -> bool {
        if !self.bbox().contains(p, ORIENT_EPS) {
            return false;
        }
        self.edges().any(|e| e.distance_to_point(p) <= ORIENT_EPS)
    }

    /// Boundary-inclusive containment.
    pub fn contains(&self, p: Point2) -> bool {
        if !self.bbox().contains(p, ORIENT_EPS) {
            return false;
        }
        self.on_boundary(p) || self.crossing_test(p)
    }

    /// Strict interior containment (boundary excluded).
    pub fn contains_strict(&self, p: Point2) -> bool {
        if !self.bbox().contains(p, ORIENT_EPS) {
            return false;
        }
        !self.on_boundary(p) && self.crossing_test(p)
    }

    fn crossing_test(&self, p: Point2) -> bool {
        let v = &self.vertices;
        let mut inside = false;
        let mut j = v.len() - 1;
        for i in 0..v.len() {
            let (pi, pj) = (v[i], v[j]);
            if (pi.y > p.y) != (pj.y > p.y) {
                let x_cross = pi.x + (p.y - pi.y) * (pj.x - pi.x) / (pj.y - pi.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}

fn signed_area_2(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += vertices[i].cross(vertices[(i + 1) % n]);
    }
    acc
}

/// Boundary-inclusive point-in-polygon test.
pub fn point_in_polygon(p: Point2, poly: &Polygon2) -> bool {
    poly.contains(p)
}

/// Is `p` (already known to lie on the segment's carrier line) within the
/// segment's span?
fn on_segment_span(seg: &Segment2, p: Point2) -> bool {
    Aabb::of_segment(seg).contains(p, ORIENT_EPS)
}

/// Closed-segment intersection, including collinear overlap and endpoint
/// touching.
pub fn segments_intersect(s1: &Segment2, s2: &Segment2) -> bool {
    let d1 = orient(s2.a, s2.b, s1.a);
    let d2 = orient(s2.a, s2.b, s1.b);
    let d3 = orient(s1.a, s1.b, s2.a);
    let d4 = orient(s1.a, s1.b, s2.b);

    if ((d1 > ORIENT_EPS && d2 < -ORIENT_EPS) || (d1 < -ORIENT_EPS && d2 > ORIENT_EPS))
        && ((d3 > ORIENT_EPS && d4 < -ORIENT_EPS) || (d3 < -ORIENT_EPS && d4 > ORIENT_EPS))
    {
        return true;
    }
    (d1.abs() <= ORIENT_EPS && on_segment_span(s2, s1.a))
        || (d2.abs() <= ORIENT_EPS && on_segment_span(s2, s1.b))
        || (d3.abs() <= ORIENT_EPS && on_segment_span(s1, s2.a))
        || (d4.abs() <= ORIENT_EPS && on_segment_span(s1, s2.b))
}

/// Does edge `e` block the open sight segment `(a, b)`? Contacts confined to
/// `a` or `b` themselves do not block; anything else (crossing, touching the
/// segment interior, grazing along the edge) does.
fn sight_blocked_by_edge(a: Point2, b: Point2, e: &Segment2) -> bool {
    let d1 = orient(e.a, e.b, a);
    let d2 = orient(e.a, e.b, b);
    let a_on_line = d1.abs() <= ORIENT_EPS;
    let b_on_line = d2.abs() <= ORIENT_EPS;

    if a_on_line && b_on_line {
        return collinear_overlap_blocks(a, b, e);
    }

    let sight = Segment2::new(a, b);
    if !segments_intersect(&sight, e) {
        return false;
    }
    // Non-collinear segments meet in one point; it is harmless only when it
    // coincides with a sight endpoint.
    let a_on_e = a_on_line && on_segment_span(e, a);
    let b_on_e = b_on_line && on_segment_span(e, b);
    !(a_on_e || b_on_e)
}

fn collinear_overlap_blocks(a: Point2, b: Point2, e: &Segment2) -> bool {
    let dir = b - a;
    let len_sq = dir.dot(dir);
    if len_sq <= 0.0 {
        return false;
    }
    let t1 = (e.a - a).dot(dir) / len_sq;
    let t2 = (e.b - a).dot(dir) / len_sq;
    let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    let lo = lo.max(0.0);
    let hi = hi.min(1.0);
    if hi < lo {
        return false;
    }
    let len = len_sq.sqrt();
    if (hi - lo) * len > ORIENT_EPS {
        return true; // grazing along the edge
    }
    // Single-point contact: allowed only at the sight endpoints.
    let t = 0.5 * (lo + hi);
    !(t * len <= ORIENT_EPS || (1.0 - t) * len <= ORIENT_EPS)
}

/// True iff the open segment `(a, b)` meets no building interior or boundary.
/// Grazing along an edge counts as blocked; a zero-length segment always has
/// sight of itself.
pub fn line_of_sight(scene: &Scene, a: Point2, b: Point2) -> bool {
    if a.distance_sq(b) <= ORIENT_EPS * ORIENT_EPS {
        return true;
    }
    let seg_box = Aabb::of_segment(&Segment2::new(a, b));
    let mid = a.midpoint(b);
    for poly in scene.buildings() {
        if !poly.bbox().intersects(&seg_box, ORIENT_EPS) {
            continue;
        }
        for e in poly.edges() {
            if sight_blocked_by_edge(a, b, &e) {
                return false;
            }
        }
        // No edge contact: the segment is either fully outside or fully
        // inside this polygon, so its midpoint decides.
        if poly.contains_strict(mid) {
            return false;
        }
    }
    true
}

/// Offset position for a polygon corner: the vertex pushed [`CORNER_OFFSET_M`]
/// outward along the exterior angle bisector.
pub fn offset_corner(prev: Point2, v: Point2, next: Point2) -> Point2 {
    let incoming = (v - prev).normalized();
    let outgoing = (next - v).normalized();
    let turn = incoming.cross(outgoing);
    let mut dir = incoming - outgoing;
    if dir.norm() <= 1e-12 {
        // Straight-through vertex: outward is the right-hand normal (the
        // interior lies left of CCW edges).
        dir = Point2::new(incoming.y, -incoming.x);
    } else {
        dir = dir.normalized();
        if turn < 0.0 {
            dir = -dir;
        }
    }
    v + dir * CORNER_OFFSET_M
}

/// All offset corners of a polygon, in ring order.
pub fn offset_corners(poly: &Polygon2) -> Vec<Point2> {
    let v = poly.vertices();
    let n = v.len();
    (0..n)
        .map(|i| offset_corner(v[(i + n - 1) % n], v[i], v[(i + 1) % n]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the smallest distance.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_NODE: u32 = u32::MAX;

/// Visibility graph over offset building corners, reusable across many
/// detour queries on the same scene.
#[derive(Debug, Clone)]
pub struct VisibilityGraph {
    nodes: Vec<Point2>,
    adj: Vec<Vec<(u32, f64)>>,
}

impl VisibilityGraph {
    pub fn build(scene: &Scene) -> Self {
        let nodes: Vec<Point2> = scene.buildings().iter().flat_map(offset_corners).collect();
        let n = nodes.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if line_of_sight(scene, nodes[i], nodes[j]) {
                    let d = nodes[i].distance(nodes[j]);
                    adj[i].push((j as u32, d));
                    adj[j].push((i as u32, d));
                }
            }
        }
        Self { nodes, adj }
    }

    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    /// Indices and distances of graph nodes directly visible from `p`.
    fn visible_from(&self, scene: &Scene, p: Point2) -> Vec<(u32, f64)> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, &c)| line_of_sight(scene, p, c))
            .map(|(i, &c)| (i as u32, p.distance(c)))
            .collect()
    }

    /// Dijkstra over the corner graph seeded from `start`.
    pub fn from_point(&self, scene: &Scene, start: Point2) -> DetourField {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![NO_NODE; n];
        let mut heap = BinaryHeap::new();
        for (i, d) in self.visible_from(scene, start) {
            if d < dist[i as usize] {
                dist[i as usize] = d;
                heap.push(HeapEntry { dist: d, node: i });
            }
        }
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            if d > dist[node as usize] {
                continue;
            }
            for &(next, w) in &self.adj[node as usize] {
                let nd = d + w;
                if nd < dist[next as usize] {
                    dist[next as usize] = nd;
                    prev[next as usize] = node;
                    heap.push(HeapEntry {
                        dist: nd,
                        node: next,
                    });
                }
            }
        }
        DetourField { start, dist, prev }
    }

    /// Shortest polyline from `a` to `b` around the buildings, if any.
    pub fn shortest_detour(
        &self,
        scene: &Scene,
        a: Point2,
        b: Point2,
    ) -> Option<(Vec<Point2>, f64)> {
        if line_of_sight(scene, a, b) {
            return Some((vec![a, b], a.distance(b)));
        }
        self.from_point(scene, a).detour_to(self, scene, b)
    }
}

/// Result of a one-to-all Dijkstra from a fixed start point; answers detour
/// queries to arbitrary targets without re-running the graph search.
#[derive(Debug, Clone)]
pub struct DetourField {
    start: Point2,
    dist: Vec<f64>,
    prev: Vec<u32>,
}

impl DetourField {
    /// Shortest detour from the field's start to `target`, or `None` when no
    /// corner chain connects them. The direct segment is returned when it is
    /// unobstructed.
    pub fn detour_to(
        &self,
        graph: &VisibilityGraph,
        scene: &Scene,
        target: Point2,
    ) -> Option<(Vec<Point2>, f64)> {
        if line_of_sight(scene, self.start, target) {
            return Some((vec![self.start, target], self.start.distance(target)));
        }
        let mut best: Option<(u32, f64)> = None;
        for (i, d) in graph.visible_from(scene, target) {
            let total = self.dist[i as usize] + d;
            if total.is_finite() && best.map_or(true, |(_, bd)| total < bd) {
                best = Some((i, total));
            }
        }
        let (mut node, total) = best?;
        let mut chain = vec![target];
        loop {
            chain.push(graph.nodes[node as usize]);
            if self.prev[node as usize] == NO_NODE {
                break;
            }
            node = self.prev[node as usize];
        }
        chain.push(self.start);
        chain.reverse();
        Some((chain, total))
    }
}

/// Shortest polyline from `a` to `b` whose interior legs all have line of
/// sight, with intermediate vertices drawn from offset building corners.
///
/// Builds a fresh visibility graph; batch callers should reuse
/// [`VisibilityGraph`] + [`DetourField`] directly.
pub fn shortest_detour(scene: &Scene, a: Point2, b: Point2) -> Option<(Vec<Point2>, f64)> {
    VisibilityGraph::build(scene).shortest_detour(scene, a, b)
}

/// Pixel lattice covering the scene extent; row 0 is the north edge, column 0
/// the west edge, and values are sampled at pixel centers.
#[derive(Debug, Clone, Copy)]
pub struct PixelGrid {
    pub resolution: u32,
    pub extent_m: f64,
}

impl PixelGrid {
    pub fn new(resolution: u32, extent_m: f64) -> Self {
        Self {
            resolution,
            extent_m,
        }
    }

    pub fn pitch_m(&self) -> f64 {
        self.extent_m / self.resolution as f64
    }

    pub fn len(&self) -> usize {
        (self.resolution as usize) * (self.resolution as usize)
    }

    pub fn is_empty(&self) -> bool {
        self.resolution == 0
    }

    pub fn index(&self, row: u32, col: u32) -> usize {
        row as usize * self.resolution as usize + col as usize
    }

    pub fn center(&self, row: u32, col: u32) -> Point2 {
        let pitch = self.pitch_m();
        let half = 0.5 * self.extent_m;
        Point2::new(
            -half + (col as f64 + 0.5) * pitch,
            half - (row as f64 + 0.5) * pitch,
        )
    }
}

/// Per-pixel visibility classification relative to a source point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellVisibility {
    Los,
    NLos,
    Building,
}

/// Classifies every pixel center as line-of-sight, shadowed, or inside a
/// building.
pub fn visibility_mask(
    scene: &Scene,
    source: Point2,
    resolution: u32,
) -> Result<Vec<CellVisibility>> {
    if scene.buildings().iter().any(|b| b.contains(source)) {
        return Err(Error::Validation(
            "visibility source lies inside a building".into(),
        ));
    }
    let grid = PixelGrid::new(resolution, scene.extent_m);
    let rows = parallel::map_range(resolution as usize, |row| {
        let row = row as u32;
        (0..resolution)
            .map(|col| {
                let c = grid.center(row, col);
                if scene.buildings().iter().any(|b| b.contains(c)) {
                    CellVisibility::Building
                } else if line_of_sight(scene, source, c) {
                    CellVisibility::Los
                } else {
                    CellVisibility::NLos
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(rows.into_iter().flatten().collect())
}
