//! Simulated environments and dataset construction.
//!
//! An [`Environment`] is a set of geometric obstacles inside an axis-aligned
//! workspace. It provides exact signed distances (the ground truth for
//! simulation and for the distance-cost baseline) and drives two dataset
//! builders: boundary/free synthesis for random worlds and ray-cast labeling
//! of laser logs.

pub mod carmen;
pub mod dataset;

use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use dataset::{LabeledPointCloud, LabeledSample, Provenance};

/// Axis-aligned workspace rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vector2<f64>,
    pub max: Vector2<f64>,
}

impl Bounds {
    pub fn new(min: Vector2<f64>, max: Vector2<f64>) -> Result<Self> {
        if !(min.x < max.x && min.y < max.y) {
            return Err(Error::invalid(format!(
                "bounds min ({}, {}) must be strictly below max ({}, {})",
                min.x, min.y, max.x, max.y
            )));
        }
        Ok(Bounds { min, max })
    }

    pub fn contains(&self, p: Vector2<f64>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vector2<f64> {
        Vector2::new(
            self.min.x + rng.random::<f64>() * self.width(),
            self.min.y + rng.random::<f64>() * self.height(),
        )
    }
}

/// A single obstacle shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Obstacle {
    Circle { center: Vector2<f64>, radius: f64 },
    /// Axis-aligned rectangle given by its minimum corner and edge lengths.
    Rect { corner: Vector2<f64>, extents: Vector2<f64> },
    Polygon { vertices: Vec<Vector2<f64>> },
}

impl Obstacle {
    /// Signed distance to the obstacle boundary: negative inside, zero on
    /// the boundary, positive outside. Exact for circles and rectangles;
    /// polygons combine exact edge distances with an even-odd interior test.
    pub fn signed_distance(&self, p: Vector2<f64>) -> f64 {
        match self {
            Obstacle::Circle { center, radius } => (p - center).norm() - radius,
            Obstacle::Rect { corner, extents } => {
                let half = extents / 2.0;
                let center = corner + half;
                let q = Vector2::new((p.x - center.x).abs() - half.x, (p.y - center.y).abs() - half.y);
                let outside = Vector2::new(q.x.max(0.0), q.y.max(0.0)).norm();
                let inside = q.x.max(q.y).min(0.0);
                outside + inside
            }
            Obstacle::Polygon { vertices } => {
                let mut dist = f64::INFINITY;
                for (a, b) in polygon_edges(vertices) {
                    dist = dist.min(segment_distance(p, a, b));
                }
                if point_in_polygon(p, vertices) {
                    -dist
                } else {
                    dist
                }
            }
        }
    }

    pub fn contains(&self, p: Vector2<f64>) -> bool {
        self.signed_distance(p) < 0.0
    }

    pub fn boundary_length(&self) -> f64 {
        match self {
            Obstacle::Circle { radius, .. } => TAU * radius,
            Obstacle::Rect { extents, .. } => 2.0 * (extents.x + extents.y),
            Obstacle::Polygon { vertices } => {
                polygon_edges(vertices).map(|(a, b)| (b - a).norm()).sum()
            }
        }
    }

    /// Uniform point on the boundary, parameterised by arc length.
    pub fn boundary_point(&self, fraction: f64) -> Vector2<f64> {
        let fraction = fraction.rem_euclid(1.0);
        match self {
            Obstacle::Circle { center, radius } => {
                let theta = fraction * TAU;
                center + Vector2::new(theta.cos(), theta.sin()) * *radius
            }
            Obstacle::Rect { corner, extents } => {
                let c = *corner;
                let e = *extents;
                let corners = [
                    c,
                    c + Vector2::new(e.x, 0.0),
                    c + e,
                    c + Vector2::new(0.0, e.y),
                ];
                walk_perimeter(&corners, fraction)
            }
            Obstacle::Polygon { vertices } => walk_perimeter(vertices, fraction),
        }
    }

    fn fits_in(&self, bounds: &Bounds) -> bool {
        match self {
            Obstacle::Circle { center, radius } => {
                center.x - radius >= bounds.min.x
                    && center.x + radius <= bounds.max.x
                    && center.y - radius >= bounds.min.y
                    && center.y + radius <= bounds.max.y
            }
            Obstacle::Rect { corner, extents } => {
                bounds.contains(*corner) && bounds.contains(corner + extents)
            }
            Obstacle::Polygon { vertices } => vertices.iter().all(|v| bounds.contains(*v)),
        }
    }
}

fn polygon_edges(vertices: &[Vector2<f64>]) -> impl Iterator<Item = (Vector2<f64>, Vector2<f64>)> + '_ {
    (0..vertices.len()).map(move |i| (vertices[i], vertices[(i + 1) % vertices.len()]))
}

fn segment_distance(p: Vector2<f64>, a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_squared();
    if len_sq == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len_sq).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn point_in_polygon(p: Vector2<f64>, vertices: &[Vector2<f64>]) -> bool {
    let mut inside = false;
    for (a, b) in polygon_edges(vertices) {
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Walks a closed polyline to the point at `fraction` of its perimeter.
fn walk_perimeter(vertices: &[Vector2<f64>], fraction: f64) -> Vector2<f64> {
    let total: f64 = polygon_edges(vertices).map(|(a, b)| (b - a).norm()).sum();
    let mut remaining = fraction * total;
    for (a, b) in polygon_edges(vertices) {
        let len = (b - a).norm();
        if remaining <= len || len == 0.0 {
            let t = if len == 0.0 { 0.0 } else { remaining / len };
            return a + (b - a) * t;
        }
        remaining -= len;
    }
    vertices[0]
}

/// Proper segment intersection test for the polygon-simplicity check.
fn segments_cross(a: Vector2<f64>, b: Vector2<f64>, c: Vector2<f64>, d: Vector2<f64>) -> bool {
    let orient = |p: Vector2<f64>, q: Vector2<f64>, r: Vector2<f64>| {
        (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
    };
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Set of geometric obstacles inside a bounded workspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub bounds: Bounds,
    pub obstacles: Vec<Obstacle>,
}

impl Environment {
    pub fn new(bounds: Bounds, obstacles: Vec<Obstacle>) -> Result<Self> {
        for (i, obstacle) in obstacles.iter().enumerate() {
            if !obstacle.fits_in(&bounds) {
                return Err(Error::invalid(format!("obstacle {i} extends outside the bounds")));
            }
            if let Obstacle::Polygon { vertices } = obstacle {
                if vertices.len() < 3 {
                    return Err(Error::invalid(format!("polygon {i} has fewer than 3 vertices")));
                }
                let n = vertices.len();
                for e1 in 0..n {
                    for e2 in e1 + 2..n {
                        if e1 == 0 && e2 == n - 1 {
                            continue; // shares the wrap-around vertex
                        }
                        let (a, b) = (vertices[e1], vertices[(e1 + 1) % n]);
                        let (c, d) = (vertices[e2], vertices[(e2 + 1) % n]);
                        if segments_cross(a, b, c, d) {
                            return Err(Error::invalid(format!("polygon {i} self-intersects")));
                        }
                    }
                }
            }
        }
        Ok(Environment { bounds, obstacles })
    }

    /// Signed distance to the nearest obstacle boundary. Positive outside
    /// every obstacle, negative inside one; `+inf` when there are none.
    pub fn signed_distance(&self, p: Vector2<f64>) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.signed_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_free(&self, p: Vector2<f64>) -> bool {
        self.signed_distance(p) > 0.0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Environment = serde_json::from_str(text)?;
        Environment::new(raw.bounds, raw.obstacles)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Parameters for random world generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldGenConfig {
    pub seed: u64,
    pub n_obstacles: usize,
    pub bounds: Bounds,
    /// Circle radii and rectangle half-extents are drawn from this range.
    pub size_range: (f64, f64),
    pub start: Vector2<f64>,
    pub goal: Vector2<f64>,
    /// Radius of the discs around start and goal kept free of obstacles.
    pub clearance: f64,
}

const MAX_PLACEMENT_REJECTIONS: usize = 10_000;

/// Samples a random environment, rejecting obstacles that leave the bounds
/// or intrude on the start/goal clearance discs.
pub fn generate_random_world(config: &WorldGenConfig) -> Result<Environment> {
    let (lo, hi) = config.size_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::invalid(format!("bad obstacle size range ({lo}, {hi})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut obstacles = Vec::with_capacity(config.n_obstacles);
    let mut rejections = 0usize;
    while obstacles.len() < config.n_obstacles {
        let size = lo + rng.random::<f64>() * (hi - lo);
        let candidate = if rng.random::<f64>() < 0.5 {
            Obstacle::Circle { center: config.bounds.sample(&mut rng), radius: size }
        } else {
            let other = lo + rng.random::<f64>() * (hi - lo);
            Obstacle::Rect {
                corner: config.bounds.sample(&mut rng),
                extents: Vector2::new(2.0 * size, 2.0 * other),
            }
        };
        let clear = candidate.signed_distance(config.start) >= config.clearance
            && candidate.signed_distance(config.goal) >= config.clearance;
        if candidate.fits_in(&config.bounds) && clear {
            obstacles.push(candidate);
        } else {
            rejections += 1;
            if rejections > MAX_PLACEMENT_REJECTIONS {
                return Err(Error::PlacementFailure(format!(
                    "could not place obstacle {} after {rejections} rejections",
                    obstacles.len()
                )));
            }
        }
    }
    Environment::new(config.bounds, obstacles)
}

/// Builds a labeled dataset from an environment: occupied samples uniformly
/// on obstacle boundaries, free samples uniformly over free space, and no
/// samples strictly inside any obstacle.
///
/// `boundary_density` is samples per meter of boundary; `free_density` is
/// samples per square meter of workspace.
pub fn synthesize_observations(
    env: &Environment,
    boundary_density: f64,
    free_density: f64,
    seed: u64,
) -> Result<LabeledPointCloud> {
    if !(boundary_density > 0.0 && free_density > 0.0) {
        return Err(Error::invalid("sample densities must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();

    for obstacle in &env.obstacles {
        let count = (obstacle.boundary_length() * boundary_density).ceil() as usize;
        for _ in 0..count {
            let p = obstacle.boundary_point(rng.random::<f64>());
            samples.push(LabeledSample::new(vec![p.x, p.y], 1)?);
        }
    }

    let free_target = (env.bounds.area() * free_density).round() as usize;
    let mut attempts = 0usize;
    let attempt_cap = free_target.saturating_mul(1000).max(1000);
    let mut placed = 0usize;
    while placed < free_target && attempts < attempt_cap {
        attempts += 1;
        let p = env.bounds.sample(&mut rng);
        if env.signed_distance(p) > 0.0 {
            samples.push(LabeledSample::new(vec![p.x, p.y], -1)?);
            placed += 1;
        }
    }

    Ok(LabeledPointCloud::new(samples, Provenance::Synthetic, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_circle() -> Obstacle {
        Obstacle::Circle { center: Vector2::new(0.0, 0.0), radius: 1.0 }
    }

    #[test]
    fn circle_signed_distance() {
        let c = unit_circle();
        assert_eq!(c.signed_distance(Vector2::new(2.0, 0.0)), 1.0);
        assert_eq!(c.signed_distance(Vector2::new(0.0, 0.0)), -1.0);
        assert!(c.signed_distance(Vector2::new(1.0, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn rect_signed_distance() {
        let r = Obstacle::Rect {
            corner: Vector2::new(0.0, 0.0),
            extents: Vector2::new(2.0, 1.0),
        };
        assert!((r.signed_distance(Vector2::new(3.0, 0.5)) - 1.0).abs() < 1e-12);
        assert!((r.signed_distance(Vector2::new(1.0, 0.5)) + 0.5).abs() < 1e-12);
        assert!(r.signed_distance(Vector2::new(0.0, 0.5)).abs() < 1e-12);
        // corner region distance is diagonal
        let d = r.signed_distance(Vector2::new(3.0, 2.0));
        assert!((d - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn polygon_signed_distance_matches_brute_force() {
        let poly = Obstacle::Polygon {
            vertices: vec![
                Vector2::new(0.0, 0.0),
                Vector2::new(2.0, 0.0),
                Vector2::new(2.0, 2.0),
                Vector2::new(0.0, 2.0),
            ],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let p = Vector2::new(rng.random::<f64>() * 6.0 - 2.0, rng.random::<f64>() * 6.0 - 2.0);
            let exact = poly.signed_distance(p);
            // brute force: min distance over densely sampled boundary points
            let mut brute = f64::INFINITY;
            for i in 0..4000 {
                let q = poly.boundary_point(i as f64 / 4000.0);
                brute = brute.min((p - q).norm());
            }
            assert!(
                (exact.abs() - brute).abs() < 1e-3,
                "polygon distance {exact} vs brute {brute} at {p:?}"
            );
        }
    }

    #[test]
    fn environment_rejects_out_of_bounds_obstacle() {
        let bounds = Bounds::new(Vector2::new(-1.0, -1.0), Vector2::new(1.0, 1.0)).unwrap();
        let result = Environment::new(bounds, vec![unit_circle()]);
        assert!(result.is_err());
    }

    #[test]
    fn environment_rejects_self_intersecting_polygon() {
        let bounds = Bounds::new(Vector2::new(-5.0, -5.0), Vector2::new(5.0, 5.0)).unwrap();
        let bowtie = Obstacle::Polygon {
            vertices: vec![
                Vector2::new(0.0, 0.0),
                Vector2::new(2.0, 2.0),
                Vector2::new(2.0, 0.0),
                Vector2::new(0.0, 2.0),
            ],
        };
        assert!(Environment::new(bounds, vec![bowtie]).is_err());
    }

    #[test]
    fn world_generation_is_deterministic_and_respects_clearance() {
        let config = WorldGenConfig {
            seed: 7,
            n_obstacles: 8,
            bounds: Bounds::new(Vector2::new(-5.0, -5.0), Vector2::new(5.0, 5.0)).unwrap(),
            size_range: (0.4, 1.0),
            start: Vector2::new(-4.0, -4.0),
            goal: Vector2::new(4.0, 4.0),
            clearance: 0.8,
        };
        let a = generate_random_world(&config).unwrap();
        let b = generate_random_world(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.obstacles.len(), 8);
        for o in &a.obstacles {
            assert!(o.fits_in(&a.bounds));
            assert!(o.signed_distance(config.start) >= config.clearance);
            assert!(o.signed_distance(config.goal) >= config.clearance);
        }
    }

    #[test]
    fn zero_obstacles_gives_empty_world() {
        let config = WorldGenConfig {
            seed: 1,
            n_obstacles: 0,
            bounds: Bounds::new(Vector2::new(0.0, 0.0), Vector2::new(1.0, 1.0)).unwrap(),
            size_range: (0.1, 0.2),
            start: Vector2::new(0.1, 0.1),
            goal: Vector2::new(0.9, 0.9),
            clearance: 0.05,
        };
        assert!(generate_random_world(&config).unwrap().obstacles.is_empty());
    }

    #[test]
    fn synthesis_labels_lie_where_they_should() {
        let bounds = Bounds::new(Vector2::new(-3.0, -3.0), Vector2::new(3.0, 3.0)).unwrap();
        let env = Environment::new(bounds, vec![unit_circle()]).unwrap();
        let cloud = synthesize_observations(&env, 20.0, 5.0, 3).unwrap();
        assert!(cloud.has_both_labels());
        for s in cloud.samples() {
            let p = Vector2::new(s.position[0], s.position[1]);
            let d = env.signed_distance(p);
            if s.label > 0 {
                assert!(d.abs() < 1e-9, "occupied sample off the boundary: d = {d}");
            } else {
                assert!(d > 0.0, "free sample not strictly outside: d = {d}");
            }
        }
    }

    #[test]
    fn synthesis_of_empty_world_is_free_only() {
        let bounds = Bounds::new(Vector2::new(0.0, 0.0), Vector2::new(2.0, 2.0)).unwrap();
        let env = Environment::new(bounds, Vec::new()).unwrap();
        let cloud = synthesize_observations(&env, 10.0, 10.0, 0).unwrap();
        assert!(cloud.occupied_count() == 0);
        assert!(cloud.free_count() > 0);
    }

    #[test]
    fn environment_json_round_trip() {
        let bounds = Bounds::new(Vector2::new(-5.0, -5.0), Vector2::new(5.0, 5.0)).unwrap();
        let env = Environment::new(
            bounds,
            vec![
                unit_circle(),
                Obstacle::Rect { corner: Vector2::new(1.0, 1.0), extents: Vector2::new(1.5, 0.5) },
                Obstacle::Polygon {
                    vertices: vec![
                        Vector2::new(-3.0, -3.0),
                        Vector2::new(-2.0, -3.0),
                        Vector2::new(-2.5, -1.5),
                    ],
                },
            ],
        )
        .unwrap();
        let restored = Environment::from_json(&env.to_json().unwrap()).unwrap();
        assert_eq!(env, restored);
    }
}
