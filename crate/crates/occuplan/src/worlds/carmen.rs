//! CARMEN laser-log ingestion.
//!
//! Reads the plain-text robot log format whose `FLASER` records carry laser
//! ranges plus the sensing pose:
//!
//! ```text
//! FLASER n r_1 ... r_n x y theta odom_x odom_y odom_theta ts host log_ts
//! ```
//!
//! Everything else (odometry, parameters, comments) is skipped. Odometry
//! fields of `FLASER` records are parsed for arity but unused; poses are
//! taken as given, with no SLAM correction.

use std::f64::consts::PI;
use std::io::BufRead;

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::worlds::dataset::{LabeledPointCloud, LabeledSample, Provenance};

/// Hard sensor limit assumed for logs that do not declare one (SICK LMS).
const DEFAULT_MAX_RANGE: f64 = 81.9;

/// One planar laser scan in the world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserScan {
    /// Sensor pose `(x, y, heading)`.
    pub pose: [f64; 3],
    /// Beam distances in meters, each in `(0, max_range]`.
    pub ranges: Vec<f64>,
    /// First beam angle relative to the heading.
    pub angle_min: f64,
    pub angle_increment: f64,
    pub max_range: f64,
}

impl LaserScan {
    /// World-frame direction angle of beam `i`.
    pub fn beam_angle(&self, i: usize) -> f64 {
        self.pose[2] + self.angle_min + self.angle_increment * i as f64
    }

    /// World-frame endpoint of beam `i`.
    pub fn beam_endpoint(&self, i: usize) -> Vector2<f64> {
        let a = self.beam_angle(i);
        Vector2::new(
            self.pose[0] + self.ranges[i] * a.cos(),
            self.pose[1] + self.ranges[i] * a.sin(),
        )
    }
}

/// Parse outcome: the extracted scans plus an exact count of malformed
/// `FLASER` lines that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct CarmenLog {
    pub scans: Vec<LaserScan>,
    pub skipped_malformed: usize,
}

/// FLASER records carry no beam geometry, so the conventional 180° field of
/// view centered on the heading is assumed: `n` beams from `-π/2` to `+π/2`.
fn beam_geometry(n: usize) -> (f64, f64) {
    if n < 2 {
        (0.0, 0.0)
    } else {
        (-PI / 2.0, PI / (n - 1) as f64)
    }
}

fn parse_flaser(tokens: &[&str]) -> Option<LaserScan> {
    let n: usize = tokens.get(1)?.parse().ok()?;
    // FLASER + n + ranges + (x y theta odom_x odom_y odom_theta ts host log_ts)
    if tokens.len() != 2 + n + 9 {
        return None;
    }
    let mut ranges = Vec::with_capacity(n);
    for token in &tokens[2..2 + n] {
        let r: f64 = token.parse().ok()?;
        if !r.is_finite() || r <= 0.0 {
            return None;
        }
        ranges.push(r.min(DEFAULT_MAX_RANGE));
    }
    let mut pose = [0.0; 3];
    for (slot, token) in pose.iter_mut().zip(&tokens[2 + n..2 + n + 3]) {
        let v: f64 = token.parse().ok()?;
        if !v.is_finite() {
            return None;
        }
        *slot = v;
    }
    // odometry fields must at least be numeric for the record to count
    for token in &tokens[2 + n + 3..2 + n + 6] {
        token.parse::<f64>().ok()?;
    }
    let (angle_min, angle_increment) = beam_geometry(n);
    Some(LaserScan { pose, ranges, angle_min, angle_increment, max_range: DEFAULT_MAX_RANGE })
}

/// Extracts every well-formed `FLASER` record from a log stream.
///
/// Total over its input: comment lines, other record types, and malformed
/// `FLASER` lines never abort the parse. A non-empty stream yielding zero
/// scans is reported as a parse failure.
pub fn parse_carmen_log<R: BufRead>(reader: R) -> Result<CarmenLog> {
    let mut scans = Vec::new();
    let mut skipped_malformed = 0usize;
    let mut saw_content = false;

    for line in reader.lines() {
        let line = line?;
        saw_content = true;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.first() != Some(&"FLASER") {
            continue;
        }
        match parse_flaser(&tokens) {
            Some(scan) => scans.push(scan),
            None => skipped_malformed += 1,
        }
    }

    if saw_content && scans.is_empty() {
        return Err(Error::ParseFailure(format!(
            "no valid FLASER records found ({skipped_malformed} malformed)"
        )));
    }
    Ok(CarmenLog { scans, skipped_malformed })
}

/// Converts scans into a labeled dataset by walking each beam.
///
/// A beam that hits (range below `max_range_clip`) contributes one occupied
/// sample at its endpoint; every beam contributes free samples at `spacing`
/// intervals strictly before the endpoint. Max-range returns yield free
/// samples only.
pub fn raycast_label(
    scans: &[LaserScan],
    spacing: f64,
    max_range_clip: f64,
    seed: u64,
) -> Result<LabeledPointCloud> {
    if !(spacing > 0.0) {
        return Err(Error::invalid("free-sample spacing must be positive"));
    }
    if !(max_range_clip > 0.0) {
        return Err(Error::invalid("max-range clip must be positive"));
    }
    let mut samples = Vec::new();
    for scan in scans {
        let origin = Vector2::new(scan.pose[0], scan.pose[1]);
        for (i, &range) in scan.ranges.iter().enumerate() {
            let angle = scan.beam_angle(i);
            let dir = Vector2::new(angle.cos(), angle.sin());
            let hit = range < max_range_clip;
            let effective = range.min(max_range_clip);
            if hit {
                let end = origin + dir * range;
                samples.push(LabeledSample::new(vec![end.x, end.y], 1)?);
            }
            let mut k = 1usize;
            while (k as f64) * spacing < effective {
                let p = origin + dir * (k as f64 * spacing);
                samples.push(LabeledSample::new(vec![p.x, p.y], -1)?);
                k += 1;
            }
        }
    }
    Ok(LabeledPointCloud::new(samples, Provenance::LogDerived, seed))
}
