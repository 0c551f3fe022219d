//! Labeled occupancy datasets and their CSV round trip.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One position with an observed occupancy class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub position: Vec<f64>,
    /// Exactly `-1` (free) or `+1` (occupied).
    pub label: i8,
}

impl LabeledSample {
    pub fn new(position: Vec<f64>, label: i8) -> Result<Self> {
        if label != 1 && label != -1 {
            return Err(Error::invalid(format!("label must be -1 or +1, got {label}")));
        }
        if position.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample position must be finite"));
        }
        Ok(LabeledSample { position, label })
    }
}

/// How a dataset came to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Synthetic,
    LogDerived,
}

/// The training dataset: positions plus ±1 occupancy labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointCloud {
    samples: Vec<LabeledSample>,
    provenance: Provenance,
    seed: u64,
}

impl LabeledPointCloud {
    pub fn new(samples: Vec<LabeledSample>, provenance: Provenance, seed: u64) -> Self {
        LabeledPointCloud { samples, provenance, seed }
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn occupied_count(&self) -> usize {
        self.samples.iter().filter(|s| s.label > 0).count()
    }

    pub fn free_count(&self) -> usize {
        self.len() - self.occupied_count()
    }

    /// Training on a single class produces a degenerate classifier.
    pub fn has_both_labels(&self) -> bool {
        self.occupied_count() > 0 && self.free_count() > 0
    }

    /// Writes the 2D CSV form `x,y,label`. Coordinates use the shortest
    /// representation that parses back to the same `f64`, so the round trip
    /// is exact.
    pub fn save_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,label")?;
        for s in &self.samples {
            if s.position.len() != 2 {
                return Err(Error::invalid(format!(
                    "CSV datasets are 2D, found a {}-dimensional sample",
                    s.position.len()
                )));
            }
            writeln!(out, "{},{},{}", s.position[0], s.position[1], s.label)?;
        }
        Ok(())
    }

    pub fn save_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.save_csv(std::io::BufWriter::new(file))
    }

    pub fn load_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let reader = BufReader::new(reader);
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(Error::FormatError {
                    line: 1,
                    message: "missing header `x,y,label`".into(),
                })
            }
        };
        if header.trim() != "x,y,label" {
            return Err(Error::FormatError {
                line: 1,
                message: format!("expected header `x,y,label`, found `{}`", header.trim()),
            });
        }

        let mut samples = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let fields: Vec<&str> = text.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::FormatError {
                    line: line_no,
                    message: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let parse = |s: &str, name: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|_| Error::FormatError {
                    line: line_no,
                    message: format!("could not parse {name} `{}`", s.trim()),
                })
            };
            let x = parse(fields[0], "x")?;
            let y = parse(fields[1], "y")?;
            let label_value = parse(fields[2], "label")?;
            let label = if label_value == 1.0 {
                1
            } else if label_value == -1.0 {
                -1
            } else {
                return Err(Error::FormatError {
                    line: line_no,
                    message: format!("label must be -1 or 1, got {}", fields[2].trim()),
                });
            };
            samples.push(LabeledSample::new(vec![x, y], label).map_err(|e| {
                Error::FormatError { line: line_no, message: e.to_string() }
            })?);
        }
        Ok(LabeledPointCloud::new(samples, Provenance::Synthetic, 0))
    }

    pub fn load_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::load_csv(file)
    }
}
