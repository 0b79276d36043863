//! Grids, paths and line ensembles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid with `steps + 1` points on `[t_start, t_end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        let grid = GridSpec {
            t_start,
            t_end,
            steps,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("grid needs at least one step".into()));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return Err(Error::Config("grid endpoints must be finite".into()));
        }
        if self.t_end <= self.t_start {
            return Err(Error::Config(format!(
                "grid end {} must exceed start {}",
                self.t_end, self.t_start
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Time of grid point `j`; the last point is exactly `t_end`.
    pub fn time(&self, j: usize) -> f64 {
        if j == self.steps {
            self.t_end
        } else {
            self.t_start + j as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    /// Index of the grid point within `tol` of `t`, if any.
    pub fn index_of(&self, t: f64, tol: f64) -> Option<usize> {
        let x = (t - self.t_start) / self.spacing();
        let j = x.round();
        if j < 0.0 || j > self.steps as f64 {
            return None;
        }
        let j = j as usize;
        ((self.time(j) - t).abs() <= tol).then_some(j)
    }

    /// Grid `factor` times finer on the same interval.
    pub fn refine(&self, factor: usize) -> GridSpec {
        GridSpec {
            steps: self.steps * factor,
            ..*self
        }
    }
}

/// One line: values on a grid, with the quadratic-variation rate of the
/// underlying Brownian motion and the drift of its bridge (zero if unused).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub variance: f64,
    pub slope: f64,
}

impl Path {
    pub fn new(grid: GridSpec, values: Vec<f64>, variance: f64, slope: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "path has {} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                message: format!("non-finite path value {v}"),
                dump: None,
            });
        }
        Ok(Path {
            grid,
            values,
            variance,
            slope,
        })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Path {
            grid,
            values: vec![value; grid.len()],
            variance: 1.0,
            slope: 0.0,
        }
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every `factor`-th point, on the correspondingly coarser grid.
    pub fn subsample(&self, factor: usize) -> Result<Path> {
        if factor == 0 || self.grid.steps % factor != 0 {
            return Err(Error::Config(format!(
                "cannot subsample {} steps by {factor}",
                self.grid.steps
            )));
        }
        let grid = GridSpec {
            steps: self.grid.steps / factor,
            ..self.grid
        };
        let values = self.values.iter().step_by(factor).copied().collect();
        Ok(Path {
            grid,
            values,
            ..*self
        })
    }
}

/// Endpoint data for one Brownian bridge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeSpec {
    pub start_value: f64,
    pub end_value: f64,
    pub grid: GridSpec,
    pub variance: f64,
}

impl BridgeSpec {
    pub fn new(start_value: f64, end_value: f64, grid: GridSpec, variance: f64) -> Result<Self> {
        let spec = BridgeSpec {
            start_value,
            end_value,
            grid,
            variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return Err(Error::Config(format!(
                "bridge variance must be positive, got {}",
                self.variance
            )));
        }
        if !(self.start_value.is_finite() && self.end_value.is_finite()) {
            return Err(Error::Config("bridge endpoints must be finite".into()));
        }
        Ok(())
    }

    pub fn slope(&self) -> f64 {
        (self.end_value - self.start_value) / self.grid.duration()
    }
}

/// Ordered family of paths on a shared grid; `lines[0]` is the top line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineEnsemble {
    pub grid: GridSpec,
    pub lines: Vec<Path>,
    /// Set when the producer guarantees `lines[i] >= lines[i + 1]` pointwise.
    pub ordered: bool,
}

impl LineEnsemble {
    pub fn new(grid: GridSpec, lines: Vec<Path>, ordered: bool) -> Result<Self> {
        if lines.iter().any(|p| p.grid != grid) {
            return Err(Error::Config("all lines must share the ensemble grid".into()));
        }
        let ensemble = LineEnsemble {
            grid,
            lines,
            ordered,
        };
        if ordered && ensemble.first_order_violation(false).is_some() {
            return Err(Error::Precondition(
                "ensemble flagged ordered but lines cross".into(),
            ));
        }
        Ok(ensemble)
    }

    /// Builds an ensemble from per-time columns: `columns[j][i]` is line `i` at grid point `j`.
    pub fn from_columns(
        grid: GridSpec,
        columns: &[Vec<f64>],
        variance: f64,
        ordered: bool,
    ) -> Result<Self> {
        if columns.len() != grid.len() {
            return Err(Error::Config("one column per grid point required".into()));
        }
        let k = columns.first().map_or(0, |c| c.len());
        let lines = (0..k)
            .map(|i| {
                let values = columns.iter().map(|c| c[i]).collect();
                Path::new(grid, values, variance, 0.0)
            })
            .collect::<Result<Vec<_>>>()?;
        LineEnsemble::new(grid, lines, ordered)
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn value(&self, line: usize, j: usize) -> f64 {
        self.lines[line].values[j]
    }

    /// First `(line, grid index)` where line `i` fails to stay above line
    /// `i + 1`. `strict` treats ties as violations.
    pub fn first_order_violation(&self, strict: bool) -> Option<(usize, usize)> {
        for i in 1..self.lines.len() {
            let (upper, lower) = (&self.lines[i - 1].values, &self.lines[i].values);
            for j in 0..upper.len() {
                let bad = if strict {
                    upper[j] <= lower[j]
                } else {
                    upper[j] < lower[j]
                };
                if bad {
                    return Some((i - 1, j));
                }
            }
        }
        None
    }

    pub fn is_strictly_ordered(&self) -> bool {
        self.first_order_violation(true).is_none()
    }

    /// The top `k` lines.
    pub fn top(&self, k: usize) -> LineEnsemble {
        LineEnsemble {
            grid: self.grid,
            lines: self.lines.iter().take(k).cloned().collect(),
            ordered: self.ordered,
        }
    }

    pub fn subsample(&self, factor: usize) -> Result<LineEnsemble> {
        if factor == 0 || self.grid.steps % factor != 0 {
            return Err(Error::Config(format!(
                "cannot subsample {} steps by {factor}",
                self.grid.steps
            )));
        }
        let grid = GridSpec {
            steps: self.grid.steps / factor,
            ..self.grid
        };
        let lines = self
            .lines
            .iter()
            .map(|p| p.subsample(factor))
            .collect::<Result<Vec<_>>>()?;
        Ok(LineEnsemble {
            grid,
            lines,
            ordered: self.ordered,
        })
    }

    /// Values of all lines at grid index `j`, top first.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.lines.iter().map(|p| p.values[j]).collect()
    }
}
