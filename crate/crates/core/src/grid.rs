//! Space-time domains, uniform tensor grids and sampled fields.

use ndarray::Array2;

use crate::error::{Error, Result};

/// The rectangle `[0, horizon] × [0, length]` together with the speed floor `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub horizon: f64,
    pub length: f64,
    pub speed_floor: f64,
}

impl Domain {
    pub fn new(horizon: f64, length: f64, speed_floor: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidDomain(format!("horizon must be > 0, got {horizon}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidDomain(format!("length must be > 0, got {length}")));
        }
        if !(speed_floor > 0.0 && speed_floor.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "speed floor must be > 0, got {speed_floor}"
            )));
        }
        Ok(Self {
            horizon,
            length,
            speed_floor,
        })
    }

    pub fn contains(&self, t: f64, x: f64) -> bool {
        (0.0..=self.horizon).contains(&t) && (0.0..=self.length).contains(&x)
    }
}

/// Uniform tensor grid skeleton. Node coordinates are stored explicitly so the
/// last node sits exactly on `horizon` / `length`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    t_nodes: Vec<f64>,
    x_nodes: Vec<f64>,
}

fn linspace(end: f64, n: usize) -> Vec<f64> {
    let h = end / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    v[n - 1] = end;
    v
}

impl Grid {
    pub fn uniform(horizon: f64, length: f64, nt: usize, nx: usize) -> Result<Self> {
        if nt < 2 || nx < 2 {
            return Err(Error::InvalidDomain(format!(
                "grid needs at least 2 nodes per axis, got nt={nt}, nx={nx}"
            )));
        }
        if !(horizon > 0.0 && length > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "grid extents must be positive, got horizon={horizon}, length={length}"
            )));
        }
        Ok(Self {
            t_nodes: linspace(horizon, nt),
            x_nodes: linspace(length, nx),
        })
    }

    /// Picks `nt` so that `max_speed · Δt / Δx ≤ cfl`.
    pub fn with_cfl(horizon: f64, length: f64, nx: usize, max_speed: f64, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && max_speed > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "cfl and max speed must be positive, got {cfl}, {max_speed}"
            )));
        }
        let dx = length / (nx.max(2) - 1) as f64;
        let steps = (horizon * max_speed / (cfl * dx)).ceil().max(1.0) as usize;
        Self::uniform(horizon, length, steps + 1, nx)
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn nt(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn nx(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn dt(&self) -> f64 {
        self.t_nodes[1] - self.t_nodes[0]
    }

    pub fn dx(&self) -> f64 {
        self.x_nodes[1] - self.x_nodes[0]
    }

    pub fn horizon(&self) -> f64 {
        *self.t_nodes.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        *self.x_nodes.last().unwrap()
    }

    /// Index of the first time node at or after `t` (clamped to the last node).
    pub fn time_index_at_or_after(&self, t: f64) -> usize {
        let tol = 1e-9 * self.dt();
        self.t_nodes.iter().position(|&s| s >= t - tol).unwrap_or(self.nt() - 1)
    }

    pub fn zeros(&self) -> Field {
        Field {
            t_nodes: self.t_nodes.clone(),
            x_nodes: self.x_nodes.clone(),
            values: Array2::zeros((self.nt(), self.nx())),
        }
    }

    /// Tabulates `f(t, x)` on the grid.
    pub fn tabulate(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let values = Array2::from_shape_fn((self.nt(), self.nx()), |(k, j)| f(self.t_nodes[k], self.x_nodes[j]));
        Field {
            t_nodes: self.t_nodes.clone(),
            x_nodes: self.x_nodes.clone(),
            values,
        }
    }
}

/// Values `y(t_k, x_j)` on a tensor grid; rows are time samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    t_nodes: Vec<f64>,
    x_nodes: Vec<f64>,
    values: Array2<f64>,
}

impl Field {
    pub fn new(t_nodes: Vec<f64>, x_nodes: Vec<f64>, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (t_nodes.len(), x_nodes.len()) {
            return Err(Error::InvalidDomain(format!(
                "field shape {:?} does not match nodes ({}, {})",
                values.dim(),
                t_nodes.len(),
                x_nodes.len()
            )));
        }
        if t_nodes.len() < 2 || x_nodes.len() < 2 {
            return Err(Error::InvalidDomain("field needs at least 2x2 nodes".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain("field contains non-finite values".into()));
        }
        Ok(Self {
            t_nodes,
            x_nodes,
            values,
        })
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn nt(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn nx(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn at(&self, k: usize, j: usize) -> f64 {
        self.values[[k, j]]
    }

    pub fn row(&self, k: usize) -> ndarray::ArrayView1<'_, f64> {
        self.values.row(k)
    }

    pub fn column(&self, j: usize) -> ndarray::ArrayView1<'_, f64> {
        self.values.column(j)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn row_sup(&self, k: usize) -> f64 {
        self.values.row(k).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `max |self - other|`; both fields must share the node layout.
    pub fn sup_distance(&self, other: &Field) -> f64 {
        debug_assert_eq!(self.values.dim(), other.values.dim());
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest `|y(p) - y(q)| / (|Δt| + |Δx|)` over grid nodes.
    ///
    /// For the `ℓ¹` metric the maximum over all node pairs is attained on
    /// neighbouring pairs (a monotone staircase path splits any pair), so only
    /// neighbours are scanned.
    pub fn discrete_lipschitz(&self) -> f64 {
        let (nt, nx) = self.values.dim();
        let mut best = 0.0_f64;
        for k in 0..nt {
            for j in 0..nx {
                let y = self.values[[k, j]];
                if j + 1 < nx {
                    let d = (self.values[[k, j + 1]] - y).abs() / (self.x_nodes[j + 1] - self.x_nodes[j]);
                    best = best.max(d);
                }
                if k + 1 < nt {
                    let d = (self.values[[k + 1, j]] - y).abs() / (self.t_nodes[k + 1] - self.t_nodes[k]);
                    best = best.max(d);
                }
            }
        }
        best
    }

    /// Bilinear interpolation, clamped to the grid rectangle.
    pub fn sample(&self, t: f64, x: f64) -> f64 {
        let (k, wt) = locate(&self.t_nodes, t);
        let (j, wx) = locate(&self.x_nodes, x);
        let v = &self.values;
        let a = v[[k, j]] * (1.0 - wx) + v[[k, j + 1]] * wx;
        let b = v[[k + 1, j]] * (1.0 - wx) + v[[k + 1, j + 1]] * wx;
        a * (1.0 - wt) + b * wt
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            t_nodes: self.t_nodes.clone(),
            x_nodes: self.x_nodes.clone(),
            values: self.values.mapv(f),
        }
    }

    /// Node-wise combination of two fields on the same layout.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.values.dim(), other.values.dim());
        let mut values = self.values.clone();
        values.zip_mut_with(&other.values, |a, &b| *a = f(*a, b));
        Field {
            t_nodes: self.t_nodes.clone(),
            x_nodes: self.x_nodes.clone(),
            values,
        }
    }
}

/// Cell index and fractional offset of `s` in the sorted node list, clamped.
pub(crate) fn locate(nodes: &[f64], s: f64) -> (usize, f64) {
    let n = nodes.len();
    let first = nodes[0];
    let last = nodes[n - 1];
    if s <= first {
        return (0, 0.0);
    }
    if s >= last {
        return (n - 2, 1.0);
    }
    // Uniform grids: direct index, then a local correction for rounding.
    let h = (last - first) / (n - 1) as f64;
    let mut i = (((s - first) / h) as usize).min(n - 2);
    while i > 0 && nodes[i] > s {
        i -= 1;
    }
    while i + 2 < n && nodes[i + 1] <= s {
        i += 1;
    }
    let w = (s - nodes[i]) / (nodes[i + 1] - nodes[i]);
    (i, w.clamp(0.0, 1.0))
}

/// Piecewise-linear interpolation of samples `(nodes, values)`, clamped.
pub(crate) fn interp1(nodes: &[f64], values: &[f64], s: f64) -> f64 {
    let (i, w) = locate(nodes, s);
    values[i] * (1.0 - w) + values[i + 1] * w
}
