//! Piecewise-constant functions on boxes of the orthant.

use serde::{Deserialize, Serialize};

use crate::covering::Cuboid;
use crate::error::{check_dims, Error, Result};
use crate::measure::measure_box;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub value: f64,
}

impl Cell {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, value: f64) -> Self {
        Cell { lower, upper, value }
    }

    pub fn from_cuboid(q: &Cuboid, value: f64) -> Self {
        Cell { lower: q.lower().to_vec(), upper: q.upper().to_vec(), value }
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Half-open `[lower, upper)` so that adjacent cells do not share points.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&v, (&a, &b))| v >= a && v < b)
    }

    pub fn measure(&self, nu: &[f64]) -> f64 {
        measure_box(nu, &self.lower, &self.upper)
    }

    pub fn cuboid(&self) -> Result<Cuboid> {
        Cuboid::new(self.lower.clone(), self.upper.clone())
    }
}

/// Finite sum of constants on interior-disjoint boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFunction {
    pub dim: usize,
    pub cells: Vec<Cell>,
}

impl CellFunction {
    pub fn new(dim: usize, cells: Vec<Cell>) -> Result<Self> {
        for c in &cells {
            check_dims(dim, c.lower.len())?;
            check_dims(dim, c.upper.len())?;
            if !c.value.is_finite() {
                return Err(Error::domain("cell values must be finite"));
            }
            if c.lower.iter().zip(&c.upper).any(|(&a, &b)| !(a >= 0.0 && b > a && b.is_finite())) {
                return Err(Error::domain("cells must be nondegenerate boxes in the orthant"));
            }
        }
        Ok(CellFunction { dim, cells })
    }

    pub fn zero(dim: usize) -> Self {
        CellFunction { dim, cells: vec![] }
    }

    pub fn indicator(q: &Cuboid, value: f64) -> Self {
        CellFunction { dim: q.dim(), cells: vec![Cell::from_cuboid(q, value)] }
    }

    /// Value at `x`; on shared faces the first listed cell wins.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.cells.iter().find(|c| c.contains(x)).map_or(0.0, |c| c.value)
    }

    pub fn integral(&self, nu: &[f64]) -> f64 {
        self.cells.iter().map(|c| c.value * c.measure(nu)).sum()
    }

    pub fn l1(&self, nu: &[f64]) -> f64 {
        self.cells.iter().map(|c| c.value.abs() * c.measure(nu)).sum()
    }

    pub fn sup_abs(&self) -> f64 {
        self.cells.iter().map(|c| c.value.abs()).fold(0.0, f64::max)
    }

    /// Bounding box of the cells with nonzero value.
    pub fn support_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut it = self.cells.iter().filter(|c| c.value != 0.0);
        let first = it.next()?;
        let (mut lo, mut hi) = (first.lower.clone(), first.upper.clone());
        for c in it {
            for k in 0..self.dim {
                lo[k] = lo[k].min(c.lower[k]);
                hi[k] = hi[k].max(c.upper[k]);
            }
        }
        Some((lo, hi))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        CellFunction {
            dim: self.dim,
            cells: self.cells.iter().map(|c| Cell { value: alpha * c.value, ..c.clone() }).collect(),
        }
    }

    /// Multiply each cell value by `h(cell)`.
    pub fn map_cells(&self, h: impl Fn(&Cell) -> f64) -> Self {
        CellFunction {
            dim: self.dim,
            cells: self.cells.iter().map(|c| Cell { value: h(c) * c.value, ..c.clone() }).collect(),
        }
    }

    /// Drop cells whose value is exactly zero.
    pub fn pruned(mut self) -> Self {
        self.cells.retain(|c| c.value != 0.0);
        self
    }
}

/// Values on a tensor grid given by per-axis edges; the last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub edges: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(edges: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::domain("grid needs at least one axis"));
        }
        for e in &edges {
            if e.len() < 2 || e[0] < 0.0 || e.windows(2).any(|w| !(w[1] > w[0])) || !e[e.len() - 1].is_finite() {
                return Err(Error::domain("grid edges must be increasing, finite and nonnegative"));
            }
        }
        let n: usize = edges.iter().map(|e| e.len() - 1).product();
        check_dims(n, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("grid values must be finite"));
        }
        Ok(GridFunction { edges, values })
    }

    /// Uniform `2^depth`-per-axis grid on `domain`, sampled at cell centres.
    pub fn dyadic(domain: &Cuboid, depth: u32, f: impl Fn(&[f64]) -> f64) -> Self {
        let m = 1usize << depth;
        let edges: Vec<Vec<f64>> = (0..domain.dim())
            .map(|k| {
                let (a, b) = (domain.lower()[k], domain.upper()[k]);
                (0..=m).map(|i| if i == m { b } else { a + (b - a) * i as f64 / m as f64 }).collect()
            })
            .collect();
        let shape: Vec<usize> = vec![m; domain.dim()];
        let mut values = Vec::with_capacity(m.pow(domain.dim() as u32));
        for flat in 0..m.pow(domain.dim() as u32) {
            let idx = unflatten(flat, &shape);
            let c: Vec<f64> = idx.iter().enumerate().map(|(k, &i)| 0.5 * (edges[k][i] + edges[k][i + 1])).collect();
            values.push(f(&c));
        }
        GridFunction { edges, values }
    }

    /// Rebuild a tensor grid from cell centres; edges sit halfway between centres.
    pub fn from_centers(points: &[Vec<f64>], values: &[f64]) -> Result<Self> {
        check_dims(points.len(), values.len())?;
        let d = points.first().map(|p| p.len()).ok_or_else(|| Error::domain("empty grid"))?;
        let mut centers: Vec<Vec<f64>> = vec![vec![]; d];
        for p in points {
            check_dims(d, p.len())?;
            for k in 0..d {
                centers[k].push(p[k]);
            }
        }
        for c in &mut centers {
            c.sort_by(f64::total_cmp);
            c.dedup();
            if c.len() < 2 {
                return Err(Error::domain("each axis needs at least two distinct centres"));
            }
        }
        let edges: Vec<Vec<f64>> = centers
            .iter()
            .map(|c| {
                let n = c.len();
                let mut e = Vec::with_capacity(n + 1);
                e.push((c[0] - 0.5 * (c[1] - c[0])).max(0.0));
                for w in c.windows(2) {
                    e.push(0.5 * (w[0] + w[1]));
                }
                e.push(c[n - 1] + 0.5 * (c[n - 1] - c[n - 2]));
                e
            })
            .collect();
        let shape: Vec<usize> = centers.iter().map(Vec::len).collect();
        let total: usize = shape.iter().product();
        let mut vals = vec![0.0; total];
        for (p, &v) in points.iter().zip(values) {
            let mut flat = 0;
            for k in 0..d {
                let i = centers[k].binary_search_by(|c| c.total_cmp(&p[k])).map_err(|_| Error::domain("bad centre"))?;
                flat = flat * shape[k] + i;
            }
            vals[flat] = v;
        }
        GridFunction::new(edges, vals)
    }

    /// Tensor grid spanned by every cell edge, valued by `f` at the grid cell centres.
    pub fn from_cell_function(f: &CellFunction) -> Result<Self> {
        if f.cells.is_empty() {
            return Err(Error::domain("cell function has no cells"));
        }
        let edges: Vec<Vec<f64>> = (0..f.dim)
            .map(|k| {
                let mut e: Vec<f64> = f.cells.iter().flat_map(|c| [c.lower[k], c.upper[k]]).collect();
                e.sort_by(f64::total_cmp);
                e.dedup();
                e
            })
            .collect();
        let shape: Vec<usize> = edges.iter().map(|e| e.len() - 1).collect();
        let values = (0..shape.iter().product())
            .map(|flat| {
                let idx = unflatten(flat, &shape);
                let c: Vec<f64> = idx.iter().enumerate().map(|(k, &i)| 0.5 * (edges[k][i] + edges[k][i + 1])).collect();
                f.eval(&c)
            })
            .collect();
        GridFunction::new(edges, values)
    }

    pub fn dim(&self) -> usize {
        self.edges.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.len() - 1).collect()
    }

    pub fn to_cells(&self) -> CellFunction {
        let shape = self.shape();
        let cells = self
            .values
            .iter()
            .enumerate()
            .map(|(flat, &v)| {
                let idx = unflatten(flat, &shape);
                Cell {
                    lower: idx.iter().enumerate().map(|(k, &i)| self.edges[k][i]).collect(),
                    upper: idx.iter().enumerate().map(|(k, &i)| self.edges[k][i + 1]).collect(),
                    value: v,
                }
            })
            .collect();
        CellFunction { dim: self.dim(), cells }
    }
}

pub(crate) fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip_through_centres() {
        let q = Cuboid::new(vec![1.0, 2.0], vec![2.0, 4.0]).unwrap();
        let g = GridFunction::dyadic(&q, 2, |x| x[0] + 10.0 * x[1]);
        let cells = g.to_cells();
        let pts: Vec<Vec<f64>> = cells.cells.iter().map(Cell::center).collect();
        let back = GridFunction::from_centers(&pts, &g.values).unwrap();
        assert_eq!(back.shape(), vec![4, 4]);
        for (a, b) in back.edges.iter().flatten().zip(g.edges.iter().flatten()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(back.values, g.values);
    }

    #[test]
    fn integrals() {
        let q = Cuboid::new(vec![1.0], vec![2.0]).unwrap();
        let f = CellFunction::indicator(&q, 2.0);
        assert!((f.integral(&[0.0]) - 3.0).abs() < 1e-15);
        assert_eq!(f.eval(&[1.5]), 2.0);
        assert_eq!(f.eval(&[2.5]), 0.0);
        assert!(GridFunction::new(vec![vec![1.0, 0.5]], vec![1.0]).is_err());
    }
}
