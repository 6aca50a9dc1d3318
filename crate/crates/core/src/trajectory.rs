use crate::simplex::SimplexVector;
use crate::{Error, Result};

/// Time-stamped simplex points on a uniform grid.
///
/// Point `i` sits at time `(origin + i) * dt`, so grid times are computed from
/// integers and never accumulate roundoff. Stochastic paths record their
/// population size, which lets consumers recover exact integer counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    origin: i64,
    dt: f64,
    dim: usize,
    data: Vec<f64>,
    population: Option<u32>,
    absorbed_at: Option<u64>,
}

impl Trajectory {
    pub fn new(origin: i64, dt: f64, dim: usize) -> Self {
        Trajectory {
            origin,
            dt,
            dim,
            data: Vec::new(),
            population: None,
            absorbed_at: None,
        }
    }

    pub(crate) fn with_capacity(origin: i64, dt: f64, dim: usize, points: usize) -> Self {
        Trajectory {
            data: Vec::with_capacity(points * dim),
            ..Trajectory::new(origin, dt, dim)
        }
    }

    pub(crate) fn set_population(&mut self, n: u32) {
        self.population = Some(n);
    }

    pub(crate) fn set_absorbed_at(&mut self, step: Option<u64>) {
        self.absorbed_at = step;
    }

    pub fn push(&mut self, point: &[f64]) {
        assert_eq!(point.len(), self.dim, "trajectory dimension mismatch");
        self.data.extend_from_slice(point);
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Population size for paths produced by the stochastic engine.
    pub fn population(&self) -> Option<u32> {
        self.population
    }

    /// Step (counted from time 0) at which a stochastic path hit a vertex.
    pub fn absorbed_at(&self) -> Option<u64> {
        self.absorbed_at
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        (self.origin + i as i64) as f64 * self.dt
    }

    pub fn start_time(&self) -> f64 {
        self.time(0)
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last(&self) -> Option<&[f64]> {
        (!self.is_empty()).then(|| self.point(self.len() - 1))
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Index of the grid point at time `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = t / self.dt;
        let rounded = k.round();
        if (k - rounded).abs() > 1e-9 * k.abs().max(1.0) {
            return None;
        }
        let i = rounded as i64 - self.origin;
        (0..self.len() as i64).contains(&i).then_some(i as usize)
    }

    /// Piecewise-linear interpolation between consecutive grid points.
    pub fn interpolate(&self, t: f64) -> Result<SimplexVector> {
        let mut out = vec![0.0; self.dim];
        self.interpolate_into(t, &mut out)?;
        Ok(SimplexVector::from_raw(out))
    }

    pub(crate) fn interpolate_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Range("empty trajectory".into()));
        }
        let (start, end) = (self.start_time(), self.end_time());
        let slack = 1e-12 * self.dt;
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::Range(format!(
                "t={t} outside trajectory range [{start}, {end}]"
            )));
        }
        if let Some(i) = self.index_of(t) {
            out.copy_from_slice(self.point(i));
            return Ok(());
        }
        let pos = t / self.dt - self.origin as f64;
        let i = (pos.floor() as usize).min(self.len() - 2);
        let frac = pos - i as f64;
        let (lo, hi) = (self.point(i), self.point(i + 1));
        for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
            *o = a + frac * (b - a);
        }
        Ok(())
    }
}
