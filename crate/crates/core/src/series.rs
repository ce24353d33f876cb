/// Piecewise-linear time series `(t [s], value)`, held constant outside the
/// sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    points: Vec<(f64, f64)>,
}

impl TimeSeries {
    pub fn constant(value: f64) -> Self {
        TimeSeries {
            points: vec![(0.0, value)],
        }
    }

    /// Samples must be non-empty with strictly increasing times.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, String> {
        if points.is_empty() {
            return Err("time series needs at least one sample".into());
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err("time series samples must have strictly increasing times".into());
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err("time series samples must be finite".into());
        }
        Ok(TimeSeries { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn is_constant(&self) -> bool {
        self.points.len() == 1
    }

    pub fn at(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        let last = pts[pts.len() - 1];
        if t >= last.0 {
            return last.1;
        }
        let i = pts.partition_point(|&(ti, _)| ti <= t);
        let (t0, v0) = pts[i - 1];
        let (t1, v1) = pts[i];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}
