//! Piecewise-linear interpolation with clamped extrapolation.
//!
//! Queries outside the sampled range return the nearest endpoint's value and
//! report that they left the range. Queries landing exactly on a knot return
//! the stored value untouched.

use serde::Serialize;

/// Where a query falls relative to an increasing sequence of knots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bracket {
    /// Exactly on knot `i`.
    Exact(usize),
    /// Outside the sampled range; clamped to knot `i`.
    Clamped(usize),
    /// Strictly between knots `lo` and `lo + 1`, at fraction `t` in (0, 1).
    Between { lo: usize, t: f64 },
}

impl Bracket {
    /// Locate `x` among `n >= 1` strictly increasing knots given by `knot(i)`.
    pub fn locate(n: usize, knot: impl Fn(usize) -> f64, x: f64) -> Bracket {
        debug_assert!(n >= 1);
        let first = knot(0);
        let last = knot(n - 1);
        if x < first {
            return Bracket::Clamped(0);
        }
        if x > last {
            return Bracket::Clamped(n - 1);
        }
        // first index with knot > x
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if knot(mid) <= x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let i = lo - 1;
        if knot(i) == x {
            return Bracket::Exact(i);
        }
        let (x0, x1) = (knot(i), knot(i + 1));
        Bracket::Between {
            lo: i,
            t: (x - x0) / (x1 - x0),
        }
    }

    pub fn apply(&self, value: impl Fn(usize) -> f64) -> f64 {
        match *self {
            Bracket::Exact(i) | Bracket::Clamped(i) => value(i),
            Bracket::Between { lo, t } => {
                let (y0, y1) = (value(lo), value(lo + 1));
                y0 + t * (y1 - y0)
            }
        }
    }

    pub fn extrapolated(&self) -> bool {
        matches!(self, Bracket::Clamped(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interpolated {
    pub value: f64,
    pub extrapolated: bool,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum InterpError {
    #[error("at least {0} knots are required")]
    TooFewKnots(usize),
    #[error("knot {0} is not finite")]
    NonFinite(usize),
    #[error("knots must be strictly increasing (at index {0})")]
    NotIncreasing(usize),
}

/// An owned piecewise-linear function over strictly increasing knots.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, InterpError> {
        if points.is_empty() {
            return Err(InterpError::TooFewKnots(1));
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(InterpError::NonFinite(i));
            }
            if i > 0 && points[i - 1].0 >= x {
                return Err(InterpError::NotIncreasing(i));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, x: f64) -> Interpolated {
        let b = Bracket::locate(self.points.len(), |i| self.points[i].0, x);
        Interpolated {
            value: b.apply(|i| self.points[i].1),
            extrapolated: b.extrapolated(),
        }
    }
}
