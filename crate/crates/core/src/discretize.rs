//! Grids, normalized box bases and the inside/outside projector.

use std::fmt;
use std::str::FromStr;

use rug::Float;
use thiserror::Error;

use crate::highprec::{PrecisionContext, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Wedge in 1+1 dimensions, region `[0, b]` of the time-zero line.
    Wedge2d,
    /// Double cone in 1+1 dimensions over the interval `[-1, 1]`.
    Cone2d,
    /// Double cone in 3+1 dimensions over the unit ball, one angular sector.
    Cone4d,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Wedge2d, Scenario::Cone2d, Scenario::Cone4d];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Wedge2d => "wedge2d",
            Scenario::Cone2d => "cone2d",
            Scenario::Cone4d => "cone4d",
        }
    }

    pub fn measure(self) -> Measure {
        match self {
            Scenario::Cone4d => Measure::RadialR2,
            _ => Measure::Lebesgue,
        }
    }

    pub fn is_four_dimensional(self) -> bool {
        self == Scenario::Cone4d
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = DiscretizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| DiscretizeError::UnknownScenario(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// `dx` on the line.
    Lebesgue,
    /// `r² dr` on the half line.
    RadialR2,
}

/// Width progression of the outer cells of the cone grids.
///
/// With `K` outer cells per side and inner spacing `h`, cell `k = 1..K`
/// has width `h + k·d` (`FirstWider`, default) or `h + (k−1)·d`
/// (`FirstEqual`), with `d` fixed by the total outer length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TaperMode {
    #[default]
    FirstWider,
    FirstEqual,
}

impl TaperMode {
    pub fn name(self) -> &'static str {
        match self {
            TaperMode::FirstWider => "first-wider",
            TaperMode::FirstEqual => "first-equal",
        }
    }
}

impl FromStr for TaperMode {
    type Err = DiscretizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "first-wider" => Ok(TaperMode::FirstWider),
            "first-equal" => Ok(TaperMode::FirstEqual),
            other => Err(DiscretizeError::UnknownTaper(other.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizeError {
    #[error("unknown scenario {0:?} (expected wedge2d, cone2d or cone4d)")]
    UnknownScenario(String),
    #[error("unknown taper mode {0:?} (expected first-wider or first-equal)")]
    UnknownTaper(String),
    #[error("n = {n}: {requirement}")]
    BadCellCount { n: usize, requirement: &'static str },
    #[error("cutoff b = {b} must exceed the region radius {radius}")]
    BadCutoff { b: String, radius: u32 },
    #[error("outer taper increment is negative ({increment}); b is too small for the inner spacing")]
    NegativeTaper { increment: String },
}

/// Ordered breakpoints `a_0 < … < a_n` with a measure and per-cell
/// inside/outside flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub breakpoints: Vec<Scalar>,
    pub measure: Measure,
    pub inside: Vec<bool>,
}

impl Grid {
    pub fn cells(&self) -> usize {
        self.inside.len()
    }

    pub fn left(&self, i: usize) -> &Scalar {
        &self.breakpoints[i]
    }

    pub fn right(&self, i: usize) -> &Scalar {
        &self.breakpoints[i + 1]
    }

    pub fn width(&self, i: usize) -> Scalar {
        Float::with_val(self.breakpoints[i].prec(), self.right(i) - self.left(i))
    }

    pub fn midpoint(&self, i: usize) -> Scalar {
        Float::with_val(self.breakpoints[i].prec(), self.right(i) + self.left(i)) / 2u32
    }
}

/// Grid together with the normalization factors `n_i` of its box functions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBasis {
    pub grid: Grid,
    pub norms: Vec<Scalar>,
}

impl BoxBasis {
    pub fn dim(&self) -> usize {
        self.grid.cells()
    }
}

fn check_count(n: usize, divisor: usize, requirement: &'static str) -> Result<(), DiscretizeError> {
    if n < 8 || n % divisor != 0 {
        return Err(DiscretizeError::BadCellCount { n, requirement });
    }
    Ok(())
}

/// Outer cells of width `h + k·d` (or `h + (k−1)·d`) filling `[start, end]`.
fn tapered(
    ctx: &PrecisionContext,
    start: &Scalar,
    end: &Scalar,
    count: usize,
    h: &Scalar,
    mode: TaperMode,
) -> Result<Vec<Scalar>, DiscretizeError> {
    let k = count as u32;
    let length = Float::with_val(ctx.bits(), end - start);
    let fixed = Float::with_val(ctx.bits(), h * k);
    let steps = match mode {
        TaperMode::FirstWider => k * (k + 1) / 2,
        TaperMode::FirstEqual => k * (k - 1) / 2,
    };
    let d = (length - fixed) / steps;
    if d.is_sign_negative() && !d.is_zero() {
        return Err(DiscretizeError::NegativeTaper {
            increment: d.to_string_radix(10, Some(12)),
        });
    }
    let mut points = Vec::with_capacity(count);
    let mut x = start.clone();
    for j in 1..=k {
        let mult = match mode {
            TaperMode::FirstWider => j,
            TaperMode::FirstEqual => j - 1,
        };
        x += h;
        x += Float::with_val(ctx.bits(), &d * mult);
        if j == k {
            // Pin the end exactly so the cutoff is a breakpoint.
            points.push(end.clone());
        } else {
            points.push(x.clone());
        }
    }
    Ok(points)
}

fn uniform(ctx: &PrecisionContext, lo: &Scalar, hi: &Scalar, cells: usize) -> Vec<Scalar> {
    let width = Float::with_val(ctx.bits(), hi - lo);
    (0..=cells)
        .map(|i| {
            if i == cells {
                hi.clone()
            } else {
                Float::with_val(ctx.bits(), &width * i as u32) / cells as u32 + lo
            }
        })
        .collect()
}

/// Builds the grid of `n` cells for a scenario with cutoff `b`.
pub fn build_grid(
    ctx: &PrecisionContext,
    scenario: Scenario,
    n: usize,
    b: &Scalar,
    taper: TaperMode,
) -> Result<Grid, DiscretizeError> {
    let b = ctx.round(b);
    let one = ctx.one();
    let (breakpoints, inside) = match scenario {
        Scenario::Wedge2d => {
            check_count(n, 2, "wedge2d needs an even n >= 8")?;
            if !b.is_sign_positive() || b.is_zero() {
                return Err(DiscretizeError::BadCutoff {
                    b: b.to_string_radix(10, Some(12)),
                    radius: 0,
                });
            }
            let minus_b = Float::with_val(ctx.bits(), -&b);
            let mut pts = uniform(ctx, &minus_b, &b, n);
            // The middle breakpoint is the region boundary; make it exactly 0.
            pts[n / 2] = ctx.zero();
            let inside = (0..n).map(|i| i >= n / 2).collect();
            (pts, inside)
        }
        Scenario::Cone2d => {
            check_count(n, 4, "cone2d needs n >= 8 divisible by 4")?;
            if b <= 1 {
                return Err(DiscretizeError::BadCutoff {
                    b: b.to_string_radix(10, Some(12)),
                    radius: 1,
                });
            }
            let k = n / 4;
            let h = ctx.scalar(4) / n as u32;
            let right = tapered(ctx, &one, &b, k, &h, taper)?;
            let mut pts: Vec<Scalar> = right.iter().rev().map(|x| Float::with_val(ctx.bits(), -x)).collect();
            pts.push(ctx.scalar(-1));
            let inner = uniform(ctx, &ctx.scalar(-1), &one, n / 2);
            pts.extend(inner.into_iter().skip(1));
            pts.extend(right);
            let inside = (0..n).map(|i| i >= k && i < 3 * k).collect();
            (pts, inside)
        }
        Scenario::Cone4d => {
            check_count(n, 2, "cone4d needs an even n >= 8")?;
            if b <= 1 {
                return Err(DiscretizeError::BadCutoff {
                    b: b.to_string_radix(10, Some(12)),
                    radius: 1,
                });
            }
            let half = n / 2;
            let h = ctx.scalar(2) / n as u32;
            let mut pts = uniform(ctx, &ctx.zero(), &one, half);
            pts.extend(tapered(ctx, &one, &b, half, &h, taper)?);
            let inside = (0..n).map(|i| i < half).collect();
            (pts, inside)
        }
    };
    Ok(Grid {
        breakpoints,
        measure: scenario.measure(),
        inside,
    })
}

/// Normalization factors making each box function a unit vector in the
/// grid's measure.
pub fn normalize(grid: &Grid) -> BoxBasis {
    let norms = (0..grid.cells())
        .map(|i| {
            let a = grid.left(i);
            let b = grid.right(i);
            let bits = a.prec();
            match grid.measure {
                Measure::Lebesgue => Float::with_val(bits, b - a).recip_sqrt(),
                Measure::RadialR2 => {
                    let cube = |x: &Scalar| Float::with_val(bits, x.square_ref()) * x;
                    let mass = cube(b) - cube(a);
                    (Float::with_val(bits, 3u32) / mass).sqrt()
                }
            }
        })
        .collect();
    BoxBasis {
        grid: grid.clone(),
        norms,
    }
}

/// Diagonal of the projector onto the local region.
pub fn chi_diagonal(grid: &Grid) -> Vec<bool> {
    grid.inside.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highprec::agreeing_digits;
    use rug::ops::Pow;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn wedge_uniform() {
        let c = ctx();
        let g = build_grid(&c, Scenario::Wedge2d, 8, &c.one(), TaperMode::default()).unwrap();
        let expected: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();
        for (p, e) in g.breakpoints.iter().zip(expected) {
            assert_eq!(p.to_f64(), e);
        }
        assert_eq!(chi_diagonal(&g), vec![false, false, false, false, true, true, true, true]);
    }

    #[test]
    fn cone2d_b2_is_uniform() {
        let c = ctx();
        let g = build_grid(&c, Scenario::Cone2d, 8, &c.scalar(2), TaperMode::default()).unwrap();
        for i in 0..8 {
            assert!(agreeing_digits(&g.width(i), &c.scalar(0.5), 0.0) >= 40);
        }
    }

    #[test]
    fn cone2d_b4_taper() {
        let c = ctx();
        let g = build_grid(&c, Scenario::Cone2d, 8, &c.scalar(4), TaperMode::default()).unwrap();
        let w = |i| g.width(i);
        let seven_sixths = c.scalar(7) / 6u32;
        let eleven_sixths = c.scalar(11) / 6u32;
        assert!(agreeing_digits(&w(6), &seven_sixths, 0.0) >= 38);
        assert!(agreeing_digits(&w(7), &eleven_sixths, 0.0) >= 38);
        assert!(agreeing_digits(&w(1), &seven_sixths, 0.0) >= 38);
        assert!(agreeing_digits(&w(0), &eleven_sixths, 0.0) >= 38);
        assert_eq!(chi_diagonal(&g), vec![false, false, true, true, true, true, false, false]);
    }

    #[test]
    fn cone4d_layout() {
        let c = ctx();
        let g = build_grid(&c, Scenario::Cone4d, 8, &c.scalar(4), TaperMode::default()).unwrap();
        assert!(g.breakpoints[0].is_zero());
        assert_eq!(g.breakpoints[4], 1);
        assert_eq!(g.breakpoints[8], 4);
        assert_eq!(g.measure, Measure::RadialR2);
        assert_eq!(chi_diagonal(&g).iter().filter(|x| **x).count(), 4);
    }

    #[test]
    fn negative_taper_rejected() {
        let c = ctx();
        // n=8: inner spacing 0.5, two outer cells must cover 0.5 -> d < 0.
        let err = build_grid(&c, Scenario::Cone2d, 8, &c.scalar(1.5), TaperMode::default());
        assert!(matches!(err, Err(DiscretizeError::NegativeTaper { .. })));
        assert!(build_grid(&c, Scenario::Cone2d, 10, &c.scalar(4), TaperMode::default()).is_err());
        assert!(build_grid(&c, Scenario::Cone4d, 8, &c.one(), TaperMode::default()).is_err());
    }

    #[test]
    fn first_equal_taper() {
        let c = ctx();
        let g = build_grid(&c, Scenario::Cone2d, 16, &c.scalar(4), TaperMode::FirstEqual).unwrap();
        // first outer cell equals the inner spacing 0.25
        assert!(agreeing_digits(&g.width(12), &c.scalar(0.25), 0.0) >= 38);
    }

    #[test]
    fn norms() {
        let c = ctx();
        let grid = Grid {
            breakpoints: vec![c.zero(), c.scalar(0.5)],
            measure: Measure::Lebesgue,
            inside: vec![true],
        };
        let sqrt2 = c.scalar(2).sqrt();
        assert!(agreeing_digits(&normalize(&grid).norms[0], &sqrt2, 0.0) >= 40);
        let radial = Grid {
            breakpoints: vec![c.one(), c.scalar(2)],
            measure: Measure::RadialR2,
            inside: vec![true],
        };
        let expected = (c.scalar(3) / 7u32).sqrt();
        assert!(agreeing_digits(&normalize(&radial).norms[0], &expected, 0.0) >= 40);
        let h = c.scalar(0.125);
        let origin = Grid {
            breakpoints: vec![c.zero(), h.clone()],
            measure: Measure::RadialR2,
            inside: vec![true],
        };
        let expected = c.scalar(3).sqrt() * h.pow(-1.5f64);
        assert!(agreeing_digits(&normalize(&origin).norms[0], &expected, 0.0) >= 40);
    }

    #[test]
    fn scenario_names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert!("cone3d".parse::<Scenario>().is_err());
    }
}
