//! Piecewise-linear computation load of semantic extraction and the
//! compression power it implies.

use crate::error::{Error, Result};

/// Slack when mapping a power back onto a segment's ratio range.
const SEGMENT_TOL: f64 = 1e-12;

/// One linear piece `c(ρ) = slope·ρ + intercept` valid from `lower_break`
/// up to the previous segment's break (or 1 for the first segment).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadSegment {
    pub slope: f64,
    pub intercept: f64,
    pub lower_break: f64,
}

impl LoadSegment {
    pub fn new(slope: f64, intercept: f64, lower_break: f64) -> Self {
        Self {
            slope,
            intercept,
            lower_break,
        }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.slope * rho + self.intercept
    }
}

/// 1-based index of the active load segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegmentIndicator(usize);

impl SegmentIndicator {
    pub fn new(s: usize, model: &LoadModel) -> Result<Self> {
        if s < 1 || s > model.len() {
            return Err(Error::IndexOutOfRange {
                what: "segment",
                index: s,
                max: model.len(),
            });
        }
        Ok(Self(s))
    }

    pub fn index(self) -> usize {
        self.0
    }
}

/// Closed interval of admissible transmit powers; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerInterval {
    pub lo: f64,
    pub hi: f64,
}

impl PowerInterval {
    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.lo && p <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn intersect(&self, lo: f64, hi: f64) -> Self {
        Self {
            lo: self.lo.max(lo),
            hi: self.hi.min(hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadModel {
    segments: Vec<LoadSegment>,
}

impl Default for LoadModel {
    /// Three continuous segments anchored at `c(1) = 0`.
    fn default() -> Self {
        Self::new(vec![
            LoadSegment::new(-0.5, 0.5, 0.7),
            LoadSegment::new(-1.0, 0.85, 0.4),
            LoadSegment::new(-2.0, 1.25, 0.2),
        ])
        .expect("default load model is valid")
    }
}

impl LoadModel {
    pub fn new(segments: Vec<LoadSegment>) -> Result<Self> {
        let fail = |msg: String| Err(Error::LoadModel(msg));
        if segments.is_empty() {
            return fail("at least one segment is required".into());
        }
        for (i, seg) in segments.iter().enumerate() {
            let s = i + 1;
            if !(seg.slope.is_finite() && seg.intercept.is_finite() && seg.lower_break.is_finite()) {
                return fail(format!("segment {s} has non-finite parameters"));
            }
            if !(seg.slope < 0.0) {
                return fail(format!("slope ordering 0 > A_1 violated: A_{s} = {}", seg.slope));
            }
            if !(seg.lower_break > 0.0 && seg.lower_break <= 1.0) {
                return fail(format!(
                    "breakpoint ordering 0 < D_{s} <= 1 violated: D_{s} = {}",
                    seg.lower_break
                ));
            }
        }
        for (i, w) in segments.windows(2).enumerate() {
            let (s, t) = (i + 1, i + 2);
            if !(w[1].slope < w[0].slope) {
                return fail(format!(
                    "slope ordering A_{s} > A_{t} violated: {} <= {}",
                    w[0].slope, w[1].slope
                ));
            }
            if !(w[1].lower_break < w[0].lower_break) {
                return fail(format!(
                    "breakpoint ordering D_{t} < D_{s} violated: {} >= {}",
                    w[1].lower_break, w[0].lower_break
                ));
            }
        }
        let model = Self { segments };
        for s in 1..=model.len() {
            let seg = model.segments[s - 1];
            // Linear and decreasing: the minimum sits at the upper end.
            let c_hi = seg.eval(model.upper_break(s));
            if c_hi < 0.0 {
                return fail(format!("nonnegative load violated: c({}) = {c_hi} on segment {s}", model.upper_break(s)));
            }
        }
        Ok(model)
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segments(&self) -> &[LoadSegment] {
        &self.segments
    }

    pub fn segment(&self, s: SegmentIndicator) -> &LoadSegment {
        &self.segments[s.index() - 1]
    }

    pub fn indicators(&self) -> impl Iterator<Item = SegmentIndicator> {
        (1..=self.len()).map(SegmentIndicator)
    }

    /// `D_s`.
    pub fn lower_break(&self, s: usize) -> f64 {
        self.segments[s - 1].lower_break
    }

    /// `D_{s-1}`, with `D_0 = 1`.
    pub fn upper_break(&self, s: usize) -> f64 {
        if s == 1 {
            1.0
        } else {
            self.segments[s - 2].lower_break
        }
    }

    /// Smallest admissible compression ratio `D_S`.
    pub fn min_ratio(&self) -> f64 {
        self.segments.last().map(|s| s.lower_break).unwrap_or(1.0)
    }

    /// Segment whose range contains `rho`.
    pub fn segment_of(&self, rho: f64) -> Result<SegmentIndicator> {
        if !(rho >= self.min_ratio() && rho <= 1.0) {
            return Err(Error::OutsideLoadDomain {
                rho,
                lo: self.min_ratio(),
            });
        }
        let s = self
            .segments
            .iter()
            .position(|seg| rho >= seg.lower_break)
            .expect("rho >= D_S");
        Ok(SegmentIndicator(s + 1))
    }
}

/// Computation load `c(ρ)`.
pub fn load(rho: f64, model: &LoadModel) -> Result<f64> {
    let s = model.segment_of(rho)?;
    Ok(model.segment(s).eval(rho))
}

/// Compression power `c(ρ)·p0` in milliwatts.
pub fn compression_power(rho: f64, model: &LoadModel, p0: f64) -> Result<f64> {
    Ok(load(rho, model)? * p0)
}

/// Inverts [`compression_power`] on segment `s`.
pub fn rho_from_power(p_c: f64, s: SegmentIndicator, model: &LoadModel, p0: f64) -> Result<f64> {
    let seg = model.segment(s);
    let rho = (p_c / p0 - seg.intercept) / seg.slope;
    let (lo, hi) = (model.lower_break(s.index()), model.upper_break(s.index()));
    if !(p_c >= 0.0) || !(rho >= lo - SEGMENT_TOL && rho <= hi + SEGMENT_TOL) {
        return Err(Error::InfeasiblePairing {
            p_c,
            segment: s.index(),
            rho,
            lo,
            hi,
        });
    }
    Ok(rho.clamp(lo, hi))
}

/// Range of `tr(Q)` compatible with segment `s` being active under the
/// budget `p_max`.
pub fn segment_trace_bounds(s: SegmentIndicator, model: &LoadModel, p_max: f64, p0: f64) -> PowerInterval {
    let seg = model.segment(s);
    let lo = p_max - seg.eval(model.lower_break(s.index())) * p0;
    let hi = p_max - seg.eval(model.upper_break(s.index())) * p0;
    PowerInterval { lo: lo.max(0.0), hi }
}
