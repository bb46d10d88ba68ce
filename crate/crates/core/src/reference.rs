//! Piecewise hold/ramp position reference with analytic derivatives.

use crate::error::ConfigError;

/// Reference value and its first two time derivatives at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceSample {
    pub r: f64,
    pub rdot: f64,
    pub rddot: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentKind {
    /// Constant level.
    Hold { value: f64 },
    /// Linear move from `from` to `to` over the segment's duration.
    Ramp { from: f64, to: f64 },
}

/// One piece of the profile, active from `t_start` until the next segment's
/// start (the last segment runs forever).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub kind: SegmentKind,
}

/// A validated sequence of segments. Evaluation is right-continuous: at a
/// breakpoint the newly started segment wins.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseReference {
    segments: Vec<Segment>,
}

impl Default for PiecewiseReference {
    /// Benchmark profile: hold 1, step up to 1.5 at t = 50, ramp down to 0.5
    /// over t in [90, 110], then hold.
    fn default() -> Self {
        PiecewiseReference::new(vec![
            Segment { t_start: 0.0, kind: SegmentKind::Hold { value: 1.0 } },
            Segment { t_start: 50.0, kind: SegmentKind::Hold { value: 1.5 } },
            Segment { t_start: 90.0, kind: SegmentKind::Ramp { from: 1.5, to: 0.5 } },
            Segment { t_start: 110.0, kind: SegmentKind::Hold { value: 0.5 } },
        ])
        .expect("default profile is well-formed")
    }
}

impl PiecewiseReference {
    /// Checks: non-empty, first segment starts at 0, start times strictly
    /// increasing, and the profile ends on a hold (a trailing ramp would have
    /// no duration to ramp over).
    pub fn new(segments: Vec<Segment>) -> Result<Self, ConfigError> {
        if segments.is_empty() {
            return Err(ConfigError::field("reference", "needs at least one segment"));
        }
        if segments[0].t_start != 0.0 {
            return Err(ConfigError::field(
                "reference[0].t_start",
                "first segment must start at t = 0",
            ));
        }
        for (i, w) in segments.windows(2).enumerate() {
            if !(w[1].t_start.is_finite() && w[1].t_start > w[0].t_start) {
                return Err(ConfigError::field(
                    format!("reference[{}].t_start", i + 1),
                    "segment start times must be finite and strictly increasing",
                ));
            }
        }
        if matches!(segments.last().unwrap().kind, SegmentKind::Ramp { .. }) {
            return Err(ConfigError::field(
                "reference",
                "last segment must be a hold (a final ramp has no end time)",
            ));
        }
        for (i, s) in segments.iter().enumerate() {
            let vals = match s.kind {
                SegmentKind::Hold { value } => vec![value],
                SegmentKind::Ramp { from, to } => vec![from, to],
            };
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(ConfigError::field(
                    format!("reference[{i}]"),
                    "segment levels must be finite",
                ));
            }
        }
        Ok(PiecewiseReference { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Segment start times after t = 0, i.e. the instants where the profile
    /// switches pieces.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().skip(1).map(|s| s.t_start)
    }

    /// Evaluate the profile at `t >= 0` (earlier times clamp to the first
    /// segment).
    pub fn eval(&self, t: f64) -> ReferenceSample {
        let idx = self
            .segments
            .iter()
            .rposition(|s| s.t_start <= t)
            .unwrap_or(0);
        let seg = &self.segments[idx];
        match seg.kind {
            SegmentKind::Hold { value } => ReferenceSample { r: value, rdot: 0.0, rddot: 0.0 },
            SegmentKind::Ramp { from, to } => {
                // Validation guarantees a ramp has a successor.
                let t_end = self.segments[idx + 1].t_start;
                let slope = (to - from) / (t_end - seg.t_start);
                ReferenceSample {
                    r: from + slope * (t - seg.t_start),
                    rdot: slope,
                    rddot: 0.0,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profile_samples() {
        let rf = PiecewiseReference::default();
        assert_eq!(rf.eval(10.0), ReferenceSample { r: 1.0, rdot: 0.0, rddot: 0.0 });
        assert_eq!(rf.eval(100.0), ReferenceSample { r: 1.0, rdot: -0.05, rddot: 0.0 });
        assert_eq!(rf.eval(120.0), ReferenceSample { r: 0.5, rdot: 0.0, rddot: 0.0 });
    }

    #[test]
    fn breakpoints_are_right_continuous() {
        let rf = PiecewiseReference::default();
        assert_eq!(rf.eval(50.0).r, 1.5);
        assert_eq!(rf.eval(90.0).r, 1.5);
        assert_eq!(rf.eval(90.0).rdot, -0.05);
        assert_eq!(rf.eval(110.0).r, 0.5);
        assert_eq!(rf.eval(110.0).rdot, 0.0);
    }

    #[test]
    fn rdot_matches_central_difference_away_from_breakpoints() {
        let rf = PiecewiseReference::default();
        let h = 1e-4;
        let breaks: Vec<f64> = rf.breakpoints().collect();
        let n = (150.0 / h) as u64;
        for k in 1..n {
            let t = k as f64 * h;
            if breaks.iter().any(|b| (t - b).abs() <= h) {
                continue;
            }
            let fd = (rf.eval(t + h).r - rf.eval(t - h).r) / (2.0 * h);
            assert!(
                (fd - rf.eval(t).rdot).abs() <= 1e-8,
                "slope mismatch at t = {t}"
            );
        }
    }

    #[test]
    fn profile_stays_within_segment_levels() {
        let rf = PiecewiseReference::default();
        let h = 1e-3;
        for k in 0..=(150.0 / h) as u64 {
            let r = rf.eval(k as f64 * h).r;
            assert!((0.5..=1.5).contains(&r));
        }
    }

    #[test]
    fn validation_rejects_bad_profiles() {
        let field_of = |e: ConfigError| match e {
            ConfigError::Field { field, .. } => field,
            other => panic!("unexpected error {other:?}"),
        };
        assert_eq!(field_of(PiecewiseReference::new(vec![]).unwrap_err()), "reference");
        let late_start = vec![Segment { t_start: 1.0, kind: SegmentKind::Hold { value: 0.0 } }];
        assert_eq!(
            field_of(PiecewiseReference::new(late_start).unwrap_err()),
            "reference[0].t_start"
        );
        let trailing_ramp = vec![
            Segment { t_start: 0.0, kind: SegmentKind::Hold { value: 0.0 } },
            Segment { t_start: 5.0, kind: SegmentKind::Ramp { from: 0.0, to: 1.0 } },
        ];
        assert_eq!(
            field_of(PiecewiseReference::new(trailing_ramp).unwrap_err()),
            "reference"
        );
        let non_monotone = vec![
            Segment { t_start: 0.0, kind: SegmentKind::Hold { value: 0.0 } },
            Segment { t_start: 5.0, kind: SegmentKind::Hold { value: 1.0 } },
            Segment { t_start: 5.0, kind: SegmentKind::Hold { value: 2.0 } },
        ];
        assert_eq!(
            field_of(PiecewiseReference::new(non_monotone).unwrap_err()),
            "reference[2].t_start"
        );
    }
}
