use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One piece of a piecewise-constant drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub dt: f64,
    pub alpha: f64,
}

/// A piecewise-constant schedule for `alpha(t)`. The battery Hamiltonian
/// is `H(0)` before the first segment and after the last one; changes of
/// `alpha` between segments are sudden quenches.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Protocol {
    pub segments: Vec<Segment>,
}

impl Protocol {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let p = Self { segments };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, s) in self.segments.iter().enumerate() {
            if !(s.dt > 0.0) || !s.dt.is_finite() {
                return Err(Error::InvalidParameter(format!("segment {k}: duration {}", s.dt)));
            }
            if !(0.0..=1.0).contains(&s.alpha) {
                return Err(Error::InvalidParameter(format!("segment {k}: alpha {} outside [0, 1]", s.alpha)));
            }
        }
        Ok(())
    }

    /// `n` equal segments at a fixed `alpha`.
    pub fn constant(alpha: f64, total: f64, n: usize) -> Result<Self> {
        Self::from_alphas(&vec![alpha; n.max(1)], total)
    }

    /// Equal-length segments with the given `alpha` values.
    pub fn from_alphas(alphas: &[f64], total: f64) -> Result<Self> {
        let dt = total / alphas.len() as f64;
        Self::new(alphas.iter().map(|&alpha| Segment { dt, alpha }).collect())
    }

    /// `alpha = 1` on `[0, t_d)`, then `alpha = 0` until `total`.
    pub fn double_quench(t_d: f64, total: f64) -> Result<Self> {
        let mut segments = Vec::new();
        let on = t_d.min(total);
        if on > 0.0 {
            segments.push(Segment { dt: on, alpha: 1.0 });
        }
        if total > on {
            segments.push(Segment { dt: total - on, alpha: 0.0 });
        }
        Self::new(segments)
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.dt).sum()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.alpha).collect()
    }

    pub fn final_alpha(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.alpha)
    }

    /// Appends an undriven tail so the schedule ends at `total`.
    pub fn extended_to(&self, total: f64) -> Result<Self> {
        let mut p = self.clone();
        let extra = total - self.total_time();
        if extra > 1e-12 {
            p.segments.push(Segment { dt: extra, alpha: 0.0 });
        }
        p.validate()?;
        Ok(p)
    }

    /// Merges neighbouring segments with equal `alpha`.
    pub fn compacted(&self) -> Self {
        let mut out: Vec<Segment> = Vec::new();
        for s in &self.segments {
            match out.last_mut() {
                Some(last) if last.alpha == s.alpha => last.dt += s.dt,
                _ => out.push(*s),
            }
        }
        Self { segments: out }
    }

    /// Time at which `alpha` first drops below one half after having been above it.
    pub fn switch_time(&self) -> Option<f64> {
        let mut t = 0.0;
        let mut was_on = false;
        for s in &self.segments {
            if s.alpha >= 0.5 {
                was_on = true;
            } else if was_on {
                return Some(t);
            }
            t += s.dt;
        }
        None
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}
