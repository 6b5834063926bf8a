//! Fourier-frequency grids, written `start:stop:count{log|lin}`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: GridSpacing,
}

impl FrequencyGrid {
    pub fn linear(start: f64, stop: f64, count: usize) -> Result<Self> {
        FrequencyGrid {
            start,
            stop,
            count,
            spacing: GridSpacing::Linear,
        }
        .checked()
    }

    pub fn log(start: f64, stop: f64, count: usize) -> Result<Self> {
        FrequencyGrid {
            start,
            stop,
            count,
            spacing: GridSpacing::Logarithmic,
        }
        .checked()
    }

    fn checked(self) -> Result<Self> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Grid("bounds must be finite".into()));
        }
        if self.start < 0.0 {
            return Err(Error::Grid(format!(
                "start must be >= 0, got {}",
                self.start
            )));
        }
        if self.count == 0 {
            return Err(Error::Grid("count must be >= 1".into()));
        }
        if self.count > 1 && self.stop <= self.start {
            return Err(Error::Grid("stop must exceed start".into()));
        }
        if self.spacing == GridSpacing::Logarithmic && self.start <= 0.0 {
            return Err(Error::Grid("log grid needs start > 0".into()));
        }
        Ok(self)
    }

    /// Grid points, strictly increasing. Endpoints are reproduced exactly.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i + 1 == self.count {
                    return self.stop;
                }
                let f = i as f64 / last;
                match self.spacing {
                    GridSpacing::Linear => self.start + f * (self.stop - self.start),
                    GridSpacing::Logarithmic => {
                        (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp()
                    }
                }
            })
            .collect()
    }
}

impl FromStr for FrequencyGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [start, stop, tail] = parts.as_slice() else {
            return Err(Error::Grid(format!(
                "expected start:stop:count(log|lin), got {s:?}"
            )));
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Grid(format!("not a number: {x:?}")))
        };
        let tail = tail.trim();
        let (count, spacing) = if let Some(c) = tail.strip_suffix("log") {
            (c, GridSpacing::Logarithmic)
        } else if let Some(c) = tail.strip_suffix("lin") {
            (c, GridSpacing::Linear)
        } else {
            return Err(Error::Grid(format!(
                "count must end in log or lin, got {tail:?}"
            )));
        };
        let count = count
            .parse::<usize>()
            .map_err(|_| Error::Grid(format!("bad count: {count:?}")))?;
        FrequencyGrid {
            start: num(start)?,
            stop: num(stop)?,
            count,
            spacing,
        }
        .checked()
    }
}

impl fmt::Display for FrequencyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.spacing {
            GridSpacing::Linear => "lin",
            GridSpacing::Logarithmic => "log",
        };
        write!(f, "{}:{}:{}{}", self.start, self.stop, self.count, tag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_log_grid() {
        let g: FrequencyGrid = "0.01:20:200log".parse().unwrap();
        assert_eq!(g.spacing, GridSpacing::Logarithmic);
        let pts = g.points();
        assert_eq!(pts.len(), 200);
        assert_eq!(pts[0], 0.01);
        assert_eq!(pts[199], 20.0);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.to_string().parse::<FrequencyGrid>().unwrap(), g);
    }

    #[test]
    fn parses_linear_grid() {
        let pts = "0:1:5lin".parse::<FrequencyGrid>().unwrap().points();
        assert_eq!(pts, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn rejects_malformed() {
        for s in [
            "0.01:20",
            "0:20:10log",
            "1:0.5:3lin",
            "a:2:3lin",
            "1:2:3",
            "1:2:0lin",
        ] {
            assert!(s.parse::<FrequencyGrid>().is_err(), "{s}");
        }
    }
}
