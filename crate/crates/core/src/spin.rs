use std::fmt;

use serde::{Deserialize, Serialize};

/// Spin projection along a magnet axis; `Up` is deflected towards +z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    pub fn from_sign(x: f64) -> Spin {
        if x >= 0.0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

impl From<Spin> for i8 {
    fn from(s: Spin) -> i8 {
        match s {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }
}

impl TryFrom<i8> for Spin {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Spin::Up),
            -1 => Ok(Spin::Down),
            other => Err(format!("spin must be +1 or -1, got {other}")),
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "+",
            Spin::Down => "-",
        })
    }
}

/// One ±1 value per particle.
pub type Pattern = Vec<Spin>;

/// Product of the signs in a pattern, ±1.
pub fn pattern_product(p: &[Spin]) -> i8 {
    p.iter()
        .fold(1i8, |acc, s| if *s == Spin::Down { -acc } else { acc })
}

pub fn pattern_label(p: &[Spin]) -> String {
    p.iter().map(|s| s.to_string()).collect()
}

/// All 2^n patterns in lexicographic order (Down < Up).
pub fn all_patterns(n: usize) -> Vec<Pattern> {
    (0..1usize << n)
        .map(|bits| {
            (0..n)
                .map(|i| {
                    if bits >> (n - 1 - i) & 1 == 1 {
                        Spin::Up
                    } else {
                        Spin::Down
                    }
                })
                .collect()
        })
        .collect()
}
