/// Dead band for lap and sign counting.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LapConfig {
    /// `None` means `10 * eps * max|samples|`.
    pub hysteresis: Option<f64>,
}

impl LapConfig {
    pub fn fixed(hysteresis: f64) -> Self {
        Self {
            hysteresis: Some(hysteresis.max(0.0)),
        }
    }

    fn band(&self, samples: &[f64]) -> f64 {
        self.hysteresis
            .unwrap_or_else(|| 10.0 * f64::EPSILON * samples.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }
}

/// Number of direction reversals; moves smaller than the hysteresis are not
/// reversals. Monotone and constant data give 0.
pub fn lap_number(samples: &[f64], cfg: &LapConfig) -> usize {
    if samples.len() < 3 {
        return 0;
    }
    let band = cfg.band(samples);
    let mut dir = 0i8;
    let (mut lo, mut hi) = (samples[0], samples[0]);
    let mut extreme = samples[0];
    let mut count = 0;
    for &x in &samples[1..] {
        match dir {
            0 => {
                lo = lo.min(x);
                hi = hi.max(x);
                if x - lo > band {
                    dir = 1;
                    extreme = x;
                } else if hi - x > band {
                    dir = -1;
                    extreme = x;
                }
            }
            1 => {
                if x > extreme {
                    extreme = x;
                } else if extreme - x > band {
                    count += 1;
                    dir = -1;
                    extreme = x;
                }
            }
            _ => {
                if x < extreme {
                    extreme = x;
                } else if x - extreme > band {
                    count += 1;
                    dir = 1;
                    extreme = x;
                }
            }
        }
    }
    count
}

/// Transitions between values above `+hysteresis` and below `-hysteresis`.
pub fn sign_changes(samples: &[f64], cfg: &LapConfig) -> usize {
    let band = cfg.band(samples);
    let mut prev = 0i8;
    let mut count = 0;
    for &x in samples {
        let s = if x > band {
            1
        } else if x < -band {
            -1
        } else {
            continue;
        };
        if prev != 0 && s != prev {
            count += 1;
        }
        prev = s;
    }
    count
}
