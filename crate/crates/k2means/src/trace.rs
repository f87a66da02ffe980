//! Convergence traces: (iteration, cumulative ops, exact energy) samples.

/// One trace sample, taken at the end of an iteration (sample 0 is the state
/// right after initialization). Ops are cumulative counter totals including
/// initialization; energy is the exact, uncounted clustering energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub iteration: usize,
    pub ops: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub samples: Vec<TraceSample>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, iteration: usize, ops: f64, energy: f64) {
        self.samples.push(TraceSample { iteration, ops, energy });
    }

    pub fn last_energy(&self) -> Option<f64> {
        self.samples.last().map(|s| s.energy)
    }

    /// True if energies never increase beyond `rel_slack` relative tolerance.
    pub fn is_monotone(&self, rel_slack: f64) -> bool {
        self.samples.windows(2).all(|w| {
            w[1].energy <= w[0].energy * (1.0 + rel_slack) + rel_slack
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_detection() {
        let mut t = Trace::new();
        t.push(0, 10.0, 100.0);
        t.push(1, 20.0, 50.0);
        t.push(2, 30.0, 50.0);
        assert!(t.is_monotone(1e-9));
        t.push(3, 40.0, 51.0);
        assert!(!t.is_monotone(1e-9));
    }
}
