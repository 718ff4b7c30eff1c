//! Time series of the kinetic entropy and its dissipation integrals.

use crate::error::{Error, Result};

/// One recorded instant of the entropy balance.
#[derive(Debug, Clone, Copy)]
pub struct LedgerRow {
    pub time: f64,
    pub entropy: f64,
    /// Instantaneous dissipation values at `time`.
    pub d1: f64,
    pub d2_tilde: f64,
    pub d2: f64,
    /// Trapezoid cumulative integrals from the first recorded time.
    pub cum_d1: f64,
    pub cum_d2_tilde: f64,
    pub cum_d2: f64,
}

/// Running record of `F(t)` and the cumulative dissipation integrals
/// `int D1`, `int D2~` and `int D2`, accumulated by the trapezoid rule.
///
/// Rows must be appended in strictly increasing time order with nonnegative
/// entropy and dissipation values, so the cumulative columns are
/// nondecreasing by construction.
#[derive(Debug, Clone, Default)]
pub struct EntropyLedger {
    rows: Vec<LedgerRow>,
}

impl EntropyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends one sample of the entropy balance at time `t`.
    pub fn record(&mut self, time: f64, entropy: f64, d1: f64, d2_tilde: f64, d2: f64) -> Result<()> {
        for (name, v) in [
            ("time", time),
            ("entropy", entropy),
            ("d1", d1),
            ("d2_tilde", d2_tilde),
            ("d2", d2),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("ledger {name} must be finite")));
            }
        }
        if entropy < 0.0 || d1 < 0.0 || d2_tilde < 0.0 || d2 < 0.0 {
            return Err(Error::InvalidConfig(
                "ledger entropy and dissipation values must be nonnegative".into(),
            ));
        }
        let row = match self.rows.last() {
            None => LedgerRow {
                time,
                entropy,
                d1,
                d2_tilde,
                d2,
                cum_d1: 0.0,
                cum_d2_tilde: 0.0,
                cum_d2: 0.0,
            },
            Some(prev) => {
                if time <= prev.time {
                    return Err(Error::InvalidConfig(format!(
                        "ledger times must increase: {} after {}",
                        time, prev.time
                    )));
                }
                let half_dt = 0.5 * (time - prev.time);
                LedgerRow {
                    time,
                    entropy,
                    d1,
                    d2_tilde,
                    d2,
                    cum_d1: prev.cum_d1 + half_dt * (prev.d1 + d1),
                    cum_d2_tilde: prev.cum_d2_tilde + half_dt * (prev.d2_tilde + d2_tilde),
                    cum_d2: prev.cum_d2 + half_dt * (prev.d2 + d2),
                }
            }
        };
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Entropy at the first recorded time (0 for an empty ledger).
    pub fn initial_entropy(&self) -> f64 {
        self.rows.first().map_or(0.0, |r| r.entropy)
    }
}

/// Worst-case entropy-inequality residual along the ledger:
/// the minimum over recorded times of
/// `F(0) - [F(t) + (1/epsilon) int_0^t D1 + int_0^t D2~]`.
///
/// The continuum theory makes this nonnegative (the ledger integrates the
/// smaller hydrodynamic dissipation `D2~`, so there is slack); a discrete run
/// only pays quadrature error of order `dt`.  `epsilon = inf` drops the
/// relaxation term.
pub fn entropy_inequality_margin(ledger: &EntropyLedger, epsilon: f64) -> f64 {
    let Some(first) = ledger.rows().first() else {
        return 0.0;
    };
    let inv_eps = if epsilon.is_infinite() { 0.0 } else { 1.0 / epsilon };
    ledger
        .rows()
        .iter()
        .map(|r| first.entropy - (r.entropy + inv_eps * r.cum_d1 + r.cum_d2_tilde))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_gives_zero_margin() {
        let mut ledger = EntropyLedger::new();
        ledger.record(0.0, 2.0, 0.3, 0.1, 0.2).unwrap();
        assert_eq!(entropy_inequality_margin(&ledger, 0.1), 0.0);
        assert_eq!(ledger.initial_entropy(), 2.0);
    }

    #[test]
    fn monokinetic_aligned_data_stay_at_zero_margin() {
        let mut ledger = EntropyLedger::new();
        for k in 0..50 {
            ledger.record(k as f64 * 0.01, 0.125, 0.0, 0.0, 0.0).unwrap();
        }
        assert_eq!(entropy_inequality_margin(&ledger, 0.05), 0.0);
    }

    #[test]
    fn trapezoid_accumulation_matches_a_hand_sum() {
        let mut ledger = EntropyLedger::new();
        ledger.record(0.0, 1.0, 2.0, 1.0, 1.5).unwrap();
        ledger.record(0.5, 0.8, 1.0, 0.5, 0.75).unwrap();
        ledger.record(1.0, 0.7, 0.0, 0.0, 0.0).unwrap();
        let last = *ledger.rows().last().unwrap();
        assert!((last.cum_d1 - (0.75 + 0.25)).abs() < 1e-15);
        assert!((last.cum_d2_tilde - (0.375 + 0.125)).abs() < 1e-15);
        assert!((last.cum_d2 - (0.5625 + 0.1875)).abs() < 1e-15);
        // Cumulative columns never decrease.
        for pair in ledger.rows().windows(2) {
            assert!(pair[1].cum_d1 >= pair[0].cum_d1);
            assert!(pair[1].cum_d2_tilde >= pair[0].cum_d2_tilde);
            assert!(pair[1].cum_d2 >= pair[0].cum_d2);
        }
    }

    #[test]
    fn margin_uses_the_relaxation_term_only_for_finite_epsilon() {
        let mut ledger = EntropyLedger::new();
        ledger.record(0.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        ledger.record(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        // With epsilon = 0.5 the D1 integral (value 1) is doubled.
        assert!((entropy_inequality_margin(&ledger, 0.5) + 2.0).abs() < 1e-15);
        assert_eq!(entropy_inequality_margin(&ledger, f64::INFINITY), 0.0);
    }

    #[test]
    fn rejects_bad_rows() {
        let mut ledger = EntropyLedger::new();
        ledger.record(0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(ledger.record(0.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ledger.record(1.0, -1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ledger.record(1.0, 1.0, f64::NAN, 0.0, 0.0).is_err());
        assert!(ledger.record(1.0, 1.0, 0.0, -0.1, 0.0).is_err());
    }
}
