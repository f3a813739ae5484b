use serde::{Deserialize, Serialize};

/// Abstract energy costs of the two sensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    pub accel_cost_per_minute: f64,
    pub ppg_cost_per_query: f64,
}

impl Default for EnergyModel {
    /// Optical heart-rate sensing costs 5000x the accelerometer.
    fn default() -> Self {
        Self {
            accel_cost_per_minute: 1.0,
            ppg_cost_per_query: 5000.0,
        }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("accel_cost_per_minute", self.accel_cost_per_minute),
            ("ppg_cost_per_query", self.ppg_cost_per_query),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be finite and > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub minutes_sensed: u64,
    pub queries: u64,
    pub accel_energy: f64,
    pub ppg_energy: f64,
    pub total: f64,
    /// `1 - total / (cost of measuring heart rate every minute)`.
    pub savings_vs_always_query: f64,
}

impl EnergyLedger {
    pub fn new(model: &EnergyModel, minutes_sensed: u64, queries: u64) -> Self {
        let m = minutes_sensed as f64;
        let accel_energy = model.accel_cost_per_minute * m;
        let ppg_energy = model.ppg_cost_per_query * queries as f64;
        let total = accel_energy + ppg_energy;
        let always = accel_energy + model.ppg_cost_per_query * m;
        Self {
            minutes_sensed,
            queries,
            accel_energy,
            ppg_energy,
            total,
            savings_vs_always_query: if always > 0.0 { 1.0 - total / always } else { 0.0 },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ledger serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ratio_arithmetic() {
        let l = EnergyLedger::new(&EnergyModel::default(), 100, 10);
        assert_eq!(l.accel_energy, 100.0);
        assert_eq!(l.ppg_energy, 50_000.0);
        assert_eq!(l.total, 50_100.0);
        assert_eq!(l.savings_vs_always_query, 1.0 - 50_100.0 / 500_100.0);
        assert!((l.savings_vs_always_query - 0.8998).abs() < 1e-4);
    }

    #[test]
    fn degenerate_cases() {
        let m = EnergyModel::default();
        assert_eq!(EnergyLedger::new(&m, 0, 0).savings_vs_always_query, 0.0);
        assert_eq!(EnergyLedger::new(&m, 10, 10).savings_vs_always_query, 0.0);
        assert!(EnergyModel { accel_cost_per_minute: 0.0, ..m }.validate().is_err());
    }
}
