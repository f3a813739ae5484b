use std::collections::VecDeque;

/// The most recent prediction variances, capacity `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceHistory {
    values: VecDeque<f64>,
    capacity: usize,
}

impl VarianceHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            values: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn from_values(capacity: usize, values: &[f64]) -> Self {
        let mut h = Self::new(capacity);
        for &v in values {
            h.push(v);
        }
        h
    }

    pub fn push(&mut self, v: f64) {
        if self.values.len() == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(v);
    }

    pub fn is_full(&self) -> bool {
        self.values.len() == self.capacity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }

    /// `mean + o * std` (population std) of the stored values.
    pub fn threshold(&self, o: f64) -> f64 {
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        mean + o * var.sqrt()
    }
}

/// Whether `variance` is unusually high given the history. Until the history
/// is full every minute counts as an outlier. The variance is recorded after
/// the check, evicting the oldest entry.
pub fn is_outlier(history: &mut VarianceHistory, variance: f64, o: f64) -> bool {
    let outlier = !history.is_full() || variance > history.threshold(o);
    history.push(variance);
    outlier
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spread_history() {
        let mut h = VarianceHistory::from_values(5, &[1.0; 5]);
        assert!(!is_outlier(&mut h, 1.0, 3.0));
        let mut h = VarianceHistory::from_values(5, &[1.0; 5]);
        assert!(is_outlier(&mut h, 1.1, 3.0));
    }

    #[test]
    fn cold_start_always_queries() {
        let mut h = VarianceHistory::from_values(5, &[1.0, 2.0, 3.0]);
        assert!(is_outlier(&mut h, 0.0, 3.0));
        assert_eq!(h.len(), 4);
    }

    #[test]
    fn appends_and_evicts() {
        let mut h = VarianceHistory::from_values(3, &[1.0, 2.0, 3.0]);
        // mean 2, std sqrt(2/3); 2 + 1*0.816 = 2.816 < 3
        assert!(is_outlier(&mut h, 3.0, 1.0));
        assert_eq!(h.values().collect::<Vec<_>>(), vec![2.0, 3.0, 3.0]);
        assert!(!is_outlier(&mut h, 3.0, 1.0));
    }

    #[test]
    fn threshold_is_strict() {
        let vals = [0.0, 2.0, 0.0, 2.0];
        let h = VarianceHistory::from_values(4, &vals);
        assert_eq!(h.threshold(1.0), 2.0);
        let mut h2 = h.clone();
        assert!(!is_outlier(&mut h2, 2.0, 1.0));
    }
}
