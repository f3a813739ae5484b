use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::AxisWindow;

/// Total one-sided power below which spectral entropy is defined as 0.
const POWER_GUARD: f64 = 1e-12;

/// Power spectrum of a raw (not mean-removed) window.
///
/// Keeps the planner and buffers between calls. After [`Spectrum::compute`],
/// `power[k] = |X_k|^2` for the full two-sided unnormalised DFT.
pub struct Spectrum {
    planner: FftPlanner<f64>,
    plan: Option<Arc<dyn Fft<f64>>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    power: Vec<f64>,
}

impl Default for Spectrum {
    fn default() -> Self {
        Self::new()
    }
}

impl Spectrum {
    pub fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
            plan: None,
            buf: Vec::new(),
            scratch: Vec::new(),
            power: Vec::new(),
        }
    }

    pub fn compute(&mut self, samples: &[f64]) {
        let m = samples.len();
        let plan = match &self.plan {
            Some(p) if p.len() == m => Arc::clone(p),
            _ => {
                let p = self.planner.plan_fft_forward(m);
                self.plan = Some(Arc::clone(&p));
                p
            }
        };
        self.buf.clear();
        self.buf.extend(samples.iter().map(|&v| Complex::new(v, 0.0)));
        self.scratch
            .resize(plan.get_inplace_scratch_len(), Complex::new(0.0, 0.0));
        plan.process_with_scratch(&mut self.buf, &mut self.scratch);
        self.power.clear();
        self.power.extend(self.buf.iter().map(|c| c.norm_sqr()));
    }

    /// Two-sided `|X_k|^2`, k = 0..M.
    pub fn power(&self) -> &[f64] {
        &self.power
    }

    /// `(1/M) * sum_k |X_k|^2`.
    pub fn energy(&self) -> f64 {
        self.power.iter().sum::<f64>() / self.power.len() as f64
    }

    /// Shannon entropy (nats) of the normalised one-sided power, bins
    /// 0..=floor(M/2), DC included.
    pub fn entropy(&self) -> f64 {
        let one_sided = &self.power[..self.power.len() / 2 + 1];
        let total: f64 = one_sided.iter().sum();
        if total < POWER_GUARD {
            return 0.0;
        }
        let h: f64 = one_sided
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| {
                let q = p / total;
                q * q.ln()
            })
            .sum();
        // rounding can leave a -0.0 or a tiny negative for single-bin spectra
        (-h).max(0.0)
    }
}

pub fn spectral_energy(w: AxisWindow<'_>) -> f64 {
    let mut s = Spectrum::new();
    s.compute(w.samples());
    s.energy()
}

pub fn spectral_entropy(w: AxisWindow<'_>) -> f64 {
    let mut s = Spectrum::new();
    s.compute(w.samples());
    s.entropy()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win(v: &[f64]) -> AxisWindow<'_> {
        AxisWindow::new(v).unwrap()
    }

    #[test]
    fn energy_examples() {
        assert!((spectral_energy(win(&[1.0, 0.0, 0.0, 0.0])) - 1.0).abs() < 1e-15);
        assert!((spectral_energy(win(&[0.5; 50])) - 12.5).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(spectral_entropy(win(&[0.3; 16])), 0.0);
        // DC and Nyquist carry equal power, every other bin is empty
        let two_bins = [2.0, 0.0, 2.0, 0.0];
        assert!((spectral_entropy(win(&two_bins)) - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(spectral_entropy(win(&[0.0; 8])), 0.0);
    }

    #[test]
    fn entropy_upper_bound_for_impulse() {
        // an impulse has a flat spectrum: entropy = ln(floor(M/2)+1)
        let mut v = vec![0.0; 10];
        v[0] = 1.0;
        assert!((spectral_entropy(win(&v)) - 6f64.ln()).abs() < 1e-12);
    }
}
