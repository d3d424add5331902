use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Reusable FFT plans for the YIN difference function at a fixed frame size.
pub struct DifferenceKernel {
    win: usize,
    tau_max: usize,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl DifferenceKernel {
    pub fn new(win: usize, tau_max: usize) -> Self {
        assert!(
            tau_max < win,
            "tau_max {tau_max} must be below the frame length {win}"
        );
        let size = (2 * win - tau_max).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        Self {
            win,
            tau_max,
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    pub fn tau_max(&self) -> usize {
        self.tau_max
    }

    /// `d(tau) = sum_j (x_j - x_{j+tau})^2` for `tau = 0..=tau_max`, summed
    /// over `j < W - tau_max` so every term stays inside the frame.
    pub fn compute(&self, frame: &[f64]) -> Vec<f64> {
        assert_eq!(frame.len(), self.win, "frame length");
        let span = self.win - self.tau_max;

        let mut prefix = Vec::with_capacity(self.win + 1);
        prefix.push(0.0);
        for &x in frame {
            prefix.push(prefix.last().unwrap() + x * x);
        }

        let zero = Complex64::new(0.0, 0.0);
        let mut head = vec![zero; self.size];
        let mut whole = vec![zero; self.size];
        for (j, &x) in frame.iter().enumerate() {
            whole[j] = Complex64::new(x, 0.0);
            if j < span {
                head[j] = whole[j];
            }
        }
        self.forward.process(&mut head);
        self.forward.process(&mut whole);
        for (h, x) in head.iter_mut().zip(&whole) {
            *h = h.conj() * x;
        }
        self.inverse.process(&mut head);

        let head_energy = prefix[span];
        let scale = self.size as f64;
        (0..=self.tau_max)
            .map(|tau| {
                if tau == 0 {
                    return 0.0;
                }
                let cross = head[tau].re / scale;
                let shifted_energy = prefix[tau + span] - prefix[tau];
                (head_energy + shifted_energy - 2.0 * cross).max(0.0)
            })
            .collect()
    }
}

/// One-shot difference function; see [`DifferenceKernel::compute`].
pub fn difference_function(frame: &[f64], tau_max: usize) -> Vec<f64> {
    DifferenceKernel::new(frame.len(), tau_max).compute(frame)
}

/// Cumulative mean normalized difference: `d'(0) = 1`,
/// `d'(tau) = d(tau) * tau / sum_{j=1..=tau} d(j)`, with `0/0 = 1`.
pub fn cmndf(d: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(d.len());
    let mut running = 0.0;
    for (tau, &v) in d.iter().enumerate() {
        if tau == 0 {
            out.push(1.0);
            continue;
        }
        running += v;
        out.push(if running > 0.0 {
            v * tau as f64 / running
        } else {
            1.0
        });
    }
    out
}
