use super::candidates::CandidateLattice;
use super::PitchConfig;

/// Pitch HMM over `n` log-spaced bins, each present as a voiced and an
/// unvoiced state. States `0..n` are voiced, `n..2n` unvoiced.
#[derive(Debug, Clone)]
pub struct PitchHmm {
    bins: usize,
    f_min: f64,
    bins_per_octave: f64,
    half_width: usize,
    /// `ln` of the row-normalized triangular kernel, indexed by
    /// `[source * bins + target]`; `-inf` outside the band.
    log_kernel: Vec<f64>,
    log_stay: f64,
    log_switch: f64,
    /// Frame-major `ln` emissions, `2 * bins` per frame.
    log_emission: Vec<f64>,
    frames: usize,
}

/// Number of pitch bins spanning `[f_min, f_max]`.
pub fn bin_count(config: &PitchConfig) -> usize {
    let per_octave = 12.0 * config.bins_per_semitone as f64;
    (per_octave * (config.f_max / config.f_min).log2()).floor() as usize + 1
}

impl PitchHmm {
    pub fn new(lattice: &CandidateLattice, config: &PitchConfig) -> Self {
        let bins = bin_count(config);
        let bins_per_octave = 12.0 * config.bins_per_semitone as f64;
        let half_width = config.max_semitones_per_frame * config.bins_per_semitone;

        let tri = |d: usize| -> f64 {
            if d > half_width {
                0.0
            } else {
                1.0 - d as f64 / (half_width as f64 + 1.0)
            }
        };
        let mut log_kernel = vec![f64::NEG_INFINITY; bins * bins];
        for i in 0..bins {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width).min(bins - 1);
            let total: f64 = (lo..=hi).map(|j| tri(i.abs_diff(j))).sum();
            for j in lo..=hi {
                log_kernel[i * bins + j] = (tri(i.abs_diff(j)) / total).ln();
            }
        }

        let mut hmm = Self {
            bins,
            f_min: config.f_min,
            bins_per_octave,
            half_width,
            log_kernel,
            log_stay: (1.0 - config.switch_prob).ln(),
            log_switch: config.switch_prob.ln(),
            log_emission: Vec::with_capacity(lattice.len() * 2 * bins),
            frames: lattice.len(),
        };
        for frame in &lattice.frames {
            let mut voiced = vec![0.0; bins];
            for c in &frame.candidates {
                voiced[hmm.nearest_bin(c.frequency)] += c.probability;
            }
            let unvoiced = (1.0 - frame.voiced_mass()).max(0.0) / bins as f64;
            hmm.log_emission.extend(voiced.iter().map(|p| p.ln()));
            hmm.log_emission
                .extend(std::iter::repeat_n(unvoiced.ln(), bins));
        }
        hmm
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn states(&self) -> usize {
        2 * self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bin_frequency(&self, bin: usize) -> f64 {
        self.f_min * (bin as f64 / self.bins_per_octave).exp2()
    }

    pub fn nearest_bin(&self, frequency: f64) -> usize {
        let pos = self.bins_per_octave * (frequency / self.f_min).log2();
        (pos.round().max(0.0) as usize).min(self.bins - 1)
    }

    pub fn is_voiced(&self, state: usize) -> bool {
        state < self.bins
    }

    pub fn log_initial(&self, _state: usize) -> f64 {
        -(self.states() as f64).ln()
    }

    pub fn log_transition(&self, from: usize, to: usize) -> f64 {
        let (fb, tb) = (from % self.bins, to % self.bins);
        let voicing = if self.is_voiced(from) == self.is_voiced(to) {
            self.log_stay
        } else {
            self.log_switch
        };
        self.log_kernel[fb * self.bins + tb] + voicing
    }

    pub fn log_emission(&self, frame: usize, state: usize) -> f64 {
        self.log_emission[frame * self.states() + state]
    }

    /// Max-product Viterbi in log space. Ties resolve to the lowest state
    /// index. Returns an empty path for an empty lattice.
    pub fn decode(&self) -> Vec<usize> {
        if self.frames == 0 {
            return Vec::new();
        }
        let s = self.states();
        let n = self.bins;
        let mut score: Vec<f64> = (0..s)
            .map(|q| self.log_initial(q) + self.log_emission(0, q))
            .collect();
        let mut back = vec![0u32; self.frames * s];
        let mut next = vec![0.0; s];

        for m in 1..self.frames {
            for to in 0..s {
                let tb = to % n;
                let lo = tb.saturating_sub(self.half_width);
                let hi = (tb + self.half_width).min(n - 1);
                let mut best = f64::NEG_INFINITY;
                let mut arg = lo;
                // Source order 0..s keeps the lowest-index tie-break.
                for base in [0, n] {
                    for fb in lo..=hi {
                        let from = base + fb;
                        let v = score[from] + self.log_transition(from, to);
                        if v > best {
                            best = v;
                            arg = from;
                        }
                    }
                }
                next[to] = best + self.log_emission(m, to);
                back[m * s + to] = arg as u32;
            }
            std::mem::swap(&mut score, &mut next);
        }

        let mut state = (0..s)
            .fold((0, f64::NEG_INFINITY), |(arg, best), q| {
                if score[q] > best {
                    (q, score[q])
                } else {
                    (arg, best)
                }
            })
            .0;
        let mut path = vec![0; self.frames];
        for m in (0..self.frames).rev() {
            path[m] = state;
            if m > 0 {
                state = back[m * s + state] as usize;
            }
        }
        path
    }

    /// Log probability of a full state path.
    pub fn path_log_prob(&self, path: &[usize]) -> f64 {
        let Some(&first) = path.first() else {
            return f64::NEG_INFINITY;
        };
        let mut total = self.log_initial(first) + self.log_emission(0, first);
        for (m, pair) in path.windows(2).enumerate() {
            total += self.log_transition(pair[0], pair[1]) + self.log_emission(m + 1, pair[1]);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::super::candidates::{Candidate, FrameCandidates};
    use super::*;

    fn tiny_config() -> PitchConfig {
        PitchConfig {
            f_min: 100.0,
            f_max: 120.0,
            bins_per_semitone: 1,
            max_semitones_per_frame: 1,
            ..PitchConfig::default()
        }
    }

    #[test]
    fn default_bin_count() {
        // 120 bins per octave over log2(2093 / 65) octaves.
        assert_eq!(bin_count(&PitchConfig::default()), 602);
        assert_eq!(bin_count(&tiny_config()), 4);
    }

    #[test]
    fn transitions_are_row_stochastic() {
        let lattice = CandidateLattice {
            frame_times: vec![0.0],
            frames: vec![FrameCandidates::unvoiced_frame()],
        };
        for config in [tiny_config(), PitchConfig::default()] {
            let hmm = PitchHmm::new(&lattice, &config);
            for from in (0..hmm.states()).step_by(37.min(hmm.states() / 2).max(1)) {
                let total: f64 = (0..hmm.states())
                    .map(|to| hmm.log_transition(from, to).exp())
                    .sum();
                assert!((total - 1.0).abs() < 1e-12, "row {from}: {total}");
            }
        }
    }

    #[test]
    fn all_unvoiced_lattice_decodes_unvoiced() {
        let lattice = CandidateLattice {
            frame_times: (0..6).map(f64::from).collect(),
            frames: vec![FrameCandidates::unvoiced_frame(); 6],
        };
        let hmm = PitchHmm::new(&lattice, &tiny_config());
        assert!(hmm.decode().iter().all(|&q| !hmm.is_voiced(q)));
    }

    #[test]
    fn follows_adjacent_single_candidates() {
        let config = tiny_config();
        let frame = |f: f64| FrameCandidates {
            candidates: vec![Candidate {
                frequency: f,
                probability: 0.95,
            }],
            unvoiced: 0.05,
        };
        let lattice = CandidateLattice {
            frame_times: vec![0.0, 1.0],
            frames: vec![frame(100.0), frame(100.0 * 2f64.powf(1.0 / 12.0))],
        };
        let hmm = PitchHmm::new(&lattice, &config);
        assert_eq!(hmm.decode(), vec![0, 1]);
    }
}
