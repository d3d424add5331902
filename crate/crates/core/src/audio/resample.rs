use std::f64::consts::PI;

use super::AudioBuffer;

pub const KAISER_BETA: f64 = 12.0;
pub const TAPS_PER_SIDE: usize = 64;

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

struct SincKernel {
    /// Cutoff in cycles per input sample.
    cutoff: f64,
    i0_beta: f64,
}

impl SincKernel {
    fn new(source_rate: u32, target_rate: u32) -> Self {
        let nyquist = source_rate.min(target_rate) as f64 / 2.0;
        Self {
            cutoff: nyquist / source_rate as f64,
            i0_beta: bessel_i0(KAISER_BETA),
        }
    }

    /// Kernel value at a distance of `d` input samples.
    fn at(&self, d: f64) -> f64 {
        let r = d / TAPS_PER_SIDE as f64;
        if r.abs() >= 1.0 {
            return 0.0;
        }
        let window = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / self.i0_beta;
        2.0 * self.cutoff * sinc(2.0 * self.cutoff * d) * window
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Resamples one channel with a Kaiser-windowed sinc kernel. Samples outside
/// the input are treated as zero.
pub fn resample_channel(samples: &[f64], source_rate: u32, target_rate: u32) -> Vec<f64> {
    if source_rate == target_rate {
        return samples.to_vec();
    }
    let n = samples.len() as u64;
    let g = gcd(source_rate as u64, target_rate as u64);
    let (src, dst) = (source_rate as u64 / g, target_rate as u64 / g);
    let out_len = ((n * dst + src / 2) / src) as usize;
    let kernel = SincKernel::new(source_rate, target_rate);
    let half = TAPS_PER_SIDE as i64;
    let width = 2 * TAPS_PER_SIDE;

    // One row of taps per fractional phase; there are only `dst` phases.
    let table: Option<Vec<f64>> = (dst as usize * width <= 1 << 22).then(|| {
        let mut t = Vec::with_capacity(dst as usize * width);
        for phase in 0..dst {
            let frac = phase as f64 / dst as f64;
            for tap in 0..width as i64 {
                t.push(kernel.at((half - 1 - tap) as f64 + frac));
            }
        }
        t
    });

    (0..out_len as u64)
        .map(|j| {
            let num = j * src;
            let base = (num / dst) as i64;
            let phase = num % dst;
            let frac = phase as f64 / dst as f64;
            let first = base - half + 1;
            let lo = first.max(0);
            let hi = (base + half).min(n as i64 - 1);
            let mut acc = 0.0;
            for i in lo..=hi {
                let w = match &table {
                    Some(t) => t[phase as usize * width + (i - first) as usize],
                    None => kernel.at((base - i) as f64 + frac),
                };
                acc += samples[i as usize] * w;
            }
            acc
        })
        .collect()
}

/// Band-limited resampling to `target_rate`; identity when the rates match.
pub fn resample(buffer: &AudioBuffer, target_rate: u32) -> AudioBuffer {
    AudioBuffer {
        samples: resample_channel(&buffer.samples, buffer.sample_rate, target_rate),
        sample_rate: target_rate,
        source_name: buffer.source_name.clone(),
    }
}
