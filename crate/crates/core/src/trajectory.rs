//! Feature-to-[0,10]^3 mapping and the trajectory JSON format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::pitch::PitchTrack;
use crate::spectral::FeatureTimeSeries;
use crate::{Error, Result};

pub const AXIS_MAX: f64 = 10.0;

/// Min-max map onto `[lo, hi]`; constant input maps to the midpoint.
fn rescale(values: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    if !(span > 0.0) || !span.is_finite() {
        return vec![0.5 * (lo + hi); values.len()];
    }
    values
        .iter()
        .map(|v| (lo + (hi - lo) * (v - min) / span).clamp(lo, hi))
        .collect()
}

/// `10 (v - min) / (max - min)`; a constant series maps to 5.
pub fn normalize_to_range(values: &[f64]) -> Vec<f64> {
    rescale(values, 0.0, AXIS_MAX)
}

/// Pitch with unvoiced gaps filled: interior runs are linearly interpolated
/// in time, edge runs copy the nearest voiced value, an all-unvoiced track is
/// set to `f_min`.
pub fn fill_unvoiced(pitch: &PitchTrack, f_min: f64) -> FeatureTimeSeries {
    let voiced: Vec<usize> = (0..pitch.len())
        .filter(|&m| pitch.f0[m].is_some())
        .collect();
    let values = if voiced.is_empty() {
        vec![f_min; pitch.len()]
    } else {
        let mut out = vec![0.0; pitch.len()];
        let mut next = 0usize;
        for (m, slot) in out.iter_mut().enumerate() {
            if let Some(f) = pitch.f0[m] {
                *slot = f;
                next += 1;
                continue;
            }
            *slot = match (next.checked_sub(1).map(|i| voiced[i]), voiced.get(next)) {
                (Some(a), Some(&b)) => {
                    let (fa, fb) = (pitch.f0[a].unwrap(), pitch.f0[b].unwrap());
                    fa + (fb - fa) * (m - a) as f64 / (b - a) as f64
                }
                (Some(a), None) => pitch.f0[a].unwrap(),
                (None, Some(&b)) => pitch.f0[b].unwrap(),
                (None, None) => unreachable!("voiced frames exist"),
            };
        }
        out
    };
    FeatureTimeSeries::scalar("pitch_hz", pitch.frame_times.clone(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub pitch_hz: Option<f64>,
    pub energy: f64,
}

/// On-disk trajectory consumed by the viewer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub sample_rate: u32,
    pub hop: usize,
    /// Audio path relative to the session folder.
    pub audio: String,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Inputs for one stream's trajectory; all series share the STFT frame grid.
pub struct TrajectoryInputs<'a> {
    pub centroid: &'a FeatureTimeSeries,
    pub bandwidth: &'a FeatureTimeSeries,
    pub pitch: &'a PitchTrack,
    pub pitch_filled: &'a FeatureTimeSeries,
    pub energy: &'a FeatureTimeSeries,
}

pub fn build_trajectory(
    inputs: &TrajectoryInputs<'_>,
    sample_rate: u32,
    hop: usize,
    audio: impl Into<String>,
) -> Result<Trajectory> {
    let frames = inputs.centroid.frames();
    for len in [
        inputs.bandwidth.frames(),
        inputs.pitch.len(),
        inputs.pitch_filled.frames(),
        inputs.energy.frames(),
    ] {
        if len != frames {
            return Err(Error::ShapeMismatch {
                expected: frames,
                actual: len,
            });
        }
    }
    let x = normalize_to_range(&inputs.centroid.scalar_values());
    let y = normalize_to_range(&inputs.bandwidth.scalar_values());
    let z = normalize_to_range(&inputs.pitch_filled.scalar_values());
    let energy = rescale(&inputs.energy.scalar_values(), 0.0, 1.0);
    let points = (0..frames)
        .map(|m| TrajectoryPoint {
            t: (m * hop) as f64 / sample_rate as f64,
            x: x[m],
            y: y[m],
            z: z[m],
            pitch_hz: inputs.pitch.f0[m],
            energy: energy[m],
        })
        .collect();
    Ok(Trajectory {
        sample_rate,
        hop,
        audio: audio.into(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn track(f0: Vec<Option<f64>>) -> PitchTrack {
        let n = f0.len();
        PitchTrack {
            frame_times: (0..n).map(|m| m as f64 * 0.1).collect(),
            voiced_prob: vec![0.5; n],
            f0,
        }
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_to_range(&[0.0, 5.0, 10.0]), vec![0.0, 5.0, 10.0]);
        assert_eq!(normalize_to_range(&[3.0; 4]), vec![5.0; 4]);
        assert_eq!(normalize_to_range(&[2.0, 4.0]), vec![0.0, 10.0]);
        assert!(normalize_to_range(&[]).is_empty());
    }

    #[test]
    fn fill_examples() {
        let filled = fill_unvoiced(&track(vec![Some(440.0), None, None, Some(880.0)]), 65.0);
        let v = filled.scalar_values();
        assert_eq!(v[0], 440.0);
        assert!((v[1] - 586.666_666_666_7).abs() < 1e-6);
        assert!((v[2] - 733.333_333_333_3).abs() < 1e-6);
        assert_eq!(v[3], 880.0);

        let edges = fill_unvoiced(&track(vec![None, Some(300.0), Some(310.0), None]), 65.0);
        assert_eq!(edges.scalar_values(), vec![300.0, 300.0, 310.0, 310.0]);

        let none = fill_unvoiced(&track(vec![None; 3]), 65.0);
        assert_eq!(none.scalar_values(), vec![65.0; 3]);
    }

    fn series(name: &str, v: Vec<f64>) -> FeatureTimeSeries {
        let times = (0..v.len()).map(|m| m as f64 * 512.0 / 22_050.0).collect();
        FeatureTimeSeries::scalar(name, times, v)
    }

    #[test]
    fn trajectory_extremes_and_single_frame() {
        let pitch = track(vec![Some(200.0), None, Some(400.0)]);
        let filled = fill_unvoiced(&pitch, 65.0);
        let c = series("c", vec![1.0, 2.0, 3.0]);
        let b = series("b", vec![5.0, 1.0, 9.0]);
        let e = series("e", vec![0.0, 0.2, 0.4]);
        let traj = build_trajectory(
            &TrajectoryInputs {
                centroid: &c,
                bandwidth: &b,
                pitch: &pitch,
                pitch_filled: &filled,
                energy: &e,
            },
            22_050,
            512,
            "original.wav",
        )
        .unwrap();
        let last = traj.points[2];
        assert_eq!(
            (last.x, last.y, last.z, last.energy),
            (10.0, 10.0, 10.0, 1.0)
        );
        assert_eq!(traj.points[1].pitch_hz, None);

        let one = track(vec![Some(200.0)]);
        let one_filled = fill_unvoiced(&one, 65.0);
        let s = series("s", vec![7.0]);
        let single = build_trajectory(
            &TrajectoryInputs {
                centroid: &s,
                bandwidth: &s,
                pitch: &one,
                pitch_filled: &one_filled,
                energy: &s,
            },
            22_050,
            512,
            "a.wav",
        )
        .unwrap();
        let p = single.points[0];
        assert_eq!((p.x, p.y, p.z), (5.0, 5.0, 5.0));
    }

    #[test]
    fn json_schema_keys() {
        let traj = Trajectory {
            sample_rate: 22_050,
            hop: 512,
            audio: "original.wav".into(),
            points: vec![TrajectoryPoint {
                t: 0.0,
                x: 1.0,
                y: 2.0,
                z: 3.0,
                pitch_hz: None,
                energy: 0.5,
            }],
        };
        let v: serde_json::Value = serde_json::from_str(&traj.to_json().unwrap()).unwrap();
        let mut top: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        top.sort();
        assert_eq!(top, ["audio", "hop", "points", "sample_rate"]);
        let point = v["points"][0].as_object().unwrap();
        let mut keys: Vec<_> = point.keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["energy", "pitch_hz", "t", "x", "y", "z"]);
        assert!(point["pitch_hz"].is_null());
        assert_eq!(
            Trajectory::from_json(&traj.to_json().unwrap()).unwrap(),
            traj
        );
    }

    proptest! {
        #[test]
        fn normalized_values_stay_in_range(v in prop::collection::vec(-1e6f64..1e6, 1..100)) {
            let out = normalize_to_range(&v);
            prop_assert!(out.iter().all(|x| (0.0..=10.0).contains(x)));
        }
    }
}
