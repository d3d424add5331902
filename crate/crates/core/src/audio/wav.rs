use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::{Error, Result};

use super::AudioBuffer;

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_IEEE_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Decoded WAV contents, one sample vector per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct WavAudio {
    pub channels: Vec<Vec<f64>>,
    pub sample_rate: u32,
    pub source_name: String,
}

impl WavAudio {
    pub fn frame_count(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy)]
enum SampleFormat {
    Int(u16),
    Float(u16),
}

struct Format {
    channels: u16,
    sample_rate: u32,
    block_align: u16,
    sample: SampleFormat,
}

pub fn load_wav(path: &Path) -> Result<WavAudio> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(Error::FileNotFound(path.to_path_buf()))
        }
        Err(e) => return Err(e.into()),
    };
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    decode_wav(&bytes, &name)
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<Format> {
    if body.len() < 16 {
        return Err(Error::CorruptHeader(
            "fmt chunk shorter than 16 bytes".into(),
        ));
    }
    let mut tag = u16_at(body, 0);
    let channels = u16_at(body, 2);
    let sample_rate = u32_at(body, 4);
    let block_align = u16_at(body, 12);
    let bits = u16_at(body, 14);
    if tag == FORMAT_EXTENSIBLE {
        if body.len() < 40 {
            return Err(Error::CorruptHeader(
                "truncated WAVE_FORMAT_EXTENSIBLE".into(),
            ));
        }
        // First two bytes of the sub-format GUID carry the real format tag.
        tag = u16_at(body, 24);
    }
    let sample = match (tag, bits) {
        (FORMAT_PCM, 16 | 24 | 32) => SampleFormat::Int(bits),
        (FORMAT_IEEE_FLOAT, 32 | 64) => SampleFormat::Float(bits),
        (FORMAT_PCM | FORMAT_IEEE_FLOAT, _) => {
            return Err(Error::UnsupportedFormat(format!(
                "{bits}-bit {} samples",
                if tag == FORMAT_PCM {
                    "integer"
                } else {
                    "float"
                }
            )))
        }
        _ => {
            return Err(Error::UnsupportedFormat(format!(
                "compressed or unknown codec tag 0x{tag:04x}"
            )))
        }
    };
    if channels == 0 {
        return Err(Error::CorruptHeader("zero channels".into()));
    }
    if sample_rate == 0 {
        return Err(Error::CorruptHeader("zero sample rate".into()));
    }
    let expected_align = channels as usize * (bits as usize / 8);
    if block_align as usize != expected_align {
        return Err(Error::CorruptHeader(format!(
            "block align {block_align} does not match {channels} x {bits}-bit"
        )));
    }
    Ok(Format {
        channels,
        sample_rate,
        block_align,
        sample,
    })
}

fn decode_sample(b: &[u8], format: SampleFormat) -> f64 {
    match format {
        SampleFormat::Int(16) => i16::from_le_bytes([b[0], b[1]]) as f64 / 32_768.0,
        SampleFormat::Int(24) => {
            let v = i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8;
            v as f64 / 8_388_608.0
        }
        SampleFormat::Int(_) => {
            i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64 / 2_147_483_648.0
        }
        SampleFormat::Float(32) => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
        SampleFormat::Float(_) => {
            f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]])
        }
    }
}

/// Decodes a RIFF/WAVE byte stream.
pub fn decode_wav(bytes: &[u8], source_name: &str) -> Result<WavAudio> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        if bytes.len() >= 4 && &bytes[0..4] == b"RIFF" {
            return Err(Error::UnsupportedFormat(
                "RIFF container is not WAVE".into(),
            ));
        }
        if bytes.len() < 12 && bytes.starts_with(b"RIFF") {
            return Err(Error::CorruptHeader("truncated RIFF header".into()));
        }
        return Err(Error::UnsupportedFormat("not a RIFF/WAVE file".into()));
    }

    let mut format = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start.saturating_add(size).min(bytes.len());
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => format = Some(parse_fmt(body)?),
            b"data" => {
                data = Some(body);
                if format.is_some() {
                    break;
                }
            }
            _ => {}
        }
        pos = body_start.saturating_add(size).saturating_add(size & 1);
    }

    let format = format.ok_or_else(|| Error::CorruptHeader("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::CorruptHeader("missing data chunk".into()))?;
    let align = format.block_align as usize;
    let frames = data.len() / align;
    if frames == 0 {
        return Err(Error::EmptyAudio);
    }
    let width = align / format.channels as usize;
    let mut channels = vec![Vec::with_capacity(frames); format.channels as usize];
    for frame in data.chunks_exact(align) {
        for (c, chan) in channels.iter_mut().enumerate() {
            chan.push(decode_sample(&frame[c * width..], format.sample));
        }
    }
    Ok(WavAudio {
        channels,
        sample_rate: format.sample_rate,
        source_name: source_name.to_string(),
    })
}

fn encode_16(samples: &[f64], sample_rate: u32) -> Vec<u8> {
    let data_len = samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in samples {
        let code = (s.clamp(-1.0, 1.0) * 32_767.0).round() as i16;
        out.extend_from_slice(&code.to_le_bytes());
    }
    out
}

/// Writes a mono 16-bit PCM WAV.
pub fn write_wav_16(path: &Path, buffer: &AudioBuffer) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode_16(&buffer.samples, buffer.sample_rate))?;
    Ok(())
}
