//! Self-describing little-endian container formats.
//!
//! Every file is `magic[4] | version:u16 | header_len:u32 | header (UTF-8
//! JSON) | payload`. Payload blobs are packed back to back with no padding.
//!
//! | magic  | payload                                                        |
//! |--------|----------------------------------------------------------------|
//! | `UQDS` | features `f32[n*d]`, labels `u16[n]`                            |
//! | `UQHM` | bn gamma, beta, mean, var `f32[d]`; W1, b1, W2, b2 as `f32`     |
//! | `UQQM` | W1 `u8`, b1 `i32`, W2 `u8`, b2 `i32`, bn shift `f32[d]`, bn share `f32[h]` |

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::LabeledSample;
use crate::netcore::{Activation, BatchNorm, Dense, HeadModel, Tensor};
use crate::quant::{ActivationParams, QuantDense, QuantParams, QuantizedHead};

pub const DATASET_MAGIC: [u8; 4] = *b"UQDS";
pub const FLOAT_MODEL_MAGIC: [u8; 4] = *b"UQHM";
pub const QUANT_MODEL_MAGIC: [u8; 4] = *b"UQQM";
pub const FORMAT_VERSION: u16 = 1;

/// Bytes before the JSON header.
pub const PREAMBLE_LEN: usize = 4 + 2 + 4;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u16, found: u16 },
    #[error("truncated {section}: needed {needed} bytes, {available} available")]
    Truncated {
        section: &'static str,
        needed: usize,
        available: usize,
    },
    #[error("{0} unexpected trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid content: {0}")]
    Invalid(String),
}

type FResult<T> = std::result::Result<T, FormatError>;

/// Exact encoded length without materializing the file.
pub trait SerializedSize {
    fn serialized_size(&self) -> usize;
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, section: &'static str) -> FResult<&'a [u8]> {
        let available = self.buf.len() - self.pos;
        if n > available {
            return Err(FormatError::Truncated {
                section,
                needed: n,
                available,
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn f32s(&mut self, n: usize, section: &'static str) -> FResult<Vec<f32>> {
        let bytes = self.take(n * 4, section)?;
        let v: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
            .collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(FormatError::Invalid(format!("non-finite value in {section}")));
        }
        Ok(v)
    }

    fn i32s(&mut self, n: usize, section: &'static str) -> FResult<Vec<i32>> {
        Ok(self
            .take(n * 4, section)?
            .chunks_exact(4)
            .map(|c| i32::from_le_bytes(c.try_into().expect("4-byte chunk")))
            .collect())
    }

    fn u16s(&mut self, n: usize, section: &'static str) -> FResult<Vec<u16>> {
        Ok(self
            .take(n * 2, section)?
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes(c.try_into().expect("2-byte chunk")))
            .collect())
    }

    fn finish(&self) -> FResult<()> {
        match self.buf.len() - self.pos {
            0 => Ok(()),
            n => Err(FormatError::TrailingBytes(n)),
        }
    }
}

fn header_bytes<H: Serialize>(header: &H) -> Vec<u8> {
    serde_json::to_vec(header).expect("header types serialize infallibly")
}

fn write_preamble(out: &mut Vec<u8>, magic: [u8; 4], header: &[u8]) {
    out.extend_from_slice(&magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(header);
}

fn read_preamble<'a, H: DeserializeOwned>(buf: &'a [u8], magic: [u8; 4]) -> FResult<(H, Reader<'a>)> {
    let mut r = Reader { buf, pos: 0 };
    let found = r.take(4, "magic")?;
    if found != magic {
        return Err(FormatError::BadMagic {
            expected: String::from_utf8_lossy(&magic).into_owned(),
            found: String::from_utf8_lossy(found).into_owned(),
        });
    }
    let version = u16::from_le_bytes(r.take(2, "version")?.try_into().expect("2 bytes"));
    if version != FORMAT_VERSION {
        return Err(FormatError::VersionMismatch {
            expected: FORMAT_VERSION,
            found: version,
        });
    }
    let len = u32::from_le_bytes(r.take(4, "header length")?.try_into().expect("4 bytes")) as usize;
    let raw = r.take(len, "header")?;
    let text = std::str::from_utf8(raw).map_err(|e| FormatError::Header(e.to_string()))?;
    let header = serde_json::from_str(text).map_err(|e| FormatError::Header(e.to_string()))?;
    Ok((header, r))
}

fn put_f32s(out: &mut Vec<u8>, v: &[f32]) {
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn put_i32s(out: &mut Vec<u8>, v: &[i32]) {
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn mismatch(what: impl Into<String>) -> FormatError {
    FormatError::DimensionMismatch(what.into())
}

fn nonzero(name: &str, v: usize) -> FResult<()> {
    if v == 0 {
        Err(mismatch(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// UQDS
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub num_samples: usize,
    pub feature_dim: usize,
    pub num_classes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption_tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<u32>,
}

/// Pooled feature vectors with one class index each.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    /// Row-major `num_samples x feature_dim`.
    pub features: Vec<f32>,
    pub labels: Vec<u16>,
}

impl Dataset {
    pub fn new(
        feature_dim: usize,
        num_classes: usize,
        features: Vec<f32>,
        labels: Vec<u16>,
        corruption_tag: Option<String>,
        severity: Option<u32>,
    ) -> FResult<Self> {
        let ds = Self {
            header: DatasetHeader {
                num_samples: labels.len(),
                feature_dim,
                num_classes,
                corruption_tag,
                severity,
            },
            features,
            labels,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> FResult<()> {
        let h = &self.header;
        nonzero("feature_dim", h.feature_dim)?;
        nonzero("num_classes", h.num_classes)?;
        if h.num_classes > u16::MAX as usize + 1 {
            return Err(mismatch("num_classes exceeds u16 label range"));
        }
        if self.labels.len() != h.num_samples || self.features.len() != h.num_samples * h.feature_dim {
            return Err(mismatch(format!(
                "{} samples x {} features disagree with {} labels / {} values",
                h.num_samples,
                h.feature_dim,
                self.labels.len(),
                self.features.len()
            )));
        }
        if let Some((i, l)) = self.labels.iter().enumerate().find(|(_, &l)| l as usize >= h.num_classes) {
            return Err(FormatError::Invalid(format!(
                "label {l} of sample {i} outside [0, {})",
                h.num_classes
            )));
        }
        if self.features.iter().any(|v| !v.is_finite()) {
            return Err(FormatError::Invalid("non-finite feature value".into()));
        }
        Ok(())
    }

    pub fn from_samples(
        samples: &[LabeledSample],
        feature_dim: usize,
        num_classes: usize,
        corruption_tag: Option<String>,
        severity: Option<u32>,
    ) -> FResult<Self> {
        let mut features = Vec::with_capacity(samples.len() * feature_dim);
        let mut labels = Vec::with_capacity(samples.len());
        for s in samples {
            if s.features.len() != feature_dim {
                return Err(mismatch(format!("sample {} has {} features", s.id, s.features.len())));
            }
            features.extend_from_slice(s.features.data());
            labels.push(
                u16::try_from(s.true_class).map_err(|_| FormatError::Invalid("class index exceeds u16".into()))?,
            );
        }
        Self::new(feature_dim, num_classes, features, labels, corruption_tag, severity)
    }

    /// Samples with ids equal to their row index.
    pub fn samples(&self) -> Vec<LabeledSample> {
        let d = self.header.feature_dim;
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &l)| LabeledSample {
                id: i as u64,
                features: Tensor::from_parts_unchecked(vec![d], self.features[i * d..(i + 1) * d].to_vec()),
                true_class: l as usize,
                corruption_tag: self.header.corruption_tag.clone(),
                severity: self.header.severity,
            })
            .collect()
    }

    pub fn feature_rows(&self) -> Vec<Tensor> {
        self.samples().into_iter().map(|s| s.features).collect()
    }

    pub fn encode(&self) -> Vec<u8> {
        let header = header_bytes(&self.header);
        let mut out = Vec::with_capacity(PREAMBLE_LEN + header.len() + self.features.len() * 4 + self.labels.len() * 2);
        write_preamble(&mut out, DATASET_MAGIC, &header);
        put_f32s(&mut out, &self.features);
        for l in &self.labels {
            out.extend_from_slice(&l.to_le_bytes());
        }
        out
    }

    pub fn decode(buf: &[u8]) -> FResult<Self> {
        let (header, mut r): (DatasetHeader, _) = read_preamble(buf, DATASET_MAGIC)?;
        let n = header
            .num_samples
            .checked_mul(header.feature_dim)
            .ok_or_else(|| mismatch("dataset size overflows"))?;
        let features = r.f32s(n, "dataset features")?;
        let labels = r.u16s(header.num_samples, "dataset labels")?;
        r.finish()?;
        let ds = Self {
            header,
            features,
            labels,
        };
        ds.validate()?;
        Ok(ds)
    }
}

// ---------------------------------------------------------------------------
// UQHM
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FloatModelHeader {
    feature_dim: usize,
    hidden_dim: usize,
    num_classes: usize,
    dropout1_p: f32,
    dropout2_p: f32,
    bn_epsilon: f32,
}

fn float_header(m: &HeadModel) -> FloatModelHeader {
    FloatModelHeader {
        feature_dim: m.feature_dim(),
        hidden_dim: m.hidden_dim(),
        num_classes: m.num_classes(),
        dropout1_p: m.dropout1_p,
        dropout2_p: m.dropout2_p,
        bn_epsilon: m.bn.epsilon,
    }
}

fn float_layout(f: usize, h: usize, c: usize) -> Vec<(&'static str, usize)> {
    vec![
        ("bn_gamma", 4 * f),
        ("bn_beta", 4 * f),
        ("bn_running_mean", 4 * f),
        ("bn_running_var", 4 * f),
        ("dense1_weights", 4 * f * h),
        ("dense1_bias", 4 * h),
        ("dense2_weights", 4 * h * c),
        ("dense2_bias", 4 * c),
    ]
}

/// Named payload blobs of a float model file, in file order, with byte sizes.
pub fn float_payload_layout(m: &HeadModel) -> Vec<(&'static str, usize)> {
    float_layout(m.feature_dim(), m.hidden_dim(), m.num_classes())
}

pub fn encode_float_model(m: &HeadModel) -> Vec<u8> {
    let header = header_bytes(&float_header(m));
    let mut out = Vec::with_capacity(PREAMBLE_LEN + header.len() + 4 * m.parameter_count());
    write_preamble(&mut out, FLOAT_MODEL_MAGIC, &header);
    for v in [&m.bn.gamma, &m.bn.beta, &m.bn.running_mean, &m.bn.running_var] {
        put_f32s(&mut out, v);
    }
    put_f32s(&mut out, m.dense1.weights.data());
    put_f32s(&mut out, m.dense1.bias.data());
    put_f32s(&mut out, m.dense2.weights.data());
    put_f32s(&mut out, m.dense2.bias.data());
    out
}

pub fn decode_float_model(buf: &[u8]) -> FResult<HeadModel> {
    let (h, mut r): (FloatModelHeader, _) = read_preamble(buf, FLOAT_MODEL_MAGIC)?;
    nonzero("feature_dim", h.feature_dim)?;
    nonzero("hidden_dim", h.hidden_dim)?;
    nonzero("num_classes", h.num_classes)?;
    let (f, hd, c) = (h.feature_dim, h.hidden_dim, h.num_classes);
    let bn = BatchNorm {
        gamma: r.f32s(f, "bn gamma")?,
        beta: r.f32s(f, "bn beta")?,
        running_mean: r.f32s(f, "bn running mean")?,
        running_var: r.f32s(f, "bn running var")?,
        epsilon: h.bn_epsilon,
    };
    let w1 = r.f32s(f * hd, "dense1 weights")?;
    let b1 = r.f32s(hd, "dense1 bias")?;
    let w2 = r.f32s(hd * c, "dense2 weights")?;
    let b2 = r.f32s(c, "dense2 bias")?;
    r.finish()?;
    let invalid = |e: crate::Error| FormatError::Invalid(e.to_string());
    let dense1 = Dense::new(
        Tensor::matrix(f, hd, w1).map_err(invalid)?,
        Tensor::vector(b1).map_err(invalid)?,
        Activation::Relu,
    )
    .map_err(invalid)?;
    let dense2 = Dense::new(
        Tensor::matrix(hd, c, w2).map_err(invalid)?,
        Tensor::vector(b2).map_err(invalid)?,
        Activation::Sigmoid,
    )
    .map_err(invalid)?;
    HeadModel::new(bn, h.dropout1_p, dense1, h.dropout2_p, dense2).map_err(invalid)
}

impl SerializedSize for HeadModel {
    fn serialized_size(&self) -> usize {
        let header = header_bytes(&float_header(self)).len();
        PREAMBLE_LEN + header + float_payload_layout(self).iter().map(|(_, n)| n).sum::<usize>()
    }
}

// ---------------------------------------------------------------------------
// UQQM
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct QuantModelHeader {
    feature_dim: usize,
    hidden_dim: usize,
    num_classes: usize,
    dropout1_p: f32,
    dropout2_p: f32,
    input_qp: QuantParams,
    hidden_pre_qp: QuantParams,
    hidden_qp: QuantParams,
    output_pre_qp: QuantParams,
    output_qp: QuantParams,
    dense1_weight_qp: QuantParams,
    dense2_weight_qp: QuantParams,
    relu_lut: Vec<u8>,
    sigmoid_lut: Vec<u8>,
}

fn quant_header(m: &QuantizedHead) -> QuantModelHeader {
    QuantModelHeader {
        feature_dim: m.feature_dim(),
        hidden_dim: m.hidden_dim(),
        num_classes: m.num_classes(),
        dropout1_p: m.dropout1_p,
        dropout2_p: m.dropout2_p,
        input_qp: m.act.input,
        hidden_pre_qp: m.act.hidden_pre,
        hidden_qp: m.act.hidden,
        output_pre_qp: m.act.output_pre,
        output_qp: m.act.output,
        dense1_weight_qp: m.dense1.weight_qp,
        dense2_weight_qp: m.dense2.weight_qp,
        relu_lut: m.relu_lut.clone(),
        sigmoid_lut: m.sigmoid_lut.clone(),
    }
}

/// Named payload blobs of a quantized model file, in file order, with byte sizes.
pub fn quant_payload_layout(m: &QuantizedHead) -> Vec<(&'static str, usize)> {
    let (f, h, c) = (m.feature_dim(), m.hidden_dim(), m.num_classes());
    vec![
        ("dense1_weights", f * h),
        ("dense1_bias", 4 * h),
        ("dense2_weights", h * c),
        ("dense2_bias", 4 * c),
        ("bn_input_shift", 4 * f),
        ("bn_bias_share", 4 * h),
    ]
}

pub fn encode_quant_model(m: &QuantizedHead) -> Vec<u8> {
    let header = header_bytes(&quant_header(m));
    let payload: usize = quant_payload_layout(m).iter().map(|(_, n)| n).sum();
    let mut out = Vec::with_capacity(PREAMBLE_LEN + header.len() + payload);
    write_preamble(&mut out, QUANT_MODEL_MAGIC, &header);
    out.extend_from_slice(&m.dense1.weights);
    put_i32s(&mut out, &m.dense1.bias);
    out.extend_from_slice(&m.dense2.weights);
    put_i32s(&mut out, &m.dense2.bias);
    put_f32s(&mut out, &m.bn_input_shift);
    put_f32s(&mut out, &m.bn_bias_share);
    out
}

fn check_qp(name: &str, qp: QuantParams) -> FResult<()> {
    if qp.scale.is_finite() && qp.scale > 0.0 {
        Ok(())
    } else {
        Err(FormatError::Invalid(format!("{name} scale {} must be positive", qp.scale)))
    }
}

pub fn decode_quant_model(buf: &[u8]) -> FResult<QuantizedHead> {
    let (h, mut r): (QuantModelHeader, _) = read_preamble(buf, QUANT_MODEL_MAGIC)?;
    nonzero("feature_dim", h.feature_dim)?;
    nonzero("hidden_dim", h.hidden_dim)?;
    nonzero("num_classes", h.num_classes)?;
    for (name, qp) in [
        ("input_qp", h.input_qp),
        ("hidden_pre_qp", h.hidden_pre_qp),
        ("hidden_qp", h.hidden_qp),
        ("output_pre_qp", h.output_pre_qp),
        ("output_qp", h.output_qp),
        ("dense1_weight_qp", h.dense1_weight_qp),
        ("dense2_weight_qp", h.dense2_weight_qp),
    ] {
        check_qp(name, qp)?;
    }
    for (name, lut) in [("relu_lut", &h.relu_lut), ("sigmoid_lut", &h.sigmoid_lut)] {
        if lut.len() != 256 {
            return Err(mismatch(format!("{name} has {} entries, expected 256", lut.len())));
        }
    }
    let (f, hd, c) = (h.feature_dim, h.hidden_dim, h.num_classes);
    let w1 = r.take(f * hd, "dense1 weights")?.to_vec();
    let b1 = r.i32s(hd, "dense1 bias")?;
    let w2 = r.take(hd * c, "dense2 weights")?.to_vec();
    let b2 = r.i32s(c, "dense2 bias")?;
    let shift = r.f32s(f, "bn input shift")?;
    let share = r.f32s(hd, "bn bias share")?;
    r.finish()?;
    let m = QuantizedHead {
        dropout1_p: h.dropout1_p,
        dropout2_p: h.dropout2_p,
        act: ActivationParams {
            input: h.input_qp,
            hidden_pre: h.hidden_pre_qp,
            hidden: h.hidden_qp,
            output_pre: h.output_pre_qp,
            output: h.output_qp,
        },
        dense1: QuantDense {
            inputs: f,
            outputs: hd,
            weights: w1,
            weight_qp: h.dense1_weight_qp,
            bias: b1,
        },
        dense2: QuantDense {
            inputs: hd,
            outputs: c,
            weights: w2,
            weight_qp: h.dense2_weight_qp,
            bias: b2,
        },
        relu_lut: h.relu_lut,
        sigmoid_lut: h.sigmoid_lut,
        bn_input_shift: shift,
        bn_bias_share: share,
    };
    m.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(m)
}

impl SerializedSize for QuantizedHead {
    fn serialized_size(&self) -> usize {
        let header = header_bytes(&quant_header(self)).len();
        PREAMBLE_LEN + header + quant_payload_layout(self).iter().map(|(_, n)| n).sum::<usize>()
    }
}

// ---------------------------------------------------------------------------
// file helpers
// ---------------------------------------------------------------------------

pub fn save_dataset(path: impl AsRef<Path>, ds: &Dataset) -> crate::Result<()> {
    Ok(std::fs::write(path, ds.encode())?)
}

pub fn load_dataset(path: impl AsRef<Path>) -> crate::Result<Dataset> {
    Ok(Dataset::decode(&std::fs::read(path)?)?)
}

pub fn save_float_model(path: impl AsRef<Path>, m: &HeadModel) -> crate::Result<()> {
    Ok(std::fs::write(path, encode_float_model(m))?)
}

pub fn load_float_model(path: impl AsRef<Path>) -> crate::Result<HeadModel> {
    Ok(decode_float_model(&std::fs::read(path)?)?)
}

pub fn save_quant_model(path: impl AsRef<Path>, m: &QuantizedHead) -> crate::Result<()> {
    Ok(std::fs::write(path, encode_quant_model(m))?)
}

pub fn load_quant_model(path: impl AsRef<Path>) -> crate::Result<QuantizedHead> {
    Ok(decode_quant_model(&std::fs::read(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fixtures::{random_calibrated_head, random_head};
    use crate::quant::{calibrate, quantize_model};
    use crate::rng::seeded_rng;

    fn quant_fixture() -> QuantizedHead {
        let (m, calib) = random_calibrated_head(&mut seeded_rng(31), 20, 9, 5, 16);
        quantize_model(&m, &calibrate(&m, &calib).unwrap()).unwrap()
    }

    #[test]
    fn float_model_round_trip() {
        let m = random_head(&mut seeded_rng(1), 12, 7, 4);
        let bytes = encode_float_model(&m);
        let back = decode_float_model(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(encode_float_model(&back), bytes);
        assert_eq!(m.serialized_size(), bytes.len());
    }

    #[test]
    fn quant_model_round_trip() {
        let q = quant_fixture();
        let bytes = encode_quant_model(&q);
        let back = decode_quant_model(&bytes).unwrap();
        assert_eq!(back, q);
        assert_eq!(encode_quant_model(&back), bytes);
        assert_eq!(q.serialized_size(), bytes.len());
    }

    #[test]
    fn dataset_round_trip_with_tags() {
        let ds = Dataset::new(
            3,
            4,
            vec![0.5, 1.0, -2.0, 0.0, 0.25, 9.0],
            vec![3, 0],
            Some("defocus_blur".into()),
            Some(5),
        )
        .unwrap();
        let bytes = ds.encode();
        assert_eq!(&bytes[..4], b"UQDS");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), FORMAT_VERSION);
        let back = Dataset::decode(&bytes).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.encode(), bytes);
        let samples = back.samples();
        assert_eq!(samples[1].true_class, 0);
        assert_eq!(samples[1].corruption_tag.as_deref(), Some("defocus_blur"));
    }

    #[test]
    fn untagged_header_omits_optionals() {
        let ds = Dataset::new(1, 2, vec![0.0], vec![1], None, None).unwrap();
        let bytes = ds.encode();
        let len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let header = std::str::from_utf8(&bytes[10..10 + len]).unwrap();
        assert_eq!(header, r#"{"num_samples":1,"feature_dim":1,"num_classes":2}"#);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode_float_model(&random_head(&mut seeded_rng(2), 4, 3, 2));
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_float_model(&bytes), Err(FormatError::BadMagic { .. })));
        assert!(matches!(decode_quant_model(&bytes), Err(FormatError::BadMagic { .. })));
        assert!(matches!(Dataset::decode(&bytes), Err(FormatError::BadMagic { .. })));
    }

    #[test]
    fn truncated_payloads() {
        let f = encode_float_model(&random_head(&mut seeded_rng(2), 4, 3, 2));
        assert!(matches!(
            decode_float_model(&f[..f.len() - 1]),
            Err(FormatError::Truncated { .. })
        ));
        let q = encode_quant_model(&quant_fixture());
        assert!(matches!(
            decode_quant_model(&q[..q.len() - 1]),
            Err(FormatError::Truncated { .. })
        ));
        let d = Dataset::new(2, 3, vec![1.0, 2.0], vec![2], None, None).unwrap().encode();
        assert!(matches!(Dataset::decode(&d[..d.len() - 1]), Err(FormatError::Truncated { .. })));
        assert!(matches!(Dataset::decode(&d[..3]), Err(FormatError::Truncated { .. })));
    }

    #[test]
    fn trailing_bytes_and_version() {
        let mut d = Dataset::new(2, 3, vec![1.0, 2.0], vec![2], None, None).unwrap().encode();
        d.push(0);
        assert_eq!(Dataset::decode(&d), Err(FormatError::TrailingBytes(1)));
        d.pop();
        d[4] = 9;
        assert!(matches!(
            Dataset::decode(&d),
            Err(FormatError::VersionMismatch { found: 9, .. })
        ));
    }

    #[test]
    fn dimension_mismatch_in_header() {
        // Claim more samples than the payload carries labels for: the
        // payload is then read as truncated.
        let ds = Dataset::new(1, 2, vec![0.5, 0.25], vec![0, 1], None, None).unwrap();
        let mut bad = ds.clone();
        bad.header.num_samples = 3;
        assert!(matches!(bad.validate(), Err(FormatError::DimensionMismatch(_))));
        assert!(Dataset::decode(&bad.encode()).is_err());
    }

    #[test]
    fn label_out_of_range_rejected() {
        assert!(matches!(
            Dataset::new(1, 2, vec![0.0], vec![2], None, None),
            Err(FormatError::Invalid(_))
        ));
    }

    #[test]
    fn bad_scale_rejected() {
        let mut q = quant_fixture();
        q.act.hidden.scale = 0.0;
        assert!(matches!(
            decode_quant_model(&encode_quant_model(&q)),
            Err(FormatError::Invalid(_))
        ));
    }

    #[test]
    fn garbage_header_rejected() {
        let mut out = Vec::new();
        write_preamble(&mut out, DATASET_MAGIC, b"{not json");
        assert!(matches!(Dataset::decode(&out), Err(FormatError::Header(_))));
    }
}
