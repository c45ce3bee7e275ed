//! JSON tensor files. Numbers carry 17 significant digits, so a file read and
//! written again is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::coeffs::Coeffs;
use crate::error::{Error, Result};
use crate::metric::{MetricContext, Vector};
use crate::tensors::{CovDerivTensor, CurvatureTensor, PrimTensor, Sym2Tensor};

/// Largest real dimension accepted from a file.
pub const MAX_FILE_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Curvature,
    CovDeriv,
    PTensor,
    Sym2,
    Vector,
}

impl Kind {
    pub fn rank(self) -> usize {
        match self {
            Kind::Curvature => 4,
            Kind::CovDeriv => 5,
            Kind::PTensor => 3,
            Kind::Sym2 => 2,
            Kind::Vector => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Curvature => "curvature",
            Kind::CovDeriv => "cov_deriv",
            Kind::PTensor => "p_tensor",
            Kind::Sym2 => "sym2",
            Kind::Vector => "vector",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Riemann,
    Kahler,
}

impl Geometry {
    pub fn of(ctx: &MetricContext) -> Self {
        if ctx.is_kahler() {
            Geometry::Kahler
        } else {
            Geometry::Riemann
        }
    }

    /// Kähler counts are complex.
    pub fn context(self, p: usize, q: usize) -> Result<MetricContext> {
        match self {
            Geometry::Riemann => MetricContext::riemann(p, q),
            Geometry::Kahler => MetricContext::kahler(p, q),
        }
    }

    pub fn real_dim(self, p: usize, q: usize) -> Option<usize> {
        let n = p.checked_add(q)?;
        match self {
            Geometry::Riemann => Some(n),
            Geometry::Kahler => n.checked_mul(2),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorFile {
    pub kind: Kind,
    pub geometry: Geometry,
    pub p: usize,
    pub q: usize,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Serialize)]
struct WireOut<'a> {
    kind: Kind,
    geometry: Geometry,
    p: usize,
    q: usize,
    dims: &'a [usize],
    data: &'a RawValue,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireIn {
    kind: Kind,
    geometry: Geometry,
    p: usize,
    q: usize,
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn format_data(data: &[f64]) -> std::result::Result<String, String> {
    let mut s = String::with_capacity(data.len() * 25 + 2);
    s.push('[');
    for (k, v) in data.iter().enumerate() {
        if !v.is_finite() {
            return Err(format!("non-finite value at data[{k}]"));
        }
        if k > 0 {
            s.push(',');
        }
        write!(s, "{v:.16e}").expect("string write");
    }
    s.push(']');
    Ok(s)
}

impl Serialize for TensorFile {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let text = format_data(&self.data).map_err(S::Error::custom)?;
        let raw = RawValue::from_string(text).map_err(S::Error::custom)?;
        WireOut { kind: self.kind, geometry: self.geometry, p: self.p, q: self.q, dims: &self.dims, data: &raw }
            .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for TensorFile {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let w = WireIn::deserialize(de)?;
        let f = TensorFile { kind: w.kind, geometry: w.geometry, p: w.p, q: w.q, dims: w.dims, data: w.data };
        f.validate().map_err(|e| D::Error::custom(e.to_string()))?;
        Ok(f)
    }
}

impl TensorFile {
    fn from_parts(kind: Kind, ctx: &MetricContext, data: Vec<f64>) -> Self {
        TensorFile {
            kind,
            geometry: Geometry::of(ctx),
            p: ctx.p(),
            q: ctx.q(),
            dims: vec![ctx.dim(); kind.rank()],
            data,
        }
    }

    pub fn from_curvature(r: &CurvatureTensor) -> Self {
        Self::from_parts(Kind::Curvature, r.ctx(), r.coeffs().as_slice().to_vec())
    }

    pub fn from_cov_deriv(s: &CovDerivTensor) -> Self {
        Self::from_parts(Kind::CovDeriv, s.ctx(), s.coeffs().as_slice().to_vec())
    }

    pub fn from_prim(p: &PrimTensor) -> Self {
        Self::from_parts(Kind::PTensor, p.ctx(), p.coeffs().as_slice().to_vec())
    }

    pub fn from_sym2(h: &Sym2Tensor) -> Self {
        Self::from_parts(Kind::Sym2, h.ctx(), h.coeffs().as_slice().to_vec())
    }

    pub fn from_vector(v: &Vector, ctx: &MetricContext) -> Self {
        Self::from_parts(Kind::Vector, ctx, v.iter().copied().collect())
    }

    /// Checks that `dims` match `kind` and the signature, and that `data` fits.
    pub fn validate(&self) -> Result<()> {
        let n = self
            .geometry
            .real_dim(self.p, self.q)
            .filter(|&n| n > 0 && n <= MAX_FILE_DIM)
            .ok_or_else(|| Error::Input(format!("signature ({},{}) out of range", self.p, self.q)))?;
        if self.dims.len() != self.kind.rank() || self.dims.iter().any(|&d| d != n) {
            return Err(Error::Input(format!(
                "dims {:?} do not fit kind {} in real dimension {n}",
                self.dims,
                self.kind.name()
            )));
        }
        let len = n.pow(self.kind.rank() as u32);
        if self.data.len() != len {
            return Err(Error::Input(format!("data has {} entries, dims require {len}", self.data.len())));
        }
        if let Some(k) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite value at data[{k}]")));
        }
        Ok(())
    }

    pub fn context(&self) -> Result<MetricContext> {
        self.validate()?;
        self.geometry.context(self.p, self.q)
    }

    fn expect_kind(&self, kind: Kind) -> Result<MetricContext> {
        if self.kind != kind {
            return Err(Error::Input(format!("expected a {} file, found {}", kind.name(), self.kind.name())));
        }
        self.context()
    }

    fn coeffs<const R: usize>(&self, ctx: &MetricContext) -> Result<Coeffs<R>> {
        Coeffs::from_vec(ctx.dim(), self.data.clone())
            .ok_or(Error::DimensionMismatch { expected: ctx.dim().pow(R as u32), found: self.data.len() })
    }

    pub fn to_curvature(&self) -> Result<CurvatureTensor> {
        let ctx = self.expect_kind(Kind::Curvature)?;
        CurvatureTensor::new(&ctx, self.coeffs(&ctx)?)
    }

    pub fn to_cov_deriv(&self) -> Result<CovDerivTensor> {
        let ctx = self.expect_kind(Kind::CovDeriv)?;
        CovDerivTensor::new(&ctx, self.coeffs(&ctx)?)
    }

    pub fn to_prim(&self) -> Result<PrimTensor> {
        let ctx = self.expect_kind(Kind::PTensor)?;
        PrimTensor::new(&ctx, self.coeffs(&ctx)?)
    }

    pub fn to_sym2(&self) -> Result<Sym2Tensor> {
        let ctx = self.expect_kind(Kind::Sym2)?;
        Sym2Tensor::new(&ctx, self.coeffs(&ctx)?)
    }

    pub fn to_vector(&self) -> Result<Vector> {
        self.expect_kind(Kind::Vector)?;
        Ok(Vector::from_vec(self.data.clone()))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("malformed tensor file: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{random_element, Space};

    #[test]
    fn write_read_write_is_byte_identical() {
        let c = MetricContext::riemann(1, 3).unwrap();
        let r = random_element(Space::RSo, &c, 3).unwrap().into_curvature().unwrap();
        let f = TensorFile::from_curvature(&r);
        let a = f.to_json().unwrap();
        let g = TensorFile::from_json(&a).unwrap();
        assert_eq!(g, f);
        assert_eq!(g.to_json().unwrap(), a);
        assert_eq!(g.to_curvature().unwrap(), r);
    }

    #[test]
    fn awkward_floats_survive() {
        let c = MetricContext::riemann(0, 8).unwrap();
        let vals = [0.1, -0.0, 5e-324, f64::MAX, 1.0 / 3.0, -2.2250738585072014e-308, 123456789.0, 1e300];
        let f = TensorFile::from_vector(&Vector::from_vec(vals.to_vec()), &c);
        let text = f.to_json().unwrap();
        let back = TensorFile::from_json(&text).unwrap();
        assert_eq!(back.to_json().unwrap(), text);
        for (x, y) in back.data.iter().zip(&f.data) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn kahler_counts_are_complex() {
        let c = MetricContext::kahler(1, 1).unwrap();
        let p = random_element(Space::PU, &c, 1).unwrap().into_prim().unwrap();
        let f = TensorFile::from_prim(&p);
        assert_eq!((f.p, f.q, f.dims.clone()), (1, 1, vec![4, 4, 4]));
        assert!(f.to_json().unwrap().contains("\"kahler\""));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let good = TensorFile::from_vector(&Vector::from_vec(vec![1.0, 2.0]), &MetricContext::riemann(0, 2).unwrap());
        let text = good.to_json().unwrap();
        for bad in [
            text.replace("\"vector\"", "\"spinor\""),
            text.replace("\"dims\": [\n    2\n  ]", "\"dims\": [3]"),
            text.replace(",2.0000000000000000e0", ""),
            text.replace("\"q\": 2", "\"q\": 2000"),
            text.replace("\"p\": 0", "\"p\": -1"),
            "{".to_string(),
            "[]".to_string(),
        ] {
            assert!(matches!(TensorFile::from_json(&bad), Err(Error::Input(_))), "{bad}");
        }
        assert!(matches!(good.to_curvature(), Err(Error::Input(_))));
    }

    #[test]
    fn non_finite_values_cannot_be_written() {
        let c = MetricContext::riemann(0, 1).unwrap();
        let f = TensorFile::from_vector(&Vector::from_vec(vec![f64::NAN]), &c);
        assert!(f.to_json().is_err());
    }
}
