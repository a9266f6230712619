//! Serde helpers writing complex numbers as `{"re": f, "im": f}`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for JsonComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for Complex64 {
    fn from(z: JsonComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    JsonComplex::from(*z).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    JsonComplex::deserialize(d).map(Complex64::from)
}

/// Same encoding for sequences, for use with `#[serde(with = "complex_json::vec")]`.
pub mod vec {
    use super::JsonComplex;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<JsonComplex> = zs.iter().copied().map(JsonComplex::from).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let v = Vec::<JsonComplex>::deserialize(d)?;
        Ok(v.into_iter().map(Complex64::from).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Wrap {
        #[serde(with = "super")]
        z: Complex64,
    }

    #[test]
    fn encodes_as_re_im_object() {
        let w = Wrap {
            z: Complex64::new(0.5, -1.0),
        };
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"z":{"re":0.5,"im":-1.0}}"#);
        let back: Wrap = serde_json::from_str(&s).unwrap();
        assert_eq!(back.z, w.z);
    }
}
