//! Complex helpers and the `{"re": .., "im": ..}` JSON shape.

use num_complex::Complex64;

pub type ComplexValue = Complex64;

/// `e^{i theta}`.
pub fn unit_circle(theta: f64) -> ComplexValue {
    ComplexValue::from_polar(1.0, theta)
}

/// Serde adapter writing a complex number as an object with `re` and `im`.
pub mod serde_complex {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::ComplexValue;

    #[derive(Serialize, Deserialize)]
    struct Repr {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &ComplexValue, s: S) -> Result<S::Ok, S::Error> {
        Repr { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexValue, D::Error> {
        let r = Repr::deserialize(d)?;
        Ok(ComplexValue::new(r.re, r.im))
    }
}
