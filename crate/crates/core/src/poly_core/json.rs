//! JSON forms. Numbers travel as decimal strings so that values outside the
//! `f64` range, and the last bits of those inside it, survive a round trip.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::exact::{parse_rational, ExactPolynomial, GaussianRational};
use super::polynomial::Polynomial;
use super::xnum::{XComplex, XFloat};

impl Serialize for XFloat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal_string())
    }
}

impl<'de> Deserialize<'de> for XFloat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Num {
            S(String),
            F(f64),
        }
        match Num::deserialize(d)? {
            Num::S(s) => XFloat::from_decimal_str(&s).map_err(D::Error::custom),
            Num::F(x) => Ok(XFloat::from_f64(x)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    exact: bool,
    coeffs: Vec<[String; 2]>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            exact: false,
            coeffs: self
                .coeffs()
                .iter()
                .map(|c| [c.re().to_decimal_string(), c.im().to_decimal_string()])
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        if w.exact {
            return exact_from_wire(&w).map(|p| p.to_float()).map_err(D::Error::custom);
        }
        let mut v = Vec::with_capacity(w.coeffs.len());
        for [re, im] in &w.coeffs {
            let re = XFloat::from_decimal_str(re).map_err(D::Error::custom)?;
            let im = XFloat::from_decimal_str(im).map_err(D::Error::custom)?;
            v.push(XComplex::from_parts(re, im));
        }
        Ok(Polynomial::new(v))
    }
}

fn exact_from_wire(w: &Wire) -> crate::Result<ExactPolynomial> {
    let mut v = Vec::with_capacity(w.coeffs.len());
    for [re, im] in &w.coeffs {
        v.push(GaussianRational::new(parse_rational(re)?, parse_rational(im)?));
    }
    Ok(ExactPolynomial::new(v))
}

impl Serialize for ExactPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            exact: true,
            coeffs: self.coeffs().iter().map(|c| c.to_strings()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        exact_from_wire(&w).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip() {
        let p = Polynomial::new(vec![
            XComplex::new(0.1, -2.5),
            XComplex::ZERO,
            XComplex::from_polar_ln(-5000.0, 0.3),
        ]);
        let s = serde_json::to_string(&p).unwrap();
        let q: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(p.coeff(0), q.coeff(0));
        assert!(p.coeff(2).approx_eq(&q.coeff(2), 1e-12));
    }

    #[test]
    fn exact_round_trip() {
        let p = ExactPolynomial::parse("(1/3+2i)z^2 - 5/7").unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"exact\":true"));
        let q: ExactPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let f: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(f.degree(), Some(2));
    }
}

/// `f64` fields written as shortest round-trip decimal strings.
pub mod dec_f64 {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{x:?}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Num {
            S(String),
            F(f64),
        }
        match Num::deserialize(d)? {
            Num::S(s) => s.trim().parse().map_err(D::Error::custom),
            Num::F(x) => Ok(x),
        }
    }

    #[cfg(test)]
    mod tests {
        #[derive(serde::Serialize, serde::Deserialize)]
        struct W(#[serde(with = "super")] f64);

        #[test]
        fn extremes_stay_compact() {
            for x in [4.45e-308, 5e-324, 1.7e308, 0.1, -3.0, 1e-7] {
                let s = serde_json::to_string(&W(x)).unwrap();
                assert!(s.len() < 30, "{s}");
                assert_eq!(serde_json::from_str::<W>(&s).unwrap().0, x);
            }
        }
    }
}
