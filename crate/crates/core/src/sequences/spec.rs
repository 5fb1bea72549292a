//! Strictly increasing integer sequences `(k_n)`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceSpec {
    /// `a n + b`, `n = 1, 2, ...`
    Affine { a: u64, b: i64 },
    /// `n^c`
    Power { c: u32 },
    Explicit { terms: Vec<u64> },
}

impl SequenceSpec {
    pub fn affine(a: u64, b: i64) -> Result<SequenceSpec> {
        let s = SequenceSpec::Affine { a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn power(c: u32) -> Result<SequenceSpec> {
        let s = SequenceSpec::Power { c };
        s.validate()?;
        Ok(s)
    }

    pub fn explicit(terms: Vec<u64>) -> Result<SequenceSpec> {
        let s = SequenceSpec::Explicit { terms };
        s.validate()?;
        Ok(s)
    }

    pub fn naturals() -> SequenceSpec {
        SequenceSpec::Affine { a: 1, b: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceSpec::Affine { a, b } => {
                if *a == 0 || (*a as i64) + b < 1 {
                    return Err(Error::invalid(format!("affine sequence {a}n{b:+} is not positive increasing")));
                }
            }
            SequenceSpec::Power { c } => {
                if *c == 0 {
                    return Err(Error::invalid("power sequence needs exponent >= 1"));
                }
            }
            SequenceSpec::Explicit { terms } => {
                if terms.first() == Some(&0) {
                    return Err(Error::invalid("explicit sequence terms must be positive"));
                }
                if let Some(w) = terms.windows(2).find(|w| w[1] <= w[0]) {
                    return Err(Error::invalid(format!(
                        "explicit sequence is not strictly increasing at {} -> {}",
                        w[0], w[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// `k_n` for `n >= 1`; `None` once an explicit list is exhausted or the
    /// term would overflow.
    pub fn term(&self, n: u64) -> Option<u64> {
        assert!(n >= 1, "sequences are indexed from 1");
        match self {
            SequenceSpec::Affine { a, b } => a.checked_mul(n).and_then(|x| x.checked_add_signed(*b)),
            SequenceSpec::Power { c } => n.checked_pow(*c),
            SequenceSpec::Explicit { terms } => terms.get(n as usize - 1).copied(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (1u64..).map_while(move |n| self.term(n))
    }

    /// Growth exponent for the closed forms: 1 for affine, `c` for powers.
    pub fn exponent(&self) -> Option<u32> {
        match self {
            SequenceSpec::Affine { .. } => Some(1),
            SequenceSpec::Power { c } => Some(*c),
            SequenceSpec::Explicit { .. } => None,
        }
    }

    /// Parses `n`, `2n+1`, `3n-2`, `n^2`, or `@file` (one integer per line).
    pub fn parse(s: &str) -> Result<SequenceSpec> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("invalid sequence {s:?}"));
        if let Some(path) = t.strip_prefix('@') {
            return SequenceSpec::from_file(Path::new(path));
        }
        if let Some(c) = t.strip_prefix("n^") {
            return SequenceSpec::power(c.parse().map_err(|_| bad())?);
        }
        let npos = t.find('n').ok_or_else(bad)?;
        let a: u64 = match &t[..npos] {
            "" => 1,
            x => x.trim_end_matches('*').parse().map_err(|_| bad())?,
        };
        let rest = &t[npos + 1..];
        let b: i64 = match rest {
            "" => 0,
            x if x.starts_with('+') || x.starts_with('-') => x.parse().map_err(|_| bad())?,
            _ => return Err(bad()),
        };
        SequenceSpec::affine(a, b)
    }

    pub fn from_file(path: &Path) -> Result<SequenceSpec> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        let mut terms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let l = line.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            terms.push(
                l.parse()
                    .map_err(|_| Error::Parse(format!("{}:{}: not an integer: {l:?}", path.display(), i + 1)))?,
            );
        }
        SequenceSpec::explicit(terms)
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::Affine { a, b } => {
                let lead = if *a == 1 { String::new() } else { a.to_string() };
                match b.cmp(&0) {
                    std::cmp::Ordering::Equal => write!(f, "{lead}n"),
                    _ => write!(f, "{lead}n{b:+}"),
                }
            }
            SequenceSpec::Power { c } => write!(f, "n^{c}"),
            SequenceSpec::Explicit { terms } => write!(f, "explicit[{} terms]", terms.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators() {
        let v: Vec<u64> = SequenceSpec::naturals().iter().take(3).collect();
        assert_eq!(v, [1, 2, 3]);
        let v: Vec<u64> = SequenceSpec::power(2).unwrap().iter().take(4).collect();
        assert_eq!(v, [1, 4, 9, 16]);
        let e = SequenceSpec::explicit(vec![2, 3, 5, 7]).unwrap();
        assert_eq!(e.iter().collect::<Vec<_>>(), [2, 3, 5, 7]);
        assert_eq!(e.term(5), None);
    }

    #[test]
    fn rejects_non_increasing() {
        assert!(SequenceSpec::explicit(vec![2, 2, 3]).is_err());
        assert!(SequenceSpec::explicit(vec![0, 1]).is_err());
        assert!(SequenceSpec::affine(1, -1).is_err());
        assert!(SequenceSpec::power(0).is_err());
    }

    #[test]
    fn mini_language() {
        assert_eq!(SequenceSpec::parse("n").unwrap(), SequenceSpec::naturals());
        assert_eq!(SequenceSpec::parse("2n+1").unwrap(), SequenceSpec::Affine { a: 2, b: 1 });
        assert_eq!(SequenceSpec::parse("3n-2").unwrap(), SequenceSpec::Affine { a: 3, b: -2 });
        assert_eq!(SequenceSpec::parse("n^2").unwrap(), SequenceSpec::Power { c: 2 });
        assert!(SequenceSpec::parse("m").is_err());
        assert!(SequenceSpec::parse("2n*3").is_err());
        for s in ["n", "2n+1", "3n-2", "n^3"] {
            assert_eq!(SequenceSpec::parse(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn file_source() {
        let dir = std::env::temp_dir().join(format!("hc-seq-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("primes.txt");
        std::fs::write(&p, "2\n3\n\n5\n7\n").unwrap();
        let s = SequenceSpec::parse(&format!("@{}", p.display())).unwrap();
        assert_eq!(s, SequenceSpec::Explicit { terms: vec![2, 3, 5, 7] });
        std::fs::write(&p, "2\n1\n").unwrap();
        assert!(SequenceSpec::parse(&format!("@{}", p.display())).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
