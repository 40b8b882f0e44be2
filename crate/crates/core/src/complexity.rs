//! Design-problem size accounting for the three design schemes.

use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;

use crate::symmetric::{
    difference_set, hadamard_level, hadamard_sign, symmetric_codebook, SymmetricProfile,
    DEFAULT_MERGE_TOLERANCE,
};
use crate::{Error, MappingMatrix, Result};

/// How the distance constraints of the design problem are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Every pair of superimposed codewords; every codebook entry is free.
    Full,
    /// Combined per-user difference sets; every codebook entry is free.
    ConventionalDifference,
    /// Combined difference sets of Hadamard-signed codebooks; only magnitudes are free.
    Symmetric,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Full => "full",
            Scheme::ConventionalDifference => "conventional",
            Scheme::Symmetric => "symmetric",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Scheme::Full),
            "conventional" | "conventional-difference" => Ok(Scheme::ConventionalDifference),
            "symmetric" => Ok(Scheme::Symmetric),
            _ => Err(Error::InvalidOption("scheme must be full, conventional or symmetric")),
        }
    }
}

/// Variable count, per-user difference-set size and constraint count of a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityReport {
    pub scheme: Scheme,
    pub num_variables: u64,
    pub p: Option<u64>,
    pub num_constraints: u64,
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.p.map_or_else(|| "-".to_string(), |p| p.to_string());
        write!(f, "{}\t{}\t{}\t{}", self.scheme, self.num_variables, p, self.num_constraints)
    }
}

/// Distinct codeword differences of a unit-magnitude Hadamard-signed codebook of size `m`.
pub fn symmetric_difference_count(m: usize) -> Result<u64> {
    let sign = hadamard_sign(hadamard_level(m)?);
    let mapping = MappingMatrix::new(0, sign.rows(), (0..sign.rows()).collect())?;
    let profile = SymmetricProfile::new(alloc::vec![1.0; sign.rows()], sign, mapping)?;
    Ok(difference_set(&symmetric_codebook(&profile)?, DEFAULT_MERGE_TOLERANCE).len() as u64)
}

fn overflow(exact: BigUint) -> Error {
    Error::CountOverflow { exact: exact.to_string() }
}

fn pow_minus_one(base: u64, exp: usize) -> Result<u64> {
    let exp32 = u32::try_from(exp).map_err(|_| Error::InvalidOption("user count too large"))?;
    base.checked_pow(exp32)
        .map(|v| v - 1)
        .ok_or_else(|| overflow(BigUint::from(base).pow(exp32) - 1u32))
}

/// Sizes of the design problem for `j` users with codebook size `m` and `n_real`
/// real resources per user.
pub fn complexity_report(
    scheme: Scheme,
    m: usize,
    j: usize,
    n_real: usize,
    p_symmetric: Option<u64>,
) -> Result<ComplexityReport> {
    if m < 2 || j < 1 || n_real < 1 {
        return Err(Error::InvalidOption("complexity needs M >= 2, J >= 1, N >= 1"));
    }
    let (m64, j64, n64) = (m as u64, j as u64, n_real as u64);
    let entries = j64
        .checked_mul(m64)
        .and_then(|v| v.checked_mul(n64))
        .ok_or_else(|| overflow(BigUint::from(j64) * m64 * n64))?;
    let report = match scheme {
        Scheme::Full => {
            let exp = u32::try_from(j).map_err(|_| Error::InvalidOption("user count too large"))?;
            let constraints = m64
                .checked_pow(exp)
                .and_then(|s| s.checked_mul(s - 1))
                .map(|v| v / 2)
                .ok_or_else(|| {
                    let s = BigUint::from(m64).pow(exp);
                    overflow(&s * (&s - 1u32) / 2u32)
                })?;
            ComplexityReport { scheme, num_variables: entries, p: None, num_constraints: constraints }
        }
        Scheme::ConventionalDifference => {
            let p = m64 * (m64 - 1) + 1;
            ComplexityReport {
                scheme,
                num_variables: entries,
                p: Some(p),
                num_constraints: pow_minus_one(p, j)?,
            }
        }
        Scheme::Symmetric => {
            let p = match p_symmetric {
                Some(p) => p,
                None => symmetric_difference_count(m)?,
            };
            ComplexityReport {
                scheme,
                num_variables: j64 * n64,
                p: Some(p),
                num_constraints: pow_minus_one(p, j)?,
            }
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_rows() {
        let full = complexity_report(Scheme::Full, 4, 6, 4, None).unwrap();
        assert_eq!((full.num_variables, full.p, full.num_constraints), (96, None, 8_386_560));
        let conv = complexity_report(Scheme::ConventionalDifference, 4, 6, 4, None).unwrap();
        assert_eq!((conv.num_variables, conv.p, conv.num_constraints), (96, Some(13), 4_826_808));
        let sym = complexity_report(Scheme::Symmetric, 4, 6, 4, Some(9)).unwrap();
        assert_eq!((sym.num_variables, sym.p, sym.num_constraints), (24, Some(9), 531_440));
        assert_eq!(complexity_report(Scheme::Symmetric, 4, 6, 4, None).unwrap(), sym);
    }

    #[test]
    fn symmetric_p_bounded_by_generic() {
        for m in [2usize, 4, 8, 16] {
            let p = symmetric_difference_count(m).unwrap();
            assert!(p <= (m * (m - 1) + 1) as u64, "m = {m}: p = {p}");
        }
        assert_eq!(symmetric_difference_count(4).unwrap(), 9);
        assert_eq!(symmetric_difference_count(3), Err(Error::NotPowerOfTwo(3)));
    }

    #[test]
    fn overflow_reports_exact_count() {
        let err = complexity_report(Scheme::Full, 4, 40, 4, None).unwrap_err();
        let s = BigUint::from(4u32).pow(40);
        let exact = (&s * (&s - 1u32) / 2u32).to_string();
        assert_eq!(err, Error::CountOverflow { exact });
        let err = complexity_report(Scheme::ConventionalDifference, 4, 20, 4, None).unwrap_err();
        assert_eq!(err, Error::CountOverflow { exact: (BigUint::from(13u32).pow(20) - 1u32).to_string() });
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [Scheme::Full, Scheme::ConventionalDifference, Scheme::Symmetric] {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("lds".parse::<Scheme>().is_err());
    }
}
