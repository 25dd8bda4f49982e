use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Scalar function `h` of an identity-form loss `ℓ(ŷ, y) = Σ_c y_c · h(ŷ_c)`.
///
/// `h` must be nonnegative on `[eps, 1]` and vanish as `x → 1⁻`, otherwise a
/// perfectly confident correct prediction would still be penalized.
pub trait ScalarLink<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn h(&self, x: T) -> T;

    fn dh(&self, x: T) -> T;

    fn d2h(&self, x: T) -> T;

    /// `sup |h'(x)|` over `x ∈ [eps, 1]`.
    fn sup_abs_dh(&self, eps: T) -> T;

    /// `sup |h''(x)|` over `x ∈ [eps, 1]`.
    fn sup_abs_d2h(&self, eps: T) -> T;

    /// Maximum of `h` over `[eps, 1]`. Both shipped links are decreasing, so
    /// the default evaluates at the lower end.
    fn max_value(&self, eps: T) -> T {
        self.h(eps)
    }
}

/// Cross-entropy link, `h(x) = -ln x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CrossEntropy;

/// Reduced Jeffries-Matusita link, `h(x) = 1 - √x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReducedJm;

impl<T: Scalar> ScalarLink<T> for CrossEntropy {
    fn name(&self) -> &str {
        "ce"
    }

    fn h(&self, x: T) -> T {
        -x.ln()
    }

    fn dh(&self, x: T) -> T {
        -x.recip()
    }

    fn d2h(&self, x: T) -> T {
        (x * x).recip()
    }

    fn sup_abs_dh(&self, eps: T) -> T {
        eps.recip()
    }

    fn sup_abs_d2h(&self, eps: T) -> T {
        (eps * eps).recip()
    }
}

impl<T: Scalar> ScalarLink<T> for ReducedJm {
    fn name(&self) -> &str {
        "rjm"
    }

    fn h(&self, x: T) -> T {
        T::one() - x.sqrt()
    }

    fn dh(&self, x: T) -> T {
        -(T::lit(2.0) * x.sqrt()).recip()
    }

    fn d2h(&self, x: T) -> T {
        (T::lit(4.0) * x * x.sqrt()).recip()
    }

    fn sup_abs_dh(&self, eps: T) -> T {
        (T::lit(2.0) * eps.sqrt()).recip()
    }

    fn sup_abs_d2h(&self, eps: T) -> T {
        (T::lit(4.0) * eps * eps.sqrt()).recip()
    }
}

/// Named loss choice used by configs and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Ce,
    Rjm,
}

impl LossKind {
    pub const ALL: [LossKind; 2] = [LossKind::Ce, LossKind::Rjm];

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Ce => "ce",
            LossKind::Rjm => "rjm",
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ce" | "cross-entropy" => Ok(LossKind::Ce),
            "rjm" => Ok(LossKind::Rjm),
            other => Err(format!("unknown loss '{other}' (expected ce or rjm)")),
        }
    }
}

macro_rules! dispatch {
    ($self:ident, $link:ident => $body:expr) => {
        match $self {
            LossKind::Ce => {
                let $link = CrossEntropy;
                $body
            }
            LossKind::Rjm => {
                let $link = ReducedJm;
                $body
            }
        }
    };
}

impl<T: Scalar> ScalarLink<T> for LossKind {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn h(&self, x: T) -> T {
        dispatch!(self, l => ScalarLink::<T>::h(&l, x))
    }

    fn dh(&self, x: T) -> T {
        dispatch!(self, l => ScalarLink::<T>::dh(&l, x))
    }

    fn d2h(&self, x: T) -> T {
        dispatch!(self, l => ScalarLink::<T>::d2h(&l, x))
    }

    fn sup_abs_dh(&self, eps: T) -> T {
        dispatch!(self, l => ScalarLink::<T>::sup_abs_dh(&l, eps))
    }

    fn sup_abs_d2h(&self, eps: T) -> T {
        dispatch!(self, l => ScalarLink::<T>::sup_abs_d2h(&l, eps))
    }
}
