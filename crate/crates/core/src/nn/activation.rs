use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Identity,
    Relu,
    /// `x` for `x >= 0`, `alpha * x` otherwise, with `0 < alpha < 1`.
    LeakyRelu(f64),
    Sigmoid,
}

impl Activation {
    pub fn validate(self) -> Result<(), Error> {
        match self {
            Activation::LeakyRelu(a) if !(a > 0.0 && a < 1.0) => Err(Error::InvalidArgument(
                format!("leaky_relu slope must lie in (0, 1), got {a}"),
            )),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(T::zero()),
            Activation::LeakyRelu(a) => {
                if z >= T::zero() {
                    z
                } else {
                    T::of(a) * z
                }
            }
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative at pre-activation `z`, given the activated output `out`.
    #[inline]
    pub fn derivative<T: Scalar>(self, z: T, out: T) -> T {
        match self {
            Activation::Identity => T::one(),
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::LeakyRelu(a) => {
                if z >= T::zero() {
                    T::one()
                } else {
                    T::of(a)
                }
            }
            Activation::Sigmoid => out * (T::one() - out),
        }
    }
}

fn sigmoid<T: Scalar>(z: T) -> T {
    // split on sign so exp never overflows
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Identity => f.write_str("identity"),
            Activation::Relu => f.write_str("relu"),
            Activation::LeakyRelu(a) => write!(f, "leaky_relu:{a}"),
            Activation::Sigmoid => f.write_str("sigmoid"),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let act = match s.trim() {
            "identity" | "linear" => Activation::Identity,
            "relu" => Activation::Relu,
            "sigmoid" => Activation::Sigmoid,
            "leaky_relu" => Activation::LeakyRelu(0.2),
            other => match other.strip_prefix("leaky_relu:") {
                Some(a) => Activation::LeakyRelu(a.parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad leaky_relu slope in {other:?}"))
                })?),
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown activation {other:?}"
                    )))
                }
            },
        };
        act.validate()?;
        Ok(act)
    }
}
