use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{Domain, SCHEMA_VERSION};

/// Hidden-node activation.
///
/// Only bounded, nonconstant, continuous functions are accepted by
/// [`Slfn::new`]; `Identity` exists for exact-polynomial gradient checks
/// and linear test components and needs [`Slfn::new_unrestricted`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    Tanh,
    Identity,
}

impl Activation {
    pub fn eval(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                let s = self.eval(z);
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }

    /// Bounded, nonconstant and continuous.
    pub fn is_whitelisted(self) -> bool {
        matches!(self, Activation::Sigmoid | Activation::Tanh)
    }
}

/// Single-hidden-layer feedforward network
/// `f(x) = sum_i beta_i g(a_i . z + b_i)` where `z` is `x` mapped from
/// `input_domain` onto `[-1, 1]^d` (or `x` itself when no domain is set).
///
/// Weight arrays are row-major: `weights` is `hidden x input_dim`, `beta`
/// is `output_dim x hidden`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Slfn {
    pub schema_version: u32,
    pub activation: Activation,
    pub input_dim: usize,
    pub hidden: usize,
    pub output_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_domain: Option<Domain>,
}

impl Slfn {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        activation: Activation,
        input_dim: usize,
        hidden: usize,
        output_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        beta: Vec<f64>,
        input_domain: Option<Domain>,
    ) -> Result<Self> {
        let net = Self::new_unrestricted(
            activation,
            input_dim,
            hidden,
            output_dim,
            weights,
            biases,
            beta,
            input_domain,
        )?;
        net.check_activation()?;
        Ok(net)
    }

    /// Like [`Slfn::new`] but accepts any activation.
    #[allow(clippy::too_many_arguments)]
    pub fn new_unrestricted(
        activation: Activation,
        input_dim: usize,
        hidden: usize,
        output_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        beta: Vec<f64>,
        input_domain: Option<Domain>,
    ) -> Result<Self> {
        let net = Slfn {
            schema_version: SCHEMA_VERSION,
            activation,
            input_dim,
            hidden,
            output_dim,
            weights,
            biases,
            beta,
            input_domain,
        };
        net.validate_structure()?;
        Ok(net)
    }

    fn check_activation(&self) -> Result<()> {
        if self.activation.is_whitelisted() {
            Ok(())
        } else {
            Err(Error::invalid(
                "activation",
                format!("{:?} is not bounded, nonconstant and continuous", self.activation),
            ))
        }
    }

    /// Shapes, finiteness and schema version; the activation is not checked.
    pub fn validate_structure(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        if self.hidden == 0 {
            return Err(Error::invalid("hidden", "need at least one hidden node"));
        }
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::invalid("input_dim/output_dim", "must be >= 1"));
        }
        for (name, v, n) in [
            ("weights", &self.weights, self.hidden * self.input_dim),
            ("biases", &self.biases, self.hidden),
            ("beta", &self.beta, self.output_dim * self.hidden),
        ] {
            if v.len() != n {
                return Err(Error::Dimension {
                    what: name.into(),
                    expected: n,
                    got: v.len(),
                });
            }
            if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("{name}[{k}]")));
            }
        }
        if let Some(d) = &self.input_domain {
            d.validate()?;
            if d.dim() != self.input_dim {
                return Err(Error::Dimension {
                    what: "input_domain".into(),
                    expected: self.input_dim,
                    got: d.dim(),
                });
            }
        }
        Ok(())
    }

    /// Parse and fully validate, including the activation whitelist.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let net: Slfn = serde_json::from_str(s)?;
        net.validate_structure()?;
        net.check_activation()?;
        Ok(net)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len() + self.beta.len()
    }

    /// Input after the optional unit-box scaling.
    pub fn scale_input(&self, x: &[f64]) -> Vec<f64> {
        match &self.input_domain {
            Some(d) => d.to_unit(x),
            None => x.to_vec(),
        }
    }

    /// Hidden pre-activations `a_i . z + b_i` for a scaled input `z`.
    pub(crate) fn preactivations(&self, z: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|i| {
                let row = &self.weights[i * self.input_dim..(i + 1) * self.input_dim];
                row.iter().zip(z).map(|(a, x)| a * x).sum::<f64>() + self.biases[i]
            })
            .collect()
    }

    pub fn hidden_outputs(&self, x: &[f64]) -> Vec<f64> {
        let z = self.scale_input(x);
        self.preactivations(&z)
            .into_iter()
            .map(|p| self.activation.eval(p))
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension {
                what: "network input".into(),
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let h = self.hidden_outputs(x);
        (0..self.output_dim)
            .map(|o| {
                self.beta[o * self.hidden..(o + 1) * self.hidden]
                    .iter()
                    .zip(&h)
                    .map(|(b, a)| b * a)
                    .sum()
            })
            .collect()
    }

    /// Scalar output for single-output nets.
    pub fn eval1(&self, x: &[f64]) -> f64 {
        self.forward_unchecked(x)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Slfn {
        Slfn::new(
            Activation::Sigmoid,
            2,
            3,
            1,
            vec![0.1, -0.2, 0.3, 0.4, -0.5, 0.6],
            vec![0.0, 0.1, -0.1],
            vec![1.0, -2.0, 0.5],
            None,
        )
        .unwrap()
    }

    #[test]
    fn zero_beta_gives_zero_output() {
        let mut n = tiny();
        n.beta = vec![0.0; 3];
        assert_eq!(n.forward(&[0.3, -7.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn constant_feature() {
        let n = Slfn::new(Activation::Sigmoid, 1, 1, 1, vec![0.0], vec![0.0], vec![2.0], None).unwrap();
        for x in [-5.0, 0.0, 3.3] {
            assert_eq!(n.forward(&[x]).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(tiny().forward(&[1.0]).is_err());
    }

    #[test]
    fn whitelist_enforced() {
        let e = Slfn::new(Activation::Identity, 1, 1, 1, vec![1.0], vec![0.0], vec![1.0], None);
        assert!(e.is_err());
        assert!(Slfn::new_unrestricted(Activation::Identity, 1, 1, 1, vec![1.0], vec![0.0], vec![1.0], None).is_ok());
        let mut json: serde_json::Value = serde_json::to_value(tiny()).unwrap();
        json["activation"] = "identity".into();
        assert!(Slfn::from_json_str(&json.to_string()).is_err());
    }

    #[test]
    fn shape_errors() {
        assert!(Slfn::new(Activation::Tanh, 1, 0, 1, vec![], vec![], vec![], None).is_err());
        assert!(Slfn::new(Activation::Tanh, 1, 2, 1, vec![1.0], vec![0.0, 0.0], vec![1.0, 1.0], None).is_err());
        assert!(Slfn::new(Activation::Tanh, 1, 1, 1, vec![f64::NAN], vec![0.0], vec![1.0], None).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for act in [Activation::Sigmoid, Activation::Tanh, Activation::Identity] {
            for z in [-3.0, -0.2, 0.0, 1.7] {
                let h = 1e-6;
                let fd = (act.eval(z + h) - act.eval(z - h)) / (2.0 * h);
                assert!((fd - act.derivative(z)).abs() < 1e-9);
            }
        }
    }
}
