use super::dataset::Dataset;
use super::slfn::Slfn;
use crate::error::{Error, Result};
use crate::map::ComponentMap;

/// Quadrature estimate of `[ int_X |f_L - f|^2 dx ]^(1/2)` over the
/// target's grid (value channel).
pub fn l2_error(net: &Slfn, target: &ComponentMap) -> Result<f64> {
    if net.input_dim != target.dim() {
        return Err(Error::Dimension {
            what: "network input vs map".into(),
            expected: target.dim(),
            got: net.input_dim,
        });
    }
    if let Some(d) = &net.input_domain {
        if d != &target.domain {
            return Err(Error::Domain(format!(
                "network domain {d:?} differs from map domain {:?}",
                target.domain
            )));
        }
    }
    let w = target.quadrature_weights();
    let sum: f64 = target
        .nodes()
        .iter()
        .zip(&target.value)
        .zip(&w)
        .map(|((x, y), w)| {
            let e = net.eval1(x) - y;
            w * e * e
        })
        .sum();
    Ok(sum.sqrt())
}

/// Discrete L2 error of a net over a dataset (all outputs).
pub(crate) fn dataset_l2(net: &Slfn, data: &Dataset) -> f64 {
    let w = data.quadrature_weights();
    data.inputs
        .iter()
        .zip(&data.targets)
        .zip(&w)
        .map(|((x, t), w)| {
            let y = net.forward_unchecked(x);
            w * y.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}
