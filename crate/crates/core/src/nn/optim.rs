use super::{DenseNetwork, GradientSet};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    /// `a <- rho a + (1 - rho) g^2`, `w <- w - lr g / sqrt(a + eps)`.
    RmsProp {
        rho: f64,
        eps: f64,
    },
}

impl OptimizerKind {
    pub fn rmsprop() -> Self {
        OptimizerKind::RmsProp {
            rho: 0.9,
            eps: 1e-8,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::RmsProp { .. } => "rmsprop",
        }
    }
}

/// Optimizer hyperparameters plus per-parameter accumulators for one network.
#[derive(Debug, Clone)]
pub struct OptimizerState<T> {
    kind: OptimizerKind,
    lr: f64,
    accumulators: Option<GradientSet<T>>,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(kind: OptimizerKind, lr: f64) -> Result<Self> {
        if !(lr.is_finite() && lr > 0.0) {
            return invalid(format!("learning rate must be positive, got {lr}"));
        }
        if let OptimizerKind::RmsProp { rho, eps } = kind {
            if !(rho > 0.0 && rho < 1.0) {
                return invalid(format!("rmsprop decay must lie in (0, 1), got {rho}"));
            }
            if !(eps.is_finite() && eps > 0.0) {
                return invalid(format!("rmsprop epsilon must be positive, got {eps}"));
            }
        }
        Ok(Self {
            kind,
            lr,
            accumulators: None,
        })
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    /// Applies one descent step to `net`.
    pub fn step(&mut self, net: &mut DenseNetwork<T>, grads: &GradientSet<T>) -> Result<()> {
        if !grads.matches(net) {
            return Err(Error::DimensionMismatch {
                context: "optimizer gradients",
                expected: net.param_count(),
                actual: grads.flat().len(),
            });
        }
        if !grads.all_finite() {
            let bad = grads.flat().iter().filter(|v| !v.is_finite()).count();
            return Err(Error::NonFinite(format!(
                "{bad} gradient entries; parameters left unchanged"
            )));
        }
        let lr = T::of(self.lr);
        match self.kind {
            OptimizerKind::Sgd => {
                for (layer, g) in net.layers_mut().iter_mut().zip(&grads.layers) {
                    layer.weights.axpy(-lr, &g.weights);
                    for (b, &gb) in layer.bias.iter_mut().zip(&g.bias) {
                        *b = *b - lr * gb;
                    }
                }
            }
            OptimizerKind::RmsProp { rho, eps } => {
                let rho = T::of(rho);
                let eps = T::of(eps);
                let acc = self
                    .accumulators
                    .get_or_insert_with(|| GradientSet::zeros_like(net));
                let update = |w: &mut [T], a: &mut [T], g: &[T]| {
                    for ((wv, av), &gv) in w.iter_mut().zip(a.iter_mut()).zip(g) {
                        *av = rho * *av + (T::one() - rho) * gv * gv;
                        *wv = *wv - lr * gv / (*av + eps).sqrt();
                    }
                };
                for ((layer, a), g) in net
                    .layers_mut()
                    .iter_mut()
                    .zip(acc.layers.iter_mut())
                    .zip(&grads.layers)
                {
                    update(
                        layer.weights.as_mut_slice(),
                        a.weights.as_mut_slice(),
                        g.weights.as_slice(),
                    );
                    update(&mut layer.bias, &mut a.bias, &g.bias);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::nn::{Activation, DenseLayer};

    fn scalar_net(w: f64) -> DenseNetwork<f64> {
        DenseNetwork::new(vec![DenseLayer {
            weights: Matrix::from_rows(&[[w]]).unwrap(),
            bias: vec![0.0],
            activation: Activation::Identity,
        }])
        .unwrap()
    }

    fn grads(g: f64) -> GradientSet<f64> {
        GradientSet {
            layers: vec![crate::nn::LayerGrad {
                weights: Matrix::from_rows(&[[g]]).unwrap(),
                bias: vec![0.0],
            }],
        }
    }

    #[test]
    fn sgd_step() {
        let mut net = scalar_net(1.0);
        let mut opt = OptimizerState::new(OptimizerKind::Sgd, 0.1).unwrap();
        opt.step(&mut net, &grads(2.0)).unwrap();
        assert!((net.layers()[0].weights[(0, 0)] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        for kind in [OptimizerKind::Sgd, OptimizerKind::rmsprop()] {
            let mut net = scalar_net(0.7);
            let mut opt = OptimizerState::new(kind, 0.01).unwrap();
            opt.step(&mut net, &grads(0.0)).unwrap();
            assert_eq!(net.layers()[0].weights[(0, 0)], 0.7);
        }
    }

    #[test]
    fn rmsprop_first_step() {
        let mut net = scalar_net(1.0);
        let mut opt = OptimizerState::new(OptimizerKind::rmsprop(), 0.001).unwrap();
        opt.step(&mut net, &grads(1.0)).unwrap();
        let expected = 1.0 - 0.001 / (0.1f64 + 1e-8).sqrt();
        assert!((net.layers()[0].weights[(0, 0)] - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_and_bad_hyperparameters() {
        let mut net = scalar_net(1.0);
        let mut opt = OptimizerState::new(OptimizerKind::Sgd, 0.1).unwrap();
        let err = opt.step(&mut net, &grads(f64::NAN)).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        assert_eq!(net.layers()[0].weights[(0, 0)], 1.0);
        assert!(OptimizerState::<f64>::new(OptimizerKind::Sgd, 0.0).is_err());
        assert!(OptimizerState::<f64>::new(
            OptimizerKind::RmsProp {
                rho: 1.0,
                eps: 1e-8
            },
            0.1
        )
        .is_err());
        assert!(
            OptimizerState::<f64>::new(OptimizerKind::RmsProp { rho: 0.9, eps: 0.0 }, 0.1).is_err()
        );
    }
}
