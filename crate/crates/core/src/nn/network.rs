use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use super::Activation;
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

/// One affine layer followed by an elementwise activation.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T> {
    /// `out x in`
    pub weights: Matrix<T>,
    pub bias: Vec<T>,
    pub activation: Activation,
}

impl<T: Scalar> DenseLayer<T> {
    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Feed-forward stack of dense layers.
///
/// Every parameter mutation bumps an internal revision; a [`ForwardCache`]
/// remembers the revision it was computed at so `backward` can reject stale
/// caches.
#[derive(Debug)]
pub struct DenseNetwork<T> {
    layers: Vec<DenseLayer<T>>,
    revision: u64,
}

impl<T: Clone> Clone for DenseNetwork<T> {
    fn clone(&self) -> Self {
        Self {
            layers: self.layers.clone(),
            revision: fresh_id(),
        }
    }
}

impl<T: PartialEq> PartialEq for DenseNetwork<T> {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

impl<T: Scalar> DenseNetwork<T> {
    pub fn new(layers: Vec<DenseLayer<T>>) -> Result<Self> {
        if layers.is_empty() {
            return invalid("a network needs at least one layer");
        }
        for (k, layer) in layers.iter().enumerate() {
            layer.activation.validate()?;
            if layer.in_dim() == 0 || layer.out_dim() == 0 {
                return invalid(format!("layer {k} has zero width"));
            }
            if layer.bias.len() != layer.out_dim() {
                return Err(Error::DimensionMismatch {
                    context: "layer bias",
                    expected: layer.out_dim(),
                    actual: layer.bias.len(),
                });
            }
            if !layer.weights.all_finite() || !layer.bias.iter().all(|b| b.is_finite()) {
                return Err(Error::NonFinite(format!("layer {k} parameters")));
            }
            if k > 0 && layers[k - 1].out_dim() != layer.in_dim() {
                return Err(Error::DimensionMismatch {
                    context: "layer chaining",
                    expected: layers[k - 1].out_dim(),
                    actual: layer.in_dim(),
                });
            }
        }
        Ok(Self {
            layers,
            revision: fresh_id(),
        })
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn layers(&self) -> &[DenseLayer<T>] {
        &self.layers
    }

    /// Mutable parameter access; invalidates outstanding forward caches.
    pub fn layers_mut(&mut self) -> &mut [DenseLayer<T>] {
        self.revision = fresh_id();
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    fn check_input(&self, batch: &Matrix<T>) -> Result<()> {
        if batch.cols() != self.in_dim() {
            return Err(Error::DimensionMismatch {
                context: "network input width",
                expected: self.in_dim(),
                actual: batch.cols(),
            });
        }
        if !batch.all_finite() {
            return Err(Error::NonFinite("network input".into()));
        }
        Ok(())
    }

    /// Output only, without keeping intermediates.
    pub fn predict(&self, batch: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_input(batch)?;
        let mut x = batch.clone();
        for layer in &self.layers {
            let mut z = affine(layer, &x);
            z.as_mut_slice()
                .iter_mut()
                .for_each(|v| *v = layer.activation.apply(*v));
            x = z;
        }
        Ok(x)
    }

    /// Output plus the per-layer inputs and pre-activations needed by [`Self::backward`].
    pub fn forward(&self, batch: &Matrix<T>) -> Result<(Matrix<T>, ForwardCache<T>)> {
        self.check_input(batch)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for layer in &self.layers {
            let z = affine(layer, &x);
            let out = z.map(|v| layer.activation.apply(v));
            inputs.push(x);
            pre.push(z);
            x = out;
        }
        let cache = ForwardCache {
            revision: self.revision,
            inputs,
            pre,
            output: x.clone(),
        };
        Ok((x, cache))
    }

    /// Reverse-mode gradients for a loss whose gradient at the network output
    /// is `grad_out`. Returns the parameter gradients and the gradient at the
    /// network input.
    pub fn backward(
        &self,
        cache: &ForwardCache<T>,
        grad_out: &Matrix<T>,
    ) -> Result<(GradientSet<T>, Matrix<T>)> {
        if cache.revision != self.revision || cache.pre.len() != self.layers.len() {
            return Err(Error::StaleCache(
                "cache was produced by a different network or before a parameter update".into(),
            ));
        }
        let rows = cache.output.rows();
        if grad_out.rows() != rows || grad_out.cols() != self.out_dim() {
            return Err(Error::DimensionMismatch {
                context: "output gradient",
                expected: rows * self.out_dim(),
                actual: grad_out.rows() * grad_out.cols(),
            });
        }

        let mut grads: Vec<LayerGrad<T>> = Vec::with_capacity(self.layers.len());
        let mut upstream = grad_out.clone();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let z = &cache.pre[k];
            let input = &cache.inputs[k];
            // output of layer k is the input of layer k + 1, or the final output
            let out = cache.inputs.get(k + 1).unwrap_or(&cache.output);
            let mut dz = upstream;
            for ((g, &zv), &ov) in dz
                .as_mut_slice()
                .iter_mut()
                .zip(z.as_slice())
                .zip(out.as_slice())
            {
                *g = *g * layer.activation.derivative(zv, ov);
            }

            let mut dw = Matrix::zeros(layer.out_dim(), layer.in_dim());
            let mut db = vec![T::zero(); layer.out_dim()];
            let mut dx = Matrix::zeros(rows, layer.in_dim());
            for m in 0..rows {
                let xin = input.row(m);
                let dzr = dz.row(m);
                let dxr = dx.row_mut(m);
                for (o, &g) in dzr.iter().enumerate() {
                    db[o] = db[o] + g;
                    let w = layer.weights.row(o);
                    for ((dwv, &xv), (dxv, &wv)) in
                        dw.row_mut(o).iter_mut().zip(xin).zip(dxr.iter_mut().zip(w))
                    {
                        *dwv = *dwv + g * xv;
                        *dxv = *dxv + g * wv;
                    }
                }
            }
            grads.push(LayerGrad {
                weights: dw,
                bias: db,
            });
            upstream = dx;
        }
        grads.reverse();
        Ok((GradientSet { layers: grads }, upstream))
    }
}

fn affine<T: Scalar>(layer: &DenseLayer<T>, x: &Matrix<T>) -> Matrix<T> {
    let mut z = Matrix::zeros(x.rows(), layer.out_dim());
    for m in 0..x.rows() {
        let xr = x.row(m);
        for (o, zv) in z.row_mut(m).iter_mut().enumerate() {
            *zv = dot(layer.weights.row(o), xr) + layer.bias[o];
        }
    }
    z
}

/// Intermediates of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    revision: u64,
    inputs: Vec<Matrix<T>>,
    pre: Vec<Matrix<T>>,
    output: Matrix<T>,
}

impl<T: Scalar> ForwardCache<T> {
    /// Pre-activation values of every layer, in order.
    pub fn pre_activations(&self) -> &[Matrix<T>] {
        &self.pre
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad<T> {
    pub weights: Matrix<T>,
    pub bias: Vec<T>,
}

/// Parameter gradients, one entry per layer, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet<T> {
    pub layers: Vec<LayerGrad<T>>,
}

impl<T: Scalar> GradientSet<T> {
    pub fn zeros_like(net: &DenseNetwork<T>) -> Self {
        Self {
            layers: net
                .layers()
                .iter()
                .map(|l| LayerGrad {
                    weights: Matrix::zeros(l.out_dim(), l.in_dim()),
                    bias: vec![T::zero(); l.out_dim()],
                })
                .collect(),
        }
    }

    pub fn matches(&self, net: &DenseNetwork<T>) -> bool {
        self.layers.len() == net.layers().len()
            && self.layers.iter().zip(net.layers()).all(|(g, l)| {
                g.weights.rows() == l.out_dim()
                    && g.weights.cols() == l.in_dim()
                    && g.bias.len() == l.out_dim()
            })
    }

    /// All gradient entries in layer order: weights row-major, then bias.
    pub fn flat(&self) -> Vec<T> {
        self.layers
            .iter()
            .flat_map(|g| g.weights.as_slice().iter().chain(&g.bias).copied())
            .collect()
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|g| g.weights.all_finite() && g.bias.iter().all(|v| v.is_finite()))
    }
}

/// Glorot-uniform weights `U(-sqrt(6 / (fan_in + fan_out)), +...)`, zero biases.
///
/// `sizes` lists the layer widths from input to output, so there are
/// `sizes.len() - 1` layers and as many activations.
pub fn init_network<T: Scalar, R: Rng + ?Sized>(
    sizes: &[usize],
    activations: &[Activation],
    rng: &mut R,
) -> Result<DenseNetwork<T>> {
    if sizes.len() < 2 {
        return invalid("a network needs at least one layer (two sizes)");
    }
    if activations.len() != sizes.len() - 1 {
        return Err(Error::DimensionMismatch {
            context: "activation count",
            expected: sizes.len() - 1,
            actual: activations.len(),
        });
    }
    if let Some(k) = sizes.iter().position(|&s| s == 0) {
        return invalid(format!("layer width {k} is zero"));
    }
    let layers = sizes
        .windows(2)
        .zip(activations)
        .map(|(w, &activation)| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data = (0..fan_in * fan_out)
                .map(|_| T::of(limit * (2.0 * rng.random::<f64>() - 1.0)))
                .collect();
            DenseLayer {
                weights: Matrix::from_vec(fan_out, fan_in, data).expect("sized"),
                bias: vec![T::zero(); fan_out],
                activation,
            }
        })
        .collect();
    DenseNetwork::new(layers)
}
