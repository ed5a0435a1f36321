//! Fully-connected network with batch normalization.
//!
//! Batches are row-major: one sample per row.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use super::config::{BatchNormPlacement, MlpConfig, OutputActivation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Running-statistics momentum of batch normalization.
pub const BN_MOMENTUM: f64 = 0.99;
/// Variance offset of batch normalization.
pub const BN_EPSILON: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    /// `fan_in x fan_out`
    pub weights: Array2<T>,
    pub bias: Array1<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchNorm<T> {
    pub gamma: Array1<T>,
    pub beta: Array1<T>,
    pub running_mean: Array1<T>,
    pub running_var: Array1<T>,
}

impl<T: Scalar> BatchNorm<T> {
    fn new(n: usize) -> Self {
        Self {
            gamma: Array1::ones(n),
            beta: Array1::zeros(n),
            running_mean: Array1::zeros(n),
            running_var: Array1::ones(n),
        }
    }

    fn infer(&self, x: &mut Array2<T>) {
        let eps = T::of(BN_EPSILON);
        Zip::from(x.columns_mut())
            .and(&self.gamma)
            .and(&self.beta)
            .and(&self.running_mean)
            .and(&self.running_var)
            .for_each(|mut col, &g, &b, &m, &v| {
                let s = g / (v + eps).sqrt();
                col.mapv_inplace(|x| (x - m) * s + b);
            });
    }

    fn train(&mut self, x: &mut Array2<T>) -> BnCache<T> {
        let n = T::of(x.nrows() as f64);
        let eps = T::of(BN_EPSILON);
        let mom = T::of(BN_MOMENTUM);
        let mean = x.mean_axis(Axis(0)).expect("batch has rows");
        let var = x.map_axis(Axis(0), |c| {
            let m = c.mean().unwrap_or_else(T::zero);
            c.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / n
        });
        let inv_std = var.mapv(|v| T::one() / (v + eps).sqrt());
        Zip::from(x.columns_mut())
            .and(&mean)
            .and(&inv_std)
            .for_each(|mut col, &m, &s| col.mapv_inplace(|v| (v - m) * s));
        let xhat = x.clone();
        Zip::from(x.columns_mut())
            .and(&self.gamma)
            .and(&self.beta)
            .for_each(|mut col, &g, &b| col.mapv_inplace(|v| v * g + b));
        Zip::from(&mut self.running_mean)
            .and(&mean)
            .for_each(|r, &m| *r = mom * *r + (T::one() - mom) * m);
        Zip::from(&mut self.running_var)
            .and(&var)
            .for_each(|r, &v| *r = mom * *r + (T::one() - mom) * v);
        BnCache { xhat, inv_std }
    }

    /// Returns the input gradient and writes `(d gamma, d beta)`.
    fn backward(
        &self,
        cache: &BnCache<T>,
        g: &Array2<T>,
        grads: &mut (Array1<T>, Array1<T>),
    ) -> Array2<T> {
        let n = T::of(g.nrows() as f64);
        grads.0 = (g * &cache.xhat).sum_axis(Axis(0));
        grads.1 = g.sum_axis(Axis(0));
        let dxhat = g * &self.gamma;
        let sum_d = dxhat.sum_axis(Axis(0));
        let sum_dx = (&dxhat * &cache.xhat).sum_axis(Axis(0));
        let mut dx = dxhat * n - &sum_d - &(&cache.xhat * &sum_dx);
        Zip::from(dx.columns_mut())
            .and(&cache.inv_std)
            .for_each(|mut col, &s| col.mapv_inplace(|v| v * s / n));
        dx
    }
}

#[derive(Clone, Debug)]
struct BnCache<T> {
    xhat: Array2<T>,
    inv_std: Array1<T>,
}

#[derive(Clone, Debug)]
struct LayerCache<T> {
    input: Array2<T>,
    /// Argument of the activation.
    pre_act: Array2<T>,
    bn: Option<BnCache<T>>,
    dropout: Option<Array2<T>>,
}

/// Everything the backward pass needs from a training forward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    layers: Vec<LayerCache<T>>,
    output: Array2<T>,
}

impl<T> ForwardCache<T> {
    pub fn output(&self) -> &Array2<T> {
        &self.output
    }
}

/// Parameter gradients, shaped like the network.
#[derive(Clone, Debug)]
pub struct Gradients<T> {
    pub dense: Vec<Dense<T>>,
    /// `(d gamma, d beta)` per hidden layer when batch norm is on.
    pub norms: Vec<(Array1<T>, Array1<T>)>,
}

/// One named parameter array and its gradient, flattened.
pub struct ParamBlock<'a, T> {
    pub name: String,
    pub value: &'a mut [T],
    pub grad: &'a [T],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    config: MlpConfig,
    pub(crate) dense: Vec<Dense<T>>,
    pub(crate) norms: Vec<BatchNorm<T>>,
}

#[inline]
fn elu<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        x.exp() - T::one()
    }
}

#[inline]
fn elu_grad<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one()
    } else {
        x.exp()
    }
}

#[inline]
fn hard_sigmoid<T: Scalar>(x: T) -> T {
    (x * T::of(0.2) + T::of(0.5)).max(T::zero()).min(T::one())
}

impl<T: Scalar> Mlp<T> {
    /// Glorot-uniform weights, zero biases, identity batch norm.
    pub fn new(config: MlpConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = crate::rng::stream(config.init_seed, crate::rng::INIT);
        let sizes = &config.layer_sizes;
        let dense = sizes
            .windows(2)
            .map(|w| {
                let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
                let weights = Array2::from_shape_simple_fn((w[0], w[1]), || {
                    T::of(rng.random_range(-limit..limit))
                });
                Dense {
                    weights,
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect();
        let norms = if config.batch_norm {
            sizes[1..sizes.len() - 1]
                .iter()
                .map(|&n| BatchNorm::new(n))
                .collect()
        } else {
            vec![]
        };
        Ok(Self {
            config,
            dense,
            norms,
        })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn input_size(&self) -> usize {
        self.config.input_size()
    }

    pub fn output_size(&self) -> usize {
        self.config.output_size()
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.dense
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.dense
    }

    pub fn norms(&self) -> &[BatchNorm<T>] {
        &self.norms
    }

    pub fn num_params(&self) -> usize {
        let d: usize = self
            .dense
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum();
        d + self.norms.iter().map(|n| 2 * n.gamma.len()).sum::<usize>()
    }

    fn check_input(&self, x: &ArrayView2<T>) -> Result<()> {
        if x.ncols() != self.input_size() || x.nrows() == 0 {
            return Err(Error::Shape(format!(
                "network takes batches of {} columns, got {}x{}",
                self.input_size(),
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }

    fn affine(x: &ArrayView2<T>, layer: &Dense<T>) -> Array2<T> {
        x.dot(&layer.weights) + &layer.bias
    }

    fn output_act(&self, z: &Array2<T>) -> Array2<T> {
        match self.config.output_activation {
            OutputActivation::Sigmoid => z.mapv(crate::autodiff::sigmoid),
            OutputActivation::HardSigmoid => z.mapv(hard_sigmoid),
        }
    }

    /// Inference pass with running batch-norm statistics.
    pub fn forward(&self, x: ArrayView2<T>) -> Result<Array2<T>> {
        self.check_input(&x)?;
        let last = self.dense.len() - 1;
        let mut h = x.to_owned();
        for (i, layer) in self.dense.iter().enumerate() {
            let mut z = Self::affine(&h.view(), layer);
            if i == last {
                return Ok(self.output_act(&z));
            }
            match (self.norms.get(i), self.config.batch_norm_placement) {
                (Some(bn), BatchNormPlacement::BeforeActivation) => {
                    bn.infer(&mut z);
                    z.mapv_inplace(elu);
                }
                (Some(bn), BatchNormPlacement::AfterActivation) => {
                    z.mapv_inplace(elu);
                    bn.infer(&mut z);
                }
                (None, _) => z.mapv_inplace(elu),
            }
            h = z;
        }
        unreachable!("a network has at least one layer")
    }

    /// Training pass: batch statistics, running-statistics update and dropout.
    pub fn forward_train<R: Rng + ?Sized>(
        &mut self,
        x: ArrayView2<T>,
        rng: &mut R,
    ) -> Result<ForwardCache<T>> {
        self.check_input(&x)?;
        if !self.norms.is_empty() && x.nrows() < 2 {
            return Err(Error::Shape(
                "batch norm needs at least 2 samples per batch".into(),
            ));
        }
        let last = self.dense.len() - 1;
        let keep = 1.0 - self.config.dropout;
        let placement = self.config.batch_norm_placement;
        let mut layers = Vec::with_capacity(self.dense.len());
        let mut h = x.to_owned();
        for i in 0..self.dense.len() {
            let mut z = Self::affine(&h.view(), &self.dense[i]);
            if i == last {
                let output = self.output_act(&z);
                layers.push(LayerCache {
                    input: h,
                    pre_act: z,
                    bn: None,
                    dropout: None,
                });
                return Ok(ForwardCache { layers, output });
            }
            let (pre_act, bn) = match (self.norms.get_mut(i), placement) {
                (Some(norm), BatchNormPlacement::BeforeActivation) => {
                    let c = norm.train(&mut z);
                    let pre = z.clone();
                    z.mapv_inplace(elu);
                    (pre, Some(c))
                }
                (Some(norm), BatchNormPlacement::AfterActivation) => {
                    let pre = z.clone();
                    z.mapv_inplace(elu);
                    (pre, Some(norm.train(&mut z)))
                }
                (None, _) => {
                    let pre = z.clone();
                    z.mapv_inplace(elu);
                    (pre, None)
                }
            };
            let dropout = (keep < 1.0).then(|| {
                let scale = T::of(1.0 / keep);
                let mask = Array2::from_shape_simple_fn(z.raw_dim(), || {
                    if rng.random::<f64>() < keep {
                        scale
                    } else {
                        T::zero()
                    }
                });
                z *= &mask;
                mask
            });
            layers.push(LayerCache {
                input: std::mem::replace(&mut h, z),
                pre_act,
                bn,
                dropout,
            });
        }
        unreachable!("a network has at least one layer")
    }

    /// Parameter gradients given `d loss / d output` of a training pass.
    pub fn backward(
        &self,
        cache: &ForwardCache<T>,
        grad_output: &Array2<T>,
    ) -> Result<Gradients<T>> {
        if grad_output.dim() != cache.output.dim() {
            return Err(Error::Shape(format!(
                "output gradient is {:?}, output is {:?}",
                grad_output.dim(),
                cache.output.dim()
            )));
        }
        let last = self.dense.len() - 1;
        let mut dense: Vec<Dense<T>> = Vec::with_capacity(self.dense.len());
        let mut norms = vec![(Array1::zeros(0), Array1::zeros(0)); self.norms.len()];
        let out = &cache.output;
        let mut g = match self.config.output_activation {
            OutputActivation::Sigmoid => grad_output * &out.mapv(|y| y * (T::one() - y)),
            OutputActivation::HardSigmoid => {
                let lim = T::of(2.5);
                let slope = cache.layers[last].pre_act.mapv(|z| {
                    if z > -lim && z < lim {
                        T::of(0.2)
                    } else {
                        T::zero()
                    }
                });
                grad_output * &slope
            }
        };
        for i in (0..=last).rev() {
            let c = &cache.layers[i];
            if i < last {
                if let Some(mask) = &c.dropout {
                    g *= mask;
                }
                g = match (&c.bn, self.config.batch_norm_placement) {
                    (Some(bc), BatchNormPlacement::AfterActivation) => {
                        self.norms[i].backward(bc, &g, &mut norms[i]) * &c.pre_act.mapv(elu_grad)
                    }
                    (Some(bc), BatchNormPlacement::BeforeActivation) => {
                        let gu = g * &c.pre_act.mapv(elu_grad);
                        self.norms[i].backward(bc, &gu, &mut norms[i])
                    }
                    (None, _) => g * &c.pre_act.mapv(elu_grad),
                };
            }
            let weights = c.input.t().dot(&g).as_standard_layout().into_owned();
            let bias = g.sum_axis(Axis(0));
            if i > 0 {
                g = g.dot(&self.dense[i].weights.t());
            }
            dense.push(Dense { weights, bias });
        }
        dense.reverse();
        Ok(Gradients { dense, norms })
    }

    /// Parameters paired with their gradients, in a fixed order.
    pub fn param_blocks<'a>(&'a mut self, grads: &'a Gradients<T>) -> Vec<ParamBlock<'a, T>> {
        let mut out = vec![];
        for (i, (p, g)) in self.dense.iter_mut().zip(&grads.dense).enumerate() {
            out.push(ParamBlock {
                name: format!("dense{i}.weights"),
                value: p.weights.as_slice_mut().expect("standard layout"),
                grad: g.weights.as_slice().expect("standard layout"),
            });
            out.push(ParamBlock {
                name: format!("dense{i}.bias"),
                value: p.bias.as_slice_mut().expect("contiguous"),
                grad: g.bias.as_slice().expect("contiguous"),
            });
        }
        for (i, (p, g)) in self.norms.iter_mut().zip(&grads.norms).enumerate() {
            out.push(ParamBlock {
                name: format!("norm{i}.gamma"),
                value: p.gamma.as_slice_mut().expect("contiguous"),
                grad: g.0.as_slice().expect("contiguous"),
            });
            out.push(ParamBlock {
                name: format!("norm{i}.beta"),
                value: p.beta.as_slice_mut().expect("contiguous"),
                grad: g.1.as_slice().expect("contiguous"),
            });
        }
        out
    }

    pub(crate) fn from_parts(
        config: MlpConfig,
        dense: Vec<Dense<T>>,
        norms: Vec<BatchNorm<T>>,
    ) -> Result<Self> {
        config.validate()?;
        let sizes = &config.layer_sizes;
        let shapes_ok = dense.len() == sizes.len() - 1
            && dense
                .iter()
                .zip(sizes.windows(2))
                .all(|(d, w)| d.weights.dim() == (w[0], w[1]) && d.bias.len() == w[1]);
        let hidden = &sizes[1..sizes.len() - 1];
        let norms_ok = if config.batch_norm {
            norms.len() == hidden.len()
                && norms.iter().zip(hidden).all(|(n, &h)| {
                    [&n.gamma, &n.beta, &n.running_mean, &n.running_var]
                        .iter()
                        .all(|a| a.len() == h)
                })
        } else {
            norms.is_empty()
        };
        if !(shapes_ok && norms_ok) {
            return Err(Error::Shape("parameters do not match layer_sizes".into()));
        }
        Ok(Self {
            config,
            dense,
            norms,
        })
    }
}
