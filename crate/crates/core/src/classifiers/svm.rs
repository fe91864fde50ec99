//! Soft-margin kernel SVM trained by sequential minimal optimization with
//! second-order working-set selection.

use std::collections::VecDeque;

use super::{check_dim, dot, squared_distance, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `exp(-gamma · |a - b|²)`
    Rbf { gamma: f64 },
    /// `(gamma · a·b + coef0)^degree`
    Polynomial { gamma: f64, degree: u32, coef0: f64 },
    /// `tanh(gamma · a·b + coef0)`
    Sigmoid { gamma: f64, coef0: f64 },
}

impl Kernel {
    pub fn rbf(dim: usize) -> Self {
        Kernel::Rbf {
            gamma: 1.0 / dim as f64,
        }
    }

    pub fn polynomial(dim: usize) -> Self {
        Kernel::Polynomial {
            gamma: 1.0 / dim as f64,
            degree: 3,
            coef0: 0.0,
        }
    }

    pub fn sigmoid(dim: usize) -> Self {
        Kernel::Sigmoid {
            gamma: 1.0 / dim as f64,
            coef0: 0.0,
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => (-gamma * squared_distance(a, b)).exp(),
            Kernel::Polynomial {
                gamma,
                degree,
                coef0,
            } => (gamma * dot(a, b) + coef0).powi(degree as i32),
            Kernel::Sigmoid { gamma, coef0 } => (gamma * dot(a, b) + coef0).tanh(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Rbf { .. } => "rbf",
            Kernel::Polynomial { .. } => "polynomial",
            Kernel::Sigmoid { .. } => "sigmoid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub kernel: Kernel,
    pub c_reg: f64,
    /// Stop once the maximal KKT violation drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl SvmConfig {
    pub fn new(kernel: Kernel) -> Self {
        SvmConfig {
            kernel,
            c_reg: 1.0,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c_reg: f64,
    pub tol: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i · y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, &c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn classify(&self, x: &[f64]) -> Result<u8> {
        svm_classify(self, x)
    }
}

/// Dual solution over all training vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmSolution {
    pub alphas: Vec<f64>,
    /// Signed labels used internally (`+1` seizure, `-1` otherwise).
    pub signs: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

const TAU: f64 = 1e-12;
/// Cached kernel entries (~256 MB of f64).
const CACHE_ENTRIES: usize = 32 << 20;

struct KernelRows<'a> {
    data: &'a Dataset,
    kernel: Kernel,
    signs: &'a [f64],
    rows: Vec<Option<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(data: &'a Dataset, kernel: Kernel, signs: &'a [f64]) -> Self {
        let n = data.len();
        KernelRows {
            data,
            kernel,
            signs,
            rows: vec![None; n],
            order: VecDeque::new(),
            capacity: (CACHE_ENTRIES / n).max(2),
        }
    }

    /// Row `i` of `Q`, `Q_ij = y_i y_j K(x_i, x_j)`.
    fn row(&mut self, i: usize) -> &[f64] {
        if self.rows[i].is_none() {
            if self.order.len() >= self.capacity {
                let evict = self.order.pop_front().unwrap();
                self.rows[evict] = None;
            }
            let xi = &self.data.vectors()[i];
            let yi = self.signs[i];
            let row = self
                .data
                .vectors()
                .iter()
                .zip(self.signs)
                .map(|(xj, &yj)| yi * yj * self.kernel.eval(xi, xj))
                .collect();
            self.rows[i] = Some(row);
            self.order.push_back(i);
        }
        self.rows[i].as_deref().unwrap()
    }
}

fn validate(train: &Dataset, config: &SvmConfig) -> Result<()> {
    if config.c_reg.is_nan() || config.c_reg <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "c_reg must be positive, got {}",
            config.c_reg
        )));
    }
    if config.tol.is_nan() || config.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            config.tol
        )));
    }
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Solve the soft-margin dual over the full training set.
pub fn svm_solve(train: &Dataset, config: &SvmConfig) -> Result<SvmSolution> {
    validate(train, config)?;
    let n = train.len();
    let c = config.c_reg;
    let signs: Vec<f64> = train
        .labels()
        .iter()
        .map(|&l| if l == 1 { 1.0 } else { -1.0 })
        .collect();
    let diag: Vec<f64> = train
        .vectors()
        .iter()
        .map(|x| config.kernel.eval(x, x))
        .collect();
    let mut q = KernelRows::new(train, config.kernel, &signs);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let y = &signs;

    let mut iterations = 0;
    while iterations < config.max_iter {
        // i: maximal violator in I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let v = if y[t] > 0.0 {
                (alpha[t] < c).then(|| -grad[t])
            } else {
                (alpha[t] > 0.0).then(|| grad[t])
            };
            if let Some(v) = v {
                if v >= gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let Some(i) = i_sel else { break };

        // j: second-order choice in I_low.
        let qi = q.row(i).to_vec();
        let mut gmax2 = f64::NEG_INFINITY;
        let mut obj_min = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..n {
            let (eligible, grad_diff, v, quad) = if y[t] > 0.0 {
                (
                    alpha[t] > 0.0,
                    gmax + grad[t],
                    grad[t],
                    diag[i] + diag[t] - 2.0 * y[i] * qi[t],
                )
            } else {
                (
                    alpha[t] < c,
                    gmax - grad[t],
                    -grad[t],
                    diag[i] + diag[t] + 2.0 * y[i] * qi[t],
                )
            };
            if !eligible {
                continue;
            }
            gmax2 = gmax2.max(v);
            if grad_diff > 0.0 {
                let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= obj_min {
                    obj_min = obj;
                    j_sel = Some(t);
                }
            }
        }
        let Some(j) = j_sel else { break };
        if gmax + gmax2 < config.tol {
            break;
        }
        iterations += 1;

        let qj = q.row(j).to_vec();
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = positive(diag[i] + diag[j] + 2.0 * qi[j]);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = positive(diag[i] + diag[j] - 2.0 * qi[j]);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += qi[t] * di + qj[t] * dj;
        }
    }

    // Offset from free vectors, or the midpoint of the feasible range.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    };

    Ok(SvmSolution {
        alphas: alpha,
        signs,
        bias: -rho,
        iterations,
    })
}

fn positive(quad: f64) -> f64 {
    if quad > 0.0 {
        quad
    } else {
        TAU
    }
}

pub fn svm_train(train: &Dataset, config: &SvmConfig) -> Result<SvmModel> {
    let sol = svm_solve(train, config)?;
    let (support_vectors, dual_coef) = sol
        .alphas
        .iter()
        .zip(&sol.signs)
        .zip(train.vectors())
        .filter(|((&a, _), _)| a > 0.0)
        .map(|((&a, &y), x)| (x.clone(), a * y))
        .unzip();
    Ok(SvmModel {
        kernel: config.kernel,
        c_reg: config.c_reg,
        tol: config.tol,
        support_vectors,
        dual_coef,
        bias: sol.bias,
    })
}

/// Sign of the decision function as a label; a zero decision value is `1`.
pub fn svm_classify(model: &SvmModel, x: &[f64]) -> Result<u8> {
    check_dim(model.dim(), x)?;
    Ok(u8::from(model.decision_value(x) >= 0.0))
}
