//! Losses and analytic gradients. Nothing N×N is ever formed: the decoder
//! loss is expanded through the c×c Gram matrix of the normalized embedding.

use ndarray::{Array2, ArrayView2, Zip};

use super::AmlpConfig;
use crate::error::{AmlpError, Result};
use crate::graph::{row_normalize_array, spmm_array, FeatureMatrix, NormalizedAdjacency};
use crate::par::{matmul, matmul_tn, Execution};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub agg: f64,
    pub rec: f64,
}

impl LossParts {
    pub fn is_finite(&self) -> bool {
        self.total.is_finite() && self.agg.is_finite() && self.rec.is_finite()
    }
}

/// Quadratic form ‖D W‖²_F, held either as the d×d Gram matrix DᵀD or as D
/// itself, whichever is smaller.
enum AggregationTerm {
    Gram(Array2<f64>),
    Factor(Array2<f64>),
}

impl AggregationTerm {
    fn new(diff: Array2<f64>, exec: Execution) -> Self {
        if diff.ncols() <= diff.nrows() {
            AggregationTerm::Gram(matmul_tn(diff.view(), diff.view(), exec))
        } else {
            AggregationTerm::Factor(diff)
        }
    }

    fn value(&self, w: &Array2<f64>, exec: Execution) -> f64 {
        match self {
            AggregationTerm::Gram(m) => {
                let mw = matmul(m.view(), w.view(), exec);
                Zip::from(w).and(&mw).fold(0.0, |acc, a, b| acc + a * b)
            }
            AggregationTerm::Factor(d) => {
                matmul(d.view(), w.view(), exec).iter().map(|v| v * v).sum()
            }
        }
    }

    fn value_and_gradient(&self, w: &Array2<f64>, exec: Execution) -> (f64, Array2<f64>) {
        match self {
            AggregationTerm::Gram(m) => {
                let mw = matmul(m.view(), w.view(), exec);
                let value = Zip::from(w).and(&mw).fold(0.0, |acc, a, b| acc + a * b);
                (value, mw * 2.0)
            }
            AggregationTerm::Factor(d) => {
                let dw = matmul(d.view(), w.view(), exec);
                let value = dw.iter().map(|v| v * v).sum();
                (value, matmul_tn(d.view(), dw.view(), exec) * 2.0)
            }
        }
    }
}

/// `agg_weight · ‖D W‖²_F + rec_weight · (1/N²)‖ŶŶᵀ − Ã‖²_F` with `Y = Z W`.
///
/// The main model uses `Z = P + X`, `D = P − X` and weights `(1, λ)`.
pub struct Objective<'a> {
    input: Array2<f64>,
    aggregation: AggregationTerm,
    a_tilde: &'a NormalizedAdjacency,
    a_frob_sq: f64,
    agg_weight: f64,
    rec_weight: f64,
    eps_norm: f64,
    exec: Execution,
}

/// Decoder loss pieces for one embedding.
pub(crate) struct DecoderPass {
    pub y_hat: Array2<f64>,
    pub norms: Vec<f64>,
    pub gram: Array2<f64>,
    pub a_y_hat: Array2<f64>,
    pub loss: f64,
}

pub(crate) fn decoder_pass(
    y: ArrayView2<'_, f64>,
    a_tilde: &NormalizedAdjacency,
    a_frob_sq: f64,
    eps_norm: f64,
    exec: Execution,
) -> DecoderPass {
    let n = y.nrows() as f64;
    let (y_hat, norms) = row_normalize_array(y, eps_norm);
    let gram = matmul_tn(y_hat.view(), y_hat.view(), exec);
    let a_y_hat = spmm_array(a_tilde, y_hat.view(), exec);
    let gram_sq: f64 = gram.iter().map(|v| v * v).sum();
    let cross = Zip::from(&y_hat).and(&a_y_hat).fold(0.0, |acc, a, b| acc + a * b);
    let loss = (gram_sq - 2.0 * cross + a_frob_sq) / (n * n);
    DecoderPass {
        y_hat,
        norms,
        gram,
        a_y_hat,
        loss,
    }
}

impl<'a> Objective<'a> {
    /// `input` is Z (N×d); `agg_diff` is D (N×d).
    pub fn new(
        input: Array2<f64>,
        agg_diff: Array2<f64>,
        a_tilde: &'a NormalizedAdjacency,
        agg_weight: f64,
        rec_weight: f64,
        eps_norm: f64,
    ) -> Result<Self> {
        Self::with_execution(input, agg_diff, a_tilde, agg_weight, rec_weight, eps_norm, Execution::default())
    }

    pub fn with_execution(
        input: Array2<f64>,
        agg_diff: Array2<f64>,
        a_tilde: &'a NormalizedAdjacency,
        agg_weight: f64,
        rec_weight: f64,
        eps_norm: f64,
        exec: Execution,
    ) -> Result<Self> {
        if input.dim() != agg_diff.dim() {
            return Err(AmlpError::shape(
                "Objective",
                format!("{:?}", input.dim()),
                format!("{:?}", agg_diff.dim()),
            ));
        }
        if input.nrows() != a_tilde.n_nodes() {
            return Err(AmlpError::shape("Objective", a_tilde.n_nodes(), input.nrows()));
        }
        Ok(Objective {
            input: input.as_standard_layout().into_owned(),
            aggregation: AggregationTerm::new(agg_diff, exec),
            a_frob_sq: a_tilde.frobenius_sq(),
            a_tilde,
            agg_weight,
            rec_weight,
            eps_norm,
            exec,
        })
    }

    /// The AMLP objective for propagated features `p = S̃ᵏX`.
    pub fn amlp(
        p: &FeatureMatrix,
        x: &FeatureMatrix,
        a_tilde: &'a NormalizedAdjacency,
        cfg: &AmlpConfig,
    ) -> Result<Self> {
        if p.as_array().dim() != x.as_array().dim() {
            return Err(AmlpError::shape(
                "Objective::amlp",
                format!("{:?}", x.as_array().dim()),
                format!("{:?}", p.as_array().dim()),
            ));
        }
        let input = p.as_array() + x.as_array();
        let diff = p.as_array() - x.as_array();
        let agg_weight = if cfg.use_agg_loss { 1.0 } else { 0.0 };
        Self::new(input, diff, a_tilde, agg_weight, cfg.lambda, cfg.eps_norm)
    }

    pub fn n_nodes(&self) -> usize {
        self.input.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.input.ncols()
    }

    pub fn input(&self) -> &Array2<f64> {
        &self.input
    }

    fn check_weights(&self, w: &Array2<f64>) -> Result<()> {
        if w.nrows() != self.input.ncols() {
            return Err(AmlpError::shape("Objective", self.input.ncols(), w.nrows()));
        }
        Ok(())
    }

    pub fn embed(&self, w: &Array2<f64>) -> Array2<f64> {
        matmul(self.input.view(), w.view(), self.exec)
    }

    pub fn evaluate(&self, w: &Array2<f64>) -> Result<LossParts> {
        self.check_weights(w)?;
        let agg = self.aggregation.value(w, self.exec);
        let y = self.embed(w);
        let rec = decoder_pass(y.view(), self.a_tilde, self.a_frob_sq, self.eps_norm, self.exec).loss;
        Ok(LossParts {
            total: self.agg_weight * agg + self.rec_weight * rec,
            agg,
            rec,
        })
    }

    pub fn value_and_gradient(&self, w: &Array2<f64>) -> Result<(LossParts, Array2<f64>)> {
        self.check_weights(w)?;
        let (agg, agg_grad) = self.aggregation.value_and_gradient(w, self.exec);
        let y = self.embed(w);
        let pass = decoder_pass(y.view(), self.a_tilde, self.a_frob_sq, self.eps_norm, self.exec);
        let parts = LossParts {
            total: self.agg_weight * agg + self.rec_weight * pass.loss,
            agg,
            rec: pass.loss,
        };
        let mut grad = agg_grad * self.agg_weight;
        if self.rec_weight != 0.0 {
            let dy = decoder_input_gradient(&pass, self.eps_norm, self.exec);
            let rec_grad = matmul_tn(self.input.view(), dy.view(), self.exec);
            grad.scaled_add(self.rec_weight, &rec_grad);
        }
        Ok((parts, grad))
    }
}

/// ∂L_rec/∂Y: (4/N²)(Ŷ(ŶᵀŶ) − ÃŶ), pulled back through row normalization.
pub(crate) fn decoder_input_gradient(pass: &DecoderPass, eps_norm: f64, exec: Execution) -> Array2<f64> {
    let n = pass.y_hat.nrows() as f64;
    let scale = 4.0 / (n * n);
    let mut dy = matmul(pass.y_hat.view(), pass.gram.view(), exec);
    dy -= &pass.a_y_hat;
    dy *= scale;
    for ((mut g_row, y_row), &norm) in dy.rows_mut().into_iter().zip(pass.y_hat.rows()).zip(&pass.norms) {
        if norm < eps_norm {
            g_row.fill(0.0);
            continue;
        }
        let proj = g_row.dot(&y_row);
        Zip::from(&mut g_row).and(&y_row).for_each(|g, &yh| *g = (*g - proj * yh) / norm);
    }
    dy
}

/// Y = (P + X) W.
pub fn forward(p: &FeatureMatrix, x: &FeatureMatrix, w: &Array2<f64>) -> Result<FeatureMatrix> {
    if p.as_array().dim() != x.as_array().dim() {
        return Err(AmlpError::shape(
            "forward",
            format!("{:?}", x.as_array().dim()),
            format!("{:?}", p.as_array().dim()),
        ));
    }
    if w.nrows() != x.n_cols() {
        return Err(AmlpError::shape("forward", x.n_cols(), w.nrows()));
    }
    let z = p.as_array() + x.as_array();
    Ok(FeatureMatrix::from_array_unchecked(matmul(z.view(), w.view(), Execution::default())))
}

/// ‖(P − X) W‖²_F via the precomputed quadratic form.
pub fn loss_agg(p: &FeatureMatrix, x: &FeatureMatrix, w: &Array2<f64>) -> Result<f64> {
    if p.as_array().dim() != x.as_array().dim() {
        return Err(AmlpError::shape("loss_agg", format!("{:?}", x.as_array().dim()), format!("{:?}", p.as_array().dim())));
    }
    if w.nrows() != x.n_cols() {
        return Err(AmlpError::shape("loss_agg", x.n_cols(), w.nrows()));
    }
    let diff = p.as_array() - x.as_array();
    Ok(AggregationTerm::new(diff, Execution::default()).value(w, Execution::default()))
}

/// (1/N²)‖ŶŶᵀ − Ã‖²_F through the Gram expansion.
pub fn loss_rec(y: &FeatureMatrix, a_tilde: &NormalizedAdjacency, eps_norm: f64) -> Result<f64> {
    if y.n_rows() != a_tilde.n_nodes() {
        return Err(AmlpError::shape("loss_rec", a_tilde.n_nodes(), y.n_rows()));
    }
    Ok(decoder_pass(y.view(), a_tilde, a_tilde.frobenius_sq(), eps_norm, Execution::default()).loss)
}

/// `(L, L_agg, L_rec)` with `L = L_agg + λ L_rec`.
pub fn total_loss(
    p: &FeatureMatrix,
    x: &FeatureMatrix,
    w: &Array2<f64>,
    a_tilde: &NormalizedAdjacency,
    cfg: &AmlpConfig,
) -> Result<LossParts> {
    Objective::amlp(p, x, a_tilde, cfg)?.evaluate(w)
}

/// ∂L/∂W for the AMLP objective.
pub fn gradient(
    p: &FeatureMatrix,
    x: &FeatureMatrix,
    w: &Array2<f64>,
    a_tilde: &NormalizedAdjacency,
    cfg: &AmlpConfig,
) -> Result<Array2<f64>> {
    Ok(Objective::amlp(p, x, a_tilde, cfg)?.value_and_gradient(w)?.1)
}
