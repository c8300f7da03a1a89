use ndarray::Array2;

use super::{DenseNet, Gradients};
use crate::error::Result;
use crate::scalar::Scalar;

/// Gradients smaller than this are compared in absolute rather than relative terms.
const SCALE_FLOOR: f64 = 1e-3;
const STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Flat index (see [`DenseNet::param`]) of the worst parameter.
    pub worst_param: usize,
    pub n_params: usize,
    pub tol: f64,
    pub passed: bool,
}

/// `|a - b| / max(|a|, |b|, 1e-3)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(SCALE_FLOOR)
}

/// Compares `analytic` against central differences of `loss` over every
/// parameter of `net`.
pub fn compare_gradients<T, F>(net: &DenseNet<T>, analytic: &Gradients<T>, mut loss: F, tol: f64) -> GradCheckReport
where
    T: Scalar,
    F: FnMut(&DenseNet<T>) -> T,
{
    let flat = analytic.to_flat();
    let mut probe = net.clone();
    let h = T::of(STEP);
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_param: 0,
        n_params: flat.len(),
        tol,
        passed: true,
    };
    for (idx, a) in flat.iter().enumerate() {
        let orig = probe.param(idx);
        *probe.param_mut(idx) = orig + h;
        let up = loss(&probe);
        *probe.param_mut(idx) = orig - h;
        let down = loss(&probe);
        *probe.param_mut(idx) = orig;
        let numeric = (up - down).as_f64() / (2.0 * STEP);
        let err = relative_error(a.as_f64(), numeric);
        if err > report.max_rel_error || err.is_nan() {
            report.max_rel_error = err;
            report.worst_param = idx;
        }
    }
    report.passed = report.max_rel_error <= tol;
    report
}

/// Checks backpropagation of `loss_fn(net(x))`, where `loss_fn` returns the
/// loss and its gradient with respect to the network output.
pub fn gradcheck<T, F>(net: &DenseNet<T>, loss_fn: F, x: &[T], tol: f64) -> Result<GradCheckReport>
where
    T: Scalar,
    F: Fn(&[T]) -> (T, Vec<T>),
{
    let (out, trace) = net.forward(x)?;
    let (_, grad_out) = loss_fn(&out);
    let grad_out = Array2::from_shape_vec((1, grad_out.len()), grad_out).expect("row vector");
    let (analytic, _) = net.backward(&trace, grad_out.view())?;
    Ok(compare_gradients(
        net,
        &analytic,
        |n| {
            let (o, _) = n.forward(x).expect("dimensions already checked");
            loss_fn(&o).0
        },
        tol,
    ))
}
