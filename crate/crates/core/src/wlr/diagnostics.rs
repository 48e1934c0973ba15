//! Per-sweep decrease accounting and trace export.

use std::fmt::Write as _;

use crate::error::Result;
use crate::matrix::format_float;
use crate::scalar::Scalar;

use super::solver::WlrReport;
use super::{objective, WlrProblem, WlrState};

/// The four non-negative pieces of `m_p − m_{p+1}` for one sweep.
///
/// Because every block update is an exact least-squares minimiser, the
/// objective decrease equals `d1 + d2 + d3 + d4` exactly (up to rounding).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescentDecomposition<T = f64> {
    pub m_p: T,
    pub m_next: T,
    /// `‖ΔX₁ ⊙ W₁‖² + ‖ΔX₁ C_p‖²`
    pub d1: T,
    /// `‖X₁^{p+1} (C_p − C_{p+1})‖²`
    pub d2: T,
    /// `‖(B_p − B_{p+1}) D_p‖²`
    pub d3: T,
    /// `‖B_{p+1} (D_p − D_{p+1})‖²`
    pub d4: T,
}

impl<T: Scalar> DescentDecomposition<T> {
    pub fn total(&self) -> T {
        self.d1 + self.d2 + self.d3 + self.d4
    }

    pub fn decrease(&self) -> T {
        self.m_p - self.m_next
    }

    /// `|(m_p − m_{p+1}) − Σ dᵢ| / max(m_p, tiny)`.
    pub fn relative_identity_gap(&self) -> T {
        (self.decrease() - self.total()).abs() / self.m_p.max(T::min_positive_value())
    }
}

/// Decomposes the decrease between consecutive iterates `prev → next`.
pub fn descent_decomposition<T: Scalar>(
    prob: &WlrProblem<T>,
    prev: &WlrState<T>,
    next: &WlrState<T>,
) -> Result<DescentDecomposition<T>> {
    let m_p = objective(prob, prev)?;
    let m_next = objective(prob, next)?;
    let dx = &next.x1 - &prev.x1;
    let d1 = dx.hadamard(prob.w1())?.frobenius_norm_sq() + (&dx * &prev.c).frobenius_norm_sq();
    let d2 = (&next.x1 * &(&prev.c - &next.c)).frobenius_norm_sq();
    let d3 = (&(&prev.b - &next.b) * &prev.d).frobenius_norm_sq();
    let d4 = (&next.b * &(&prev.d - &next.d)).frobenius_norm_sq();
    Ok(DescentDecomposition {
        m_p,
        m_next,
        d1,
        d2,
        d3,
        d4,
    })
}

/// Per-sweep trace as CSV.
///
/// Columns: `p, m_p, error_p, d1, d2, d3, d4` and the four stationarity
/// residuals after the sweep. Diagnostic columns are empty when the solve
/// ran without diagnostics.
pub fn report_csv<T: Scalar>(report: &WlrReport<T>) -> String {
    let mut out = String::from("p,m_p,error_p,d1,d2,d3,d4,grad_x1,grad_c,grad_b,grad_d\n");
    for p in 0..report.iterations {
        let _ = write!(
            out,
            "{},{},{}",
            p,
            format_float(report.objective_trace[p]),
            format_float(report.error_trace[p])
        );
        match report.diagnostics.get(p) {
            Some(diag) => {
                let d = &diag.descent;
                for v in [d.d1, d.d2, d.d3, d.d4].into_iter().chain(diag.residuals) {
                    let _ = write!(out, ",{}", format_float(v));
                }
            }
            None => out.push_str(",,,,,,,,"),
        }
        out.push('\n');
    }
    out
}
