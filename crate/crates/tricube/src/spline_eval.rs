//! Evaluation of semi-standard and rational trivariate T-splines, plus the
//! partition-of-unity and boundary-restriction audits.

use crate::bspline::{eval_basis, eval_basis_derivative, KnotVector5};
use crate::control_grid::{ControlGrid, PointKind};
use crate::rat::to_f64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("parameter {0:?} outside the domain box")]
    OutOfDomain([f64; 3]),
    #[error("rational denominator {0} is degenerate")]
    DegenerateDenominator(f64),
    #[error("mixed payload dimensions across control points")]
    MixedPayload,
    #[error("operation requires the semi-standard form")]
    NotSemiStandard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Form {
    SemiStandard,
    Rational,
}

/// Control grid plus evaluation form; payload dimension is uniform.
#[derive(Debug, Clone)]
pub struct ComponentSpline {
    pub grid: ControlGrid,
    pub form: Form,
    pub payload_dim: usize,
}

#[derive(Debug, Clone)]
pub struct EvalResult {
    pub value: Vec<f64>,
    pub denominator: Option<f64>,
}

/// One boundary-restriction violation.
#[derive(Debug, Clone)]
pub struct RestrictionViolation {
    pub point: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone)]
pub enum ViolationKind {
    SupportEscapes { axis: usize, amount: f64 },
    BoundaryInfluence { parameter: [f64; 3], value: f64 },
}

const DOMAIN_TOL: f64 = 1e-12;

impl ComponentSpline {
    pub fn new(grid: ControlGrid, form: Form) -> Result<Self, EvalError> {
        let payload_dim = grid.points.first().map(|p| p.payload.len()).unwrap_or(0);
        if grid.points.iter().any(|p| p.payload.len() != payload_dim) {
            return Err(EvalError::MixedPayload);
        }
        Ok(ComponentSpline { grid, form, payload_dim })
    }

    /// Sets every control payload to the Greville abscissa triple of its
    /// windows, the layout for which the spline reproduces (u,v,w) exactly.
    pub fn set_greville_payload(&mut self) {
        for p in self.grid.points.iter_mut() {
            p.payload = (0..3)
                .map(|a| {
                    let w = &p.windows_f64[a];
                    (w[1] + w[2] + w[3]) / 3.0
                })
                .collect();
        }
        self.payload_dim = 3;
    }

    pub fn set_constant_payload(&mut self, q: &[f64]) {
        for p in self.grid.points.iter_mut() {
            p.payload = q.to_vec();
        }
        self.payload_dim = q.len();
    }

    pub fn domain_f64(&self) -> ([f64; 3], [f64; 3]) {
        let (lo, hi) = self.grid.domain_box();
        (
            core::array::from_fn(|a| to_f64(&lo[a])),
            core::array::from_fn(|a| to_f64(&hi[a])),
        )
    }

    fn clamp_param(&self, h: [f64; 3]) -> Result<[f64; 3], EvalError> {
        let (lo, hi) = self.domain_f64();
        let mut out = h;
        for a in 0..3 {
            if h[a] < lo[a] - DOMAIN_TOL || h[a] > hi[a] + DOMAIN_TOL {
                return Err(EvalError::OutOfDomain(h));
            }
            out[a] = h[a].clamp(lo[a], hi[a]);
        }
        Ok(out)
    }

    pub fn evaluate(&self, u: f64, v: f64, w: f64) -> Result<EvalResult, EvalError> {
        let h = self.clamp_param([u, v, w])?;
        let mut num = vec![0.0; self.payload_dim];
        let mut den = 0.0;
        for p in &self.grid.points {
            let b = point_blend(p, h);
            if b == 0.0 {
                continue;
            }
            let wb = to_f64(&p.weight) * b;
            den += wb;
            for (acc, x) in num.iter_mut().zip(&p.payload) {
                *acc += wb * x;
            }
        }
        match self.form {
            Form::SemiStandard => Ok(EvalResult { value: num, denominator: None }),
            Form::Rational => {
                if den.abs() <= 1e-14 {
                    return Err(EvalError::DegenerateDenominator(den));
                }
                for x in num.iter_mut() {
                    *x /= den;
                }
                Ok(EvalResult { value: num, denominator: Some(den) })
            }
        }
    }

    /// Partial derivatives along u, v, w; quotient rule in the rational form.
    pub fn evaluate_jacobian(&self, u: f64, v: f64, w: f64) -> Result<[Vec<f64>; 3], EvalError> {
        let h = self.clamp_param([u, v, w])?;
        let d = self.payload_dim;
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        let mut dnum: [Vec<f64>; 3] = core::array::from_fn(|_| vec![0.0; d]);
        let mut dden = [0.0; 3];
        for p in &self.grid.points {
            let b: [f64; 3] = core::array::from_fn(|a| {
                eval_basis(&KnotVector5(p.windows_f64[a]), h[a]).unwrap_or(0.0)
            });
            let db: [f64; 3] = core::array::from_fn(|a| {
                eval_basis_derivative(&KnotVector5(p.windows_f64[a]), h[a], 1).unwrap_or(0.0)
            });
            let wf = to_f64(&p.weight);
            let blend = b[0] * b[1] * b[2];
            if blend != 0.0 {
                den += wf * blend;
                for (acc, x) in num.iter_mut().zip(&p.payload) {
                    *acc += wf * blend * x;
                }
            }
            let grads = [db[0] * b[1] * b[2], b[0] * db[1] * b[2], b[0] * b[1] * db[2]];
            for a in 0..3 {
                if grads[a] != 0.0 {
                    dden[a] += wf * grads[a];
                    for (acc, x) in dnum[a].iter_mut().zip(&p.payload) {
                        *acc += wf * grads[a] * x;
                    }
                }
            }
        }
        match self.form {
            Form::SemiStandard => Ok(dnum),
            Form::Rational => {
                if den.abs() <= 1e-14 {
                    return Err(EvalError::DegenerateDenominator(den));
                }
                Ok(core::array::from_fn(|a| {
                    (0..d)
                        .map(|i| (dnum[a][i] * den - num[i] * dden[a]) / (den * den))
                        .collect()
                }))
            }
        }
    }

    /// Maximum |sum of weighted blending functions - 1| over `n` quasi-random
    /// interior and boundary parameters.
    pub fn audit_unity(&self, n: usize, seed: u64) -> Result<f64, EvalError> {
        if self.form != Form::SemiStandard {
            return Err(EvalError::NotSemiStandard);
        }
        let mut worst = 0.0f64;
        for h in sample_params(&self.domain_f64(), n, seed) {
            let mut den = 0.0;
            for p in &self.grid.points {
                den += to_f64(&p.weight) * point_blend(p, h);
            }
            worst = worst.max((den - 1.0).abs());
        }
        Ok(worst)
    }

    /// Records every non-bd control point whose blending support escapes the
    /// knot box, and every sampled boundary parameter influenced by a non-bd
    /// point.
    pub fn audit_boundary_restriction(&self) -> Vec<RestrictionViolation> {
        let mut out = Vec::new();
        let (lo, hi) = self.domain_f64();
        for (i, p) in self.grid.points.iter().enumerate() {
            if p.kind == PointKind::BdControlPoint {
                continue;
            }
            for a in 0..3 {
                let (s0, s4) = (p.windows_f64[a][0], p.windows_f64[a][4]);
                let escape = (lo[a] - s0).max(s4 - hi[a]);
                if escape > DOMAIN_TOL {
                    out.push(RestrictionViolation {
                        point: i,
                        kind: ViolationKind::SupportEscapes { axis: a, amount: escape },
                    });
                    break;
                }
            }
        }
        for h in boundary_params(&self.domain_f64(), 200, 7) {
            for (i, p) in self.grid.points.iter().enumerate() {
                if p.kind == PointKind::BdControlPoint {
                    continue;
                }
                let b = point_blend(p, h);
                if b.abs() > 1e-12 {
                    out.push(RestrictionViolation {
                        point: i,
                        kind: ViolationKind::BoundaryInfluence { parameter: h, value: b },
                    });
                }
            }
        }
        out
    }
}

pub fn point_blend(p: &crate::control_grid::ControlPoint, h: [f64; 3]) -> f64 {
    let mut b = 1.0;
    for a in 0..3 {
        let w = &p.windows_f64[a];
        if h[a] < w[0] || h[a] > w[4] {
            return 0.0;
        }
        b *= eval_basis(&KnotVector5(*w), h[a]).unwrap_or(0.0);
        if b == 0.0 {
            return 0.0;
        }
    }
    b
}

/// Deterministic quasi-random interior + boundary parameters (R2 sequence).
pub fn sample_params(domain: &([f64; 3], [f64; 3]), n: usize, seed: u64) -> Vec<[f64; 3]> {
    let (lo, hi) = domain;
    let g = 1.220_744_084_605_759_5f64; // plastic constant, R2 sequence base
    let a = [1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g)];
    let s0 = (seed as f64 * 0.618_033_988_749_895).fract();
    let mut out = Vec::with_capacity(n);
    let n_interior = n - n / 4;
    for i in 0..n {
        let t: [f64; 3] = core::array::from_fn(|k| (s0 + a[k] * (i as f64 + 1.0)).fract());
        let mut h: [f64; 3] = core::array::from_fn(|k| lo[k] + t[k] * (hi[k] - lo[k]));
        if i >= n_interior {
            // Push a quarter of the samples onto the domain faces.
            let face = i % 6;
            let axis = face / 2;
            h[axis] = if face % 2 == 0 { lo[axis] } else { hi[axis] };
        }
        out.push(h);
    }
    out
}

pub fn boundary_params(domain: &([f64; 3], [f64; 3]), n: usize, seed: u64) -> Vec<[f64; 3]> {
    let (lo, hi) = domain;
    sample_params(domain, n, seed)
        .into_iter()
        .enumerate()
        .map(|(i, mut h)| {
            let face = i % 6;
            let axis = face / 2;
            h[axis] = if face % 2 == 0 { lo[axis] } else { hi[axis] };
            h
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control_grid::ControlGrid;
    use crate::rat::{ri, Rat};

    fn layered_grid(n: i64) -> ControlGrid {
        let s: Vec<Rat> = (0..=n).map(ri).collect();
        let mut g = ControlGrid::build_regular([s.clone(), s.clone(), s]).unwrap();
        g.add_boundary_layer().unwrap();
        g
    }

    #[test]
    fn constant_payload_reproduced_in_both_forms() {
        for form in [Form::SemiStandard, Form::Rational] {
            let mut sp = ComponentSpline::new(layered_grid(2), form).unwrap();
            sp.set_constant_payload(&[3.25, -1.5, 0.75]);
            for h in sample_params(&sp.domain_f64(), 64, 0) {
                let r = sp.evaluate(h[0], h[1], h[2]).unwrap();
                assert!((r.value[0] - 3.25).abs() < 1e-12);
                assert!((r.value[1] + 1.5).abs() < 1e-12);
                assert!((r.value[2] - 0.75).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bezier_corner_interpolates_corner_payload() {
        let mut g = layered_grid(1);
        for (i, p) in g.points.iter_mut().enumerate() {
            p.payload = vec![i as f64, 2.0 * i as f64, 0.0];
        }
        let corner_payload = g
            .points
            .iter()
            .find(|p| {
                p.windows_f64
                    .iter()
                    .all(|w| w[0] == 0.0 && w[1] == 0.0 && w[2] == 0.0 && w[3] == 0.0)
            })
            .unwrap()
            .payload
            .clone();
        let sp = ComponentSpline::new(g, Form::SemiStandard).unwrap();
        let r = sp.evaluate(0.0, 0.0, 0.0).unwrap();
        assert!((r.value[0] - corner_payload[0]).abs() < 1e-12);
        assert!((r.value[1] - corner_payload[1]).abs() < 1e-12);
    }

    /// Independent oracle: full Cox-de Boor over the clamped knot list,
    /// summed across all basis functions, no window tracing involved.
    fn tensor_oracle_1d(n: i64, u: f64) -> f64 {
        let mut knots = vec![0.0; 3];
        for i in 0..=n {
            knots.push(i as f64);
        }
        knots.extend_from_slice(&[n as f64; 3]);
        let m = knots.len() - 4;
        let mut acc = 0.0;
        for i in 0..m {
            let w = KnotVector5([knots[i], knots[i + 1], knots[i + 2], knots[i + 3], knots[i + 4]]);
            let greville = (w.0[1] + w.0[2] + w.0[3]) / 3.0;
            acc += greville * eval_basis(&w, u).unwrap();
        }
        acc
    }

    #[test]
    fn greville_layout_has_linear_precision() {
        let mut sp = ComponentSpline::new(layered_grid(3), Form::SemiStandard).unwrap();
        sp.set_greville_payload();
        for h in sample_params(&sp.domain_f64(), 128, 1) {
            let r = sp.evaluate(h[0], h[1], h[2]).unwrap();
            for a in 0..3 {
                assert!((r.value[a] - h[a]).abs() < 1e-12, "axis {a} at {h:?}: {}", r.value[a]);
                assert!((tensor_oracle_1d(3, h[a]) - h[a]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut sp = ComponentSpline::new(layered_grid(3), Form::SemiStandard).unwrap();
        sp.set_greville_payload();
        let hstep = 1e-5;
        for h in sample_params(&sp.domain_f64(), 24, 2) {
            let h: [f64; 3] = core::array::from_fn(|a| h[a].clamp(0.1, 2.9));
            let jac = sp.evaluate_jacobian(h[0], h[1], h[2]).unwrap();
            for a in 0..3 {
                let mut hp = h;
                hp[a] += hstep;
                let mut hm = h;
                hm[a] -= hstep;
                let fp = sp.evaluate(hp[0], hp[1], hp[2]).unwrap().value;
                let fm = sp.evaluate(hm[0], hm[1], hm[2]).unwrap().value;
                for i in 0..3 {
                    let fd = (fp[i] - fm[i]) / (2.0 * hstep);
                    assert!(
                        (jac[a][i] - fd).abs() < 1e-6,
                        "d axis {a} comp {i} at {h:?}: {} vs {}",
                        jac[a][i],
                        fd
                    );
                }
            }
        }
    }

    #[test]
    fn constant_payload_has_zero_jacobian() {
        let mut sp = ComponentSpline::new(layered_grid(2), Form::Rational).unwrap();
        sp.set_constant_payload(&[2.0, 2.0, 2.0]);
        let jac = sp.evaluate_jacobian(0.7, 1.1, 1.9).unwrap();
        for a in 0..3 {
            for x in &jac[a] {
                assert!(x.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn forms_agree_under_verified_unity() {
        let mut semi = ComponentSpline::new(layered_grid(2), Form::SemiStandard).unwrap();
        semi.set_greville_payload();
        let unity = semi.audit_unity(500, 0).unwrap();
        assert!(unity <= 1e-12, "unity {unity}");
        let mut rational = semi.clone();
        rational.form = Form::Rational;
        for h in sample_params(&semi.domain_f64(), 100, 3) {
            let a = semi.evaluate(h[0], h[1], h[2]).unwrap().value;
            let b = rational.evaluate(h[0], h[1], h[2]).unwrap().value;
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn unity_survives_local_refinement_and_detects_corruption() {
        let mut g = layered_grid(2);
        g.subdivide_cells(&[0]).unwrap();
        g.subdivide_cells(&[3]).unwrap();
        g.subdivide_cells(&[10]).unwrap();
        let mut sp = ComponentSpline::new(g, Form::SemiStandard).unwrap();
        sp.set_constant_payload(&[1.0, 0.0, 0.0]);
        assert!(sp.audit_unity(1000, 0).unwrap() <= 1e-10);
        // Corrupt one weight by +0.1: the audit must notice.
        let idx = sp.grid.points.len() / 2;
        sp.grid.points[idx].weight += crate::rat::rat(1, 10);
        assert!(sp.audit_unity(1000, 0).unwrap() >= 0.01);
    }

    #[test]
    fn restriction_audit_layered_vs_open() {
        let sp = ComponentSpline::new(layered_grid(2), Form::SemiStandard).unwrap();
        assert!(sp.audit_boundary_restriction().is_empty());
        let s: Vec<Rat> = (0..=2).map(ri).collect();
        let open = ControlGrid::build_regular([s.clone(), s.clone(), s]).unwrap();
        let sp = ComponentSpline::new(open, Form::Rational).unwrap();
        let violations = sp.audit_boundary_restriction();
        assert!(!violations.is_empty());
    }

    #[test]
    fn locality_of_payload_perturbation() {
        let mut sp = ComponentSpline::new(layered_grid(3), Form::SemiStandard).unwrap();
        sp.set_greville_payload();
        let idx = sp
            .grid
            .points
            .iter()
            .position(|p| p.anchor == [ri(1), ri(1), ri(1)])
            .unwrap();
        let support = sp.grid.points[idx].support();
        let samples = sample_params(&sp.domain_f64(), 200, 4);
        let before: Vec<_> = samples
            .iter()
            .map(|h| sp.evaluate(h[0], h[1], h[2]).unwrap().value)
            .collect();
        sp.grid.points[idx].payload[0] += 5.0;
        for (h, b) in samples.iter().zip(&before) {
            let after = sp.evaluate(h[0], h[1], h[2]).unwrap().value;
            let inside = (0..3).all(|a| h[a] > support[a].0 && h[a] < support[a].1);
            if !inside {
                assert_eq!(after, *b, "outside support must be bit-identical");
            }
        }
    }
}
