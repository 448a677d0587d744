//! Exterior derivatives, Maxwell residuals and homotopy potentials.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::Jet;
use crate::error::{Error, Result};
use crate::forms::{Covector, Event, FourVector, ThreeForm, TwoForm, PAIRS, TRIPLES};
use crate::quadrature::GaussLegendre;
use crate::solutions::{FieldSolution, SolutionForm};

pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const DEFAULT_QUAD_ORDER: usize = 32;
pub const MAX_QUAD_ORDER: usize = 256;
/// Agreement required between successive adaptive homotopy estimates.
pub const ADAPTIVE_TOL: f64 = 1e-8;
const SCALE_FLOOR: f64 = 1e-150;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffMethod {
    /// Forward-mode dual numbers.
    Ad,
    /// Central differences with step `step * (1 + |x^a|)` along axis `a`.
    Fd { step: f64 },
}

impl DiffMethod {
    pub fn fd_default() -> Self {
        DiffMethod::Fd { step: DEFAULT_FD_STEP }
    }
}

/// A two-form valued field on spacetime.
pub trait FormField: Sync {
    fn eval(&self, p: &Event) -> Result<TwoForm>;

    /// Components with their first derivatives.
    fn jet(&self, _p: &Event) -> Result<[Jet<f64>; 6]> {
        Err(Error::AdUnavailable)
    }

    /// Spatial distance from the segment to the field's singular set.
    fn segment_clearance(&self, _a: &Event, _b: &Event) -> f64 {
        f64::INFINITY
    }
}

impl FormField for SolutionForm<'_> {
    fn eval(&self, p: &Event) -> Result<TwoForm> {
        let (f, g) = self.solution.fields(p)?;
        Ok(if self.dual { g } else { f })
    }

    fn jet(&self, p: &Event) -> Result<[Jet<f64>; 6]> {
        let (f, g) = self.solution.field_jets(p)?;
        Ok(if self.dual { g } else { f })
    }

    fn segment_clearance(&self, a: &Event, b: &Event) -> f64 {
        self.solution.singular_set.segment_distance(a, b)
    }
}

/// A closure field, differentiable by finite differences only.
pub struct FnForm<F>(pub F);

impl<F: Fn(&Event) -> TwoForm + Sync> FormField for FnForm<F> {
    fn eval(&self, p: &Event) -> Result<TwoForm> {
        Ok((self.0)(p))
    }
}

/// A closure written over jets, differentiable exactly.
pub struct JetForm<F>(pub F);

impl<F: Fn([Jet<f64>; 4]) -> [Jet<f64>; 6] + Sync> FormField for JetForm<F> {
    fn eval(&self, p: &Event) -> Result<TwoForm> {
        Ok(TwoForm(self.jet(p)?.map(|c| c.v)))
    }

    fn jet(&self, p: &Event) -> Result<[Jet<f64>; 6]> {
        Ok((self.0)(Jet::seed(p.to_array())))
    }
}

/// Sum of two fields.
pub struct SumForm<'a, A: ?Sized, B: ?Sized>(pub &'a A, pub &'a B);

impl<A: FormField + ?Sized, B: FormField + ?Sized> FormField for SumForm<'_, A, B> {
    fn eval(&self, p: &Event) -> Result<TwoForm> {
        Ok(self.0.eval(p)? + self.1.eval(p)?)
    }

    fn segment_clearance(&self, a: &Event, b: &Event) -> f64 {
        self.0.segment_clearance(a, b).min(self.1.segment_clearance(a, b))
    }
}

/// Scaled field `c F`.
pub struct ScaledForm<'a, A: ?Sized>(pub f64, pub &'a A);

impl<A: FormField + ?Sized> FormField for ScaledForm<'_, A> {
    fn eval(&self, p: &Event) -> Result<TwoForm> {
        Ok(self.1.eval(p)? * self.0)
    }

    fn segment_clearance(&self, a: &Event, b: &Event) -> f64 {
        self.1.segment_clearance(a, b)
    }
}

fn axis_step(step: f64, p: &Event, a: usize) -> f64 {
    step * (1.0 + p.to_array()[a].abs())
}

fn shifted(p: &Event, a: usize, h: f64) -> Event {
    let mut v = [0.0; 4];
    v[a] = h;
    p.offset(FourVector(v))
}

/// `jac[k][a] = d_a F_k` with `k` in two-form slot order.
pub fn form_jacobian<F: FormField + ?Sized>(field: &F, p: &Event, method: DiffMethod) -> Result<[[f64; 4]; 6]> {
    match method {
        DiffMethod::Ad => Ok(field.jet(p)?.map(|c| c.d)),
        DiffMethod::Fd { step } => {
            let mut jac = [[0.0; 4]; 6];
            for a in 0..4 {
                let h = axis_step(step, p, a);
                let fp = field.eval(&shifted(p, a, h))?;
                let fm = field.eval(&shifted(p, a, -h))?;
                for k in 0..6 {
                    jac[k][a] = (fp.0[k] - fm.0[k]) / (2.0 * h);
                }
            }
            Ok(jac)
        }
    }
}

fn slot(a: usize, b: usize) -> (usize, f64) {
    let (lo, hi, s) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    (PAIRS.iter().position(|&q| q == (lo, hi)).expect("distinct indices"), s)
}

/// `(dF)_abc = d_a F_bc - d_b F_ac + d_c F_ab` from a component Jacobian.
pub fn three_form_from_jacobian(jac: &[[f64; 4]; 6]) -> ThreeForm {
    let d = |a: usize, b: usize, c: usize| {
        let (k, s) = slot(b, c);
        s * jac[k][a]
    };
    ThreeForm(TRIPLES.map(|(a, b, c)| d(a, b, c) - d(b, a, c) + d(c, a, b)))
}

pub fn exterior_derivative<F: FormField + ?Sized>(field: &F, p: &Event, method: DiffMethod) -> Result<ThreeForm> {
    Ok(three_form_from_jacobian(&form_jacobian(field, p, method)?))
}

/// `(dA)_ab = d_a A_b - d_b A_a` by central differences.
pub fn exterior_derivative_1form<G>(a: G, p: &Event, step: f64) -> Result<TwoForm>
where
    G: Fn(&Event) -> Result<Covector>,
{
    let mut jac = [[0.0; 4]; 4];
    for c in 0..4 {
        let h = axis_step(step, p, c);
        let ap = a(&shifted(p, c, h))?;
        let am = a(&shifted(p, c, -h))?;
        for b in 0..4 {
            jac[b][c] = (ap.0[b] - am.0[b]) / (2.0 * h);
        }
    }
    Ok(TwoForm(PAIRS.map(|(i, j)| jac[j][i] - jac[i][j])))
}

/// `(dA)_ab` from a potential carrying its first derivatives.
pub fn exterior_derivative_1form_jet(a: &[Jet<f64>; 4]) -> TwoForm {
    TwoForm(PAIRS.map(|(i, j)| a[j].d[i] - a[i].d[j]))
}

/// Scale-normalized Maxwell residuals over a sample set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_df: f64,
    pub max_dfdual: f64,
    pub sample_count: usize,
    /// Samples skipped because they hit a singularity.
    pub skipped: usize,
    pub method: DiffMethod,
}

impl ResidualReport {
    pub fn fd_step(&self) -> Option<f64> {
        match self.method {
            DiffMethod::Fd { step } => Some(step),
            DiffMethod::Ad => None,
        }
    }
}

/// `max |dF|_inf / (|F|_inf + floor)` and likewise for `*F`.
pub fn maxwell_residual(s: &FieldSolution, samples: &[Event], method: DiffMethod) -> Result<ResidualReport> {
    let per: Vec<Option<(f64, f64)>> = samples
        .par_iter()
        .map(|p| -> Result<Option<(f64, f64)>> {
            let (f, g) = match s.fields(p) {
                Ok(v) => v,
                Err(Error::Singularity(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let df = exterior_derivative(&s.form_field(false), p, method);
            let dg = exterior_derivative(&s.form_field(true), p, method);
            match (df, dg) {
                (Ok(df), Ok(dg)) => Ok(Some((
                    df.norm_inf() / (f.norm_inf() + SCALE_FLOOR),
                    dg.norm_inf() / (g.norm_inf() + SCALE_FLOOR),
                ))),
                (Err(Error::Singularity(_)), _) | (_, Err(Error::Singularity(_))) => Ok(None),
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut report = ResidualReport {
        max_df: 0.0,
        max_dfdual: 0.0,
        sample_count: 0,
        skipped: 0,
        method,
    };
    for r in per {
        match r {
            Some((a, b)) => {
                report.max_df = report.max_df.max(a);
                report.max_dfdual = report.max_dfdual.max(b);
                report.sample_count += 1;
            }
            None => report.skipped += 1,
        }
    }
    Ok(report)
}

/// Ratio of finite-difference Jacobian errors at steps `h` and `h/2`; close to 4
/// for a second-order scheme.
pub fn richardson_ratio<F: FormField + ?Sized>(field: &F, p: &Event, h: f64) -> Result<f64> {
    let exact = form_jacobian(field, p, DiffMethod::Ad)?;
    let err = |step: f64| -> Result<f64> {
        let j = form_jacobian(field, p, DiffMethod::Fd { step })?;
        let mut m = 0.0f64;
        for k in 0..6 {
            for a in 0..4 {
                m = m.max((j[k][a] - exact[k][a]).abs());
            }
        }
        Ok(m)
    };
    Ok(err(h)? / err(0.5 * h)?)
}

fn check_segment<F: FormField + ?Sized>(field: &F, p: &Event, base: &Event) -> Result<()> {
    if field.segment_clearance(base, p) <= 0.0 {
        return Err(Error::SingularPath);
    }
    Ok(())
}

/// `A_b(p) = (p - base)^a int_0^1 s F_ab(base + s (p - base)) ds`.
pub fn homotopy_potential<F: FormField + ?Sized>(
    field: &F,
    p: &Event,
    base: &Event,
    quad_order: usize,
) -> Result<Covector> {
    homotopy_with_rule(field, p, base, &GaussLegendre::new(quad_order))
}

/// As [`homotopy_potential`] with a prebuilt rule.
pub fn homotopy_with_rule<F: FormField + ?Sized>(
    field: &F,
    p: &Event,
    base: &Event,
    rule: &GaussLegendre,
) -> Result<Covector> {
    check_segment(field, p, base)?;
    let dx = (*p - *base).0;
    let mut acc = [0.0; 4];
    for (s, w) in rule.on_interval(0.0, 1.0) {
        let m = field.eval(&base.lerp(*p, s))?.matrix();
        for b in 0..4 {
            acc[b] += w * s * (0..4).map(|a| dx[a] * m[a][b]).sum::<f64>();
        }
    }
    Ok(FourVector(acc))
}

/// Homotopy potential with exact first derivatives, from field jets.
pub fn homotopy_potential_jet<F: FormField + ?Sized>(
    field: &F,
    p: &Event,
    base: &Event,
    quad_order: usize,
) -> Result<[Jet<f64>; 4]> {
    check_segment(field, p, base)?;
    let dx = (*p - *base).0;
    let mut out = [Jet::constant(0.0); 4];
    for (s, w) in GaussLegendre::new(quad_order).on_interval(0.0, 1.0) {
        let jets = field.jet(&base.lerp(*p, s))?;
        let mut m = [[Jet::constant(0.0); 4]; 4];
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            m[a][b] = jets[k];
            m[b][a] = Jet {
                v: -jets[k].v,
                d: jets[k].d.map(|x| -x),
            };
        }
        for b in 0..4 {
            let mut val = 0.0;
            let mut der = [0.0; 4];
            for a in 0..4 {
                val += dx[a] * m[a][b].v;
                for c in 0..4 {
                    der[c] += s * dx[a] * m[a][b].d[c];
                }
            }
            out[b].v += w * s * val;
            for c in 0..4 {
                // d/dp^c of (p - base)^a s F_ab(q(s)) with dq/dp^c = s
                out[b].d[c] += w * s * (m[c][b].v + der[c]);
            }
        }
    }
    Ok(out)
}

/// Outcome of [`homotopy_potential_adaptive`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptivePotential {
    pub potential: Covector,
    pub order: usize,
    /// The order cap was reached before two estimates agreed.
    pub flagged: bool,
}

/// Doubles the order from [`DEFAULT_QUAD_ORDER`] until two estimates agree to
/// [`ADAPTIVE_TOL`] (relative, with unit floor) or [`MAX_QUAD_ORDER`] is reached.
pub fn homotopy_potential_adaptive<F: FormField + ?Sized>(
    field: &F,
    p: &Event,
    base: &Event,
) -> Result<AdaptivePotential> {
    let mut order = DEFAULT_QUAD_ORDER;
    let mut prev = homotopy_potential(field, p, base, order)?;
    while order < MAX_QUAD_ORDER {
        order *= 2;
        let next = homotopy_potential(field, p, base, order)?;
        let delta = (next - prev).max_abs();
        prev = next;
        if delta <= ADAPTIVE_TOL * next.max_abs().max(1.0) {
            return Ok(AdaptivePotential {
                potential: next,
                order,
                flagged: false,
            });
        }
    }
    Ok(AdaptivePotential {
        potential: prev,
        order,
        flagged: true,
    })
}

/// Potentials `(A, C)` of `F` and `*F` sharing one field evaluation per node.
pub fn homotopy_pair(s: &FieldSolution, p: &Event, base: &Event, rule: &GaussLegendre) -> Result<(Covector, Covector)> {
    if s.singular_set.segment_distance(base, p) <= 0.0 {
        return Err(Error::SingularPath);
    }
    let dx = (*p - *base).0;
    let (mut a_acc, mut c_acc) = ([0.0; 4], [0.0; 4]);
    for (t, w) in rule.on_interval(0.0, 1.0) {
        let (f, g) = s.fields(&base.lerp(*p, t))?;
        let (mf, mg) = (f.matrix(), g.matrix());
        for b in 0..4 {
            let (mut sa, mut sc) = (0.0, 0.0);
            for a in 0..4 {
                sa += dx[a] * mf[a][b];
                sc += dx[a] * mg[a][b];
            }
            a_acc[b] += w * t * sa;
            c_acc[b] += w * t * sc;
        }
    }
    Ok((FourVector(a_acc), FourVector(c_acc)))
}
