//! Chern-Simons helicity integrals over `t = const` slices.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{homotopy_pair, DEFAULT_QUAD_ORDER};
use crate::error::{Error, Result};
use crate::forms::{wedge_21, Covector, Event, FourVector, TwoForm};
use crate::quadrature::{pairwise_sum, GaussLegendre};
use crate::solutions::FieldSolution;

/// Largest change under node doubling accepted by the convergence check.
pub const CONVERGENCE_TOL: f64 = 1e-2;
/// Fraction of indices per side that make up the tail shell.
pub const TAIL_FRACTION: f64 = 0.1;

/// The four slice integrals with their quadrature settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelicityReport {
    pub t: f64,
    /// `int F ^ A`.
    pub h11: f64,
    /// `int *F ^ C`.
    pub h22: f64,
    /// `int F ^ C`.
    pub h12: f64,
    /// `int *F ^ A`.
    pub h21: f64,
    pub nodes: usize,
    #[serde(rename = "L")]
    pub l: f64,
    /// Largest magnitude, over channels, of the contribution from the
    /// outermost nodes.
    pub tail_estimate: f64,
}

impl HelicityReport {
    pub fn channels(&self) -> [(&'static str, f64); 4] {
        [
            ("h11", self.h11),
            ("h22", self.h22),
            ("h12", self.h12),
            ("h21", self.h21),
        ]
    }

    /// `tail_estimate < 0.01 max(|h11|, |h22|, 1e-6)`.
    pub fn tail_acceptable(&self) -> bool {
        self.tail_estimate < 0.01 * self.h11.abs().max(self.h22.abs()).max(1e-6)
    }
}

/// Where the potentials come from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialSource {
    /// Closed form when the solution has one, otherwise the homotopy operator.
    Auto,
    /// Homotopy operator from the given base (default: the solution's base
    /// moved to the slice) with the given quadrature order.
    Homotopy {
        base: Option<[f64; 3]>,
        order: usize,
    },
    ClosedForm,
}

/// Gauge term `d chi` with `chi = c x exp(-r^2)` added to `A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeShift {
    pub c: f64,
}

impl GaugeShift {
    pub fn differential(&self, p: &Event) -> Covector {
        let g = self.c * (-(p.x * p.x + p.y * p.y + p.z * p.z)).exp();
        FourVector::new(
            0.0,
            g * (1.0 - 2.0 * p.x * p.x),
            -2.0 * g * p.x * p.y,
            -2.0 * g * p.x * p.z,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelicityOptions {
    pub potentials: PotentialSource,
    /// Recompute at twice the nodes and fail if any channel moves by more
    /// than [`CONVERGENCE_TOL`].
    pub check_convergence: bool,
    pub gauge: Option<GaugeShift>,
    /// Nodes with spatial radius below this are dropped.
    pub exclusion_radius: f64,
}

impl Default for HelicityOptions {
    fn default() -> Self {
        HelicityOptions {
            potentials: PotentialSource::Auto,
            check_convergence: false,
            gauge: None,
            exclusion_radius: 0.0,
        }
    }
}

/// Slice component `(xyz)` of `CS_i`: 1 `F^A`, 2 `*F^C`, 3 `F^C`, 4 `*F^A`.
pub fn cs_density(s: &FieldSolution, p: &Event, a: &Covector, c: &Covector, i: usize) -> Result<f64> {
    let (f, g) = s.fields(p)?;
    cs_from_fields(&f, &g, a, c, i)
}

fn cs_from_fields(f: &TwoForm, g: &TwoForm, a: &Covector, c: &Covector, i: usize) -> Result<f64> {
    let (form, pot) = match i {
        1 => (f, a),
        2 => (g, c),
        3 => (f, c),
        4 => (g, a),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "Chern-Simons index {i} is not in 1..=4"
            )))
        }
    };
    Ok(wedge_21(form, pot).spatial())
}

/// `(A, C)` at an event per the options.
pub fn potentials_at(
    s: &FieldSolution,
    p: &Event,
    opts: &HelicityOptions,
    rule: Option<&GaussLegendre>,
) -> Result<(Covector, Covector)> {
    let closed = || {
        s.closed_form_potentials(p)
            .ok_or_else(|| Error::InvalidParameter(format!("{} has no closed-form potentials", s.name)))
    };
    let (mut a, c) = match opts.potentials {
        PotentialSource::ClosedForm => closed()??,
        PotentialSource::Auto if s.closed_form_potentials(p).is_some() => closed()??,
        PotentialSource::Auto | PotentialSource::Homotopy { .. } => {
            let (base, order) = match opts.potentials {
                PotentialSource::Homotopy { base, order } => (base, order),
                _ => (None, DEFAULT_QUAD_ORDER),
            };
            let b = base.unwrap_or(s.potential_base.spatial());
            let base = Event::new(p.t, b[0], b[1], b[2]);
            match rule {
                Some(r) => homotopy_pair(s, p, &base, r)?,
                None => homotopy_pair(s, p, &base, &GaussLegendre::new(order))?,
            }
        }
    };
    if let Some(g) = opts.gauge {
        a = a + g.differential(p);
    }
    Ok((a, c))
}

fn homotopy_rule(opts: &HelicityOptions) -> GaussLegendre {
    match opts.potentials {
        PotentialSource::Homotopy { order, .. } => GaussLegendre::new(order),
        _ => GaussLegendre::new(DEFAULT_QUAD_ORDER),
    }
}

/// Raw four-channel sums and tail shell sums on one tensor grid.
fn integrate(s: &FieldSolution, t: f64, nodes: usize, l: f64, opts: &HelicityOptions) -> Result<([f64; 4], [f64; 4])> {
    let gl = GaussLegendre::new(nodes);
    let axis: Vec<(f64, f64)> = gl
        .on_interval(-FRAC_PI_2, FRAC_PI_2)
        .map(|(u, w)| {
            let c = u.cos();
            (l * u.tan(), w * l / (c * c))
        })
        .collect();
    let shell = ((nodes as f64) * TAIL_FRACTION).floor() as usize;
    let outer = |i: usize| i < shell || i >= nodes - shell;
    let rule = homotopy_rule(opts);
    let slabs: Vec<Result<[Vec<f64>; 8]>> = (0..nodes)
        .into_par_iter()
        .map(|i| {
            let mut terms: [Vec<f64>; 8] = Default::default();
            let (x, wx) = axis[i];
            for j in 0..nodes {
                let (y, wy) = axis[j];
                for k in 0..nodes {
                    let (z, wz) = axis[k];
                    let p = Event::new(t, x, y, z);
                    if p.radius() < opts.exclusion_radius {
                        continue;
                    }
                    let (f, g) = s.fields(&p)?;
                    let (a, c) = potentials_at(s, &p, opts, Some(&rule))?;
                    let w = wx * wy * wz;
                    let tail = outer(i) || outer(j) || outer(k);
                    for ch in 0..4 {
                        let v = w * cs_from_fields(&f, &g, &a, &c, ch + 1)?;
                        terms[ch].push(v);
                        if tail {
                            terms[4 + ch].push(v);
                        }
                    }
                }
            }
            Ok(terms)
        })
        .collect();
    let mut per_slab: [Vec<f64>; 8] = Default::default();
    for slab in slabs {
        let slab = slab?;
        for ch in 0..8 {
            per_slab[ch].push(pairwise_sum(&slab[ch]));
        }
    }
    let total = [0, 1, 2, 3].map(|ch| pairwise_sum(&per_slab[ch]));
    let tails = [4, 5, 6, 7].map(|ch| pairwise_sum(&per_slab[ch]));
    Ok((total, tails))
}

/// Tensor-product Gauss-Legendre after `x_i = L tan(u_i)` on each axis.
pub fn compute_helicities(
    s: &FieldSolution,
    t: f64,
    nodes: usize,
    l: f64,
    opts: &HelicityOptions,
) -> Result<HelicityReport> {
    if !s.decays {
        return Err(Error::NonDecaying(s.name.clone()));
    }
    if nodes < 16 || !(l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need nodes >= 16 and L > 0 (got {nodes}, {l})"
        )));
    }
    let (h, tails) = integrate(s, t, nodes, l, opts)?;
    let report = HelicityReport {
        t,
        h11: h[0],
        h22: h[1],
        h12: h[2],
        h21: h[3],
        nodes,
        l,
        tail_estimate: tails.iter().fold(0.0, |m, v| m.max(v.abs())),
    };
    if opts.check_convergence {
        let (h2, _) = integrate(s, t, 2 * nodes, l, opts)?;
        for (ch, name) in ["h11", "h22", "h12", "h21"].into_iter().enumerate() {
            let delta = (h2[ch] - h[ch]).abs();
            if delta > CONVERGENCE_TOL {
                return Err(Error::NotConverged { channel: name, delta });
            }
        }
    }
    Ok(report)
}

/// Reports at each time and the largest per-channel spread across them.
pub fn conservation_sweep(
    s: &FieldSolution,
    times: &[f64],
    nodes: usize,
    l: f64,
    opts: &HelicityOptions,
) -> Result<(Vec<HelicityReport>, f64)> {
    let reports = times
        .iter()
        .map(|&t| compute_helicities(s, t, nodes, l, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut drift = 0.0f64;
    for ch in 0..4 {
        let vals: Vec<f64> = reports.iter().map(|r| r.channels()[ch].1).collect();
        let (lo, hi) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !vals.is_empty() {
            drift = drift.max(hi - lo);
        }
    }
    Ok((reports, drift))
}

/// `max_channel (max_t h - min_t h)`.
pub fn conservation_check(
    s: &FieldSolution,
    times: &[f64],
    nodes: usize,
    l: f64,
    opts: &HelicityOptions,
) -> Result<f64> {
    Ok(conservation_sweep(s, times, nodes, l, opts)?.1)
}
