//! Concrete vacuum solutions and the generic pullback-pair constructor.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dual::{Jet, Scalar};
use crate::error::{Error, Result};
use crate::forms::{hodge_components, hodge_dual, Covector, Event, FourVector, TwoForm};
use crate::maps::{
    hopf_parts, omega, pull_chart, pullback_components, stereo_ratio, Chart, ChartValue, HopfIndex, ScalarMap,
};
use crate::observer::FieldClass;

/// Radius below which the Coulomb field is reported singular.
pub const COULOMB_CORE: f64 = 1e-12;

/// Raw components of `(F, *F)`.
pub type FieldPair<R> = ([R; 6], [R; 6]);

/// Evaluator behind a [`FieldSolution`].
pub trait FieldModel: Send + Sync {
    fn fields(&self, p: &Event) -> Result<(TwoForm, TwoForm)>;

    /// First derivatives of every component, for exact exterior derivatives.
    fn field_jets(&self, _p: &Event) -> Result<FieldPair<Jet<f64>>> {
        Err(Error::AdUnavailable)
    }

    /// Closed-form potentials `(A, C)` with `dA = F`, `dC = *F`, if the model has them.
    fn potentials(&self, _p: &Event) -> Option<Result<(Covector, Covector)>> {
        None
    }
}

/// A field written once, generically over the scalar type.
pub trait AnalyticField: Send + Sync {
    fn eval<R: Scalar>(&self, p: [R; 4]) -> Result<FieldPair<R>>;

    fn potentials(&self, _p: &Event) -> Option<Result<(Covector, Covector)>> {
        None
    }
}

struct Analytic<M>(M);

impl<M: AnalyticField> FieldModel for Analytic<M> {
    fn fields(&self, p: &Event) -> Result<(TwoForm, TwoForm)> {
        let (f, g) = self.0.eval(p.to_array())?;
        Ok((TwoForm(f), TwoForm(g)))
    }

    fn field_jets(&self, p: &Event) -> Result<FieldPair<Jet<f64>>> {
        self.0.eval(Jet::seed(p.to_array()))
    }

    fn potentials(&self, p: &Event) -> Option<Result<(Covector, Covector)>> {
        self.0.potentials(p)
    }
}

/// Points where a solution is not defined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SingularSet {
    Empty,
    /// The world line `r < radius`.
    SpatialOrigin {
        radius: f64,
    },
}

impl SingularSet {
    pub fn contains(&self, p: &Event) -> bool {
        match *self {
            SingularSet::Empty => false,
            SingularSet::SpatialOrigin { radius } => p.radius() < radius,
        }
    }

    /// Spatial distance from the segment `[a, b]` to the singular set.
    pub fn segment_distance(&self, a: &Event, b: &Event) -> f64 {
        match *self {
            SingularSet::Empty => f64::INFINITY,
            SingularSet::SpatialOrigin { radius } => {
                let (pa, pb) = (a.spatial(), b.spatial());
                let d = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
                let dd: f64 = d.iter().map(|c| c * c).sum();
                let s = if dd > 0.0 {
                    (-(pa[0] * d[0] + pa[1] * d[1] + pa[2] * d[2]) / dd).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let q = [pa[0] + s * d[0], pa[1] + s * d[1], pa[2] + s * d[2]];
                (q.iter().map(|c| c * c).sum::<f64>().sqrt() - radius).max(0.0)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SingularSet::Empty => "empty".into(),
            SingularSet::SpatialOrigin { radius } => format!("r < {radius:e}"),
        }
    }
}

/// A named simple vacuum solution: evaluators for `F` and `*F` plus metadata.
#[derive(Clone)]
pub struct FieldSolution {
    pub name: String,
    /// Helicity densities are integrable over t = const slices.
    pub decays: bool,
    pub singular_set: SingularSet,
    pub expected_class: Option<FieldClass>,
    /// Default base point of the homotopy potentials (on the t = 0 slice).
    pub potential_base: Event,
    /// Names of the scalar maps when pullback-built.
    pub provenance: Option<(String, String)>,
    model: Arc<dyn FieldModel>,
}

impl std::fmt::Debug for FieldSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSolution")
            .field("name", &self.name)
            .field("decays", &self.decays)
            .field("singular_set", &self.singular_set)
            .field("expected_class", &self.expected_class)
            .finish_non_exhaustive()
    }
}

impl FieldSolution {
    pub fn from_model(name: impl Into<String>, model: Arc<dyn FieldModel>) -> Self {
        FieldSolution {
            name: name.into(),
            decays: false,
            singular_set: SingularSet::Empty,
            expected_class: None,
            potential_base: Event::ORIGIN,
            provenance: None,
            model,
        }
    }

    pub fn from_analytic<M: AnalyticField + 'static>(name: impl Into<String>, m: M) -> Self {
        Self::from_model(name, Arc::new(Analytic(m)))
    }

    pub fn with_decay(mut self, decays: bool) -> Self {
        self.decays = decays;
        self
    }

    pub fn with_expected_class(mut self, class: FieldClass) -> Self {
        self.expected_class = Some(class);
        self
    }

    pub fn with_singular_set(mut self, set: SingularSet) -> Self {
        self.singular_set = set;
        self
    }

    pub fn with_potential_base(mut self, base: Event) -> Self {
        self.potential_base = base;
        self
    }

    fn check(&self, p: &Event) -> Result<()> {
        if self.singular_set.contains(p) {
            return Err(Error::Singularity("event lies in the singular set"));
        }
        Ok(())
    }

    /// `(F, *F)` at an event.
    pub fn fields(&self, p: &Event) -> Result<(TwoForm, TwoForm)> {
        self.check(p)?;
        self.model.fields(p)
    }

    pub fn f(&self, p: &Event) -> Result<TwoForm> {
        Ok(self.fields(p)?.0)
    }

    pub fn f_dual(&self, p: &Event) -> Result<TwoForm> {
        Ok(self.fields(p)?.1)
    }

    pub fn field_jets(&self, p: &Event) -> Result<FieldPair<Jet<f64>>> {
        self.check(p)?;
        self.model.field_jets(p)
    }

    pub fn closed_form_potentials(&self, p: &Event) -> Option<Result<(Covector, Covector)>> {
        self.model.potentials(p)
    }

    /// View of `F` (or `*F` when `dual`) as a standalone form field.
    pub fn form_field(&self, dual: bool) -> SolutionForm<'_> {
        SolutionForm { solution: self, dual }
    }
}

/// One of the two forms of a solution; see [`crate::calculus::FormField`].
#[derive(Clone, Copy, Debug)]
pub struct SolutionForm<'a> {
    pub solution: &'a FieldSolution,
    pub dual: bool,
}

/// `F = (e / r^2) dt ^ dr`, with `*F` its magnetic-monopole-like dual.
#[derive(Clone, Copy, Debug)]
pub struct Coulomb {
    pub charge: f64,
}

impl AnalyticField for Coulomb {
    fn eval<R: Scalar>(&self, p: [R; 4]) -> Result<FieldPair<R>> {
        let [_, x, y, z] = p;
        let r2 = x * x + y * y + z * z;
        if r2.re().sqrt() < COULOMB_CORE {
            return Err(Error::Singularity("Coulomb field at r = 0"));
        }
        let k = (r2 * r2.sqrt()).recip() * self.charge;
        let zero = R::cst(0.0);
        let f = [k * x, k * y, k * z, zero, zero, zero];
        Ok((f, hodge_components(f)))
    }

    /// `A = (e/r) dt` and `C = e (cos xi - 1) d(azimuth)`, the latter singular on
    /// the negative z axis.
    fn potentials(&self, p: &Event) -> Option<Result<(Covector, Covector)>> {
        let r = p.radius();
        if r < COULOMB_CORE {
            return Some(Err(Error::Singularity("Coulomb potential at r = 0")));
        }
        let e = self.charge;
        let a = FourVector::new(e / r, 0.0, 0.0, 0.0);
        let rho2 = p.x * p.x + p.y * p.y;
        let c = if rho2 == 0.0 {
            if p.z < 0.0 {
                return Some(Err(Error::Singularity("Dirac string of the dual potential")));
            }
            FourVector::ZERO
        } else {
            let g = e * (p.z / r - 1.0) / rho2;
            FourVector::new(0.0, -g * p.y, g * p.x, 0.0)
        };
        Some(Ok((a, c)))
    }
}

/// `F = -E0 cos(k(z - t)) dx ^ d(z - t)`, `*F = E0 cos(k(z - t)) dy ^ d(z - t)`.
#[derive(Clone, Copy, Debug)]
pub struct PlaneWave {
    pub amplitude: f64,
    pub wavenumber: f64,
}

impl AnalyticField for PlaneWave {
    fn eval<R: Scalar>(&self, p: [R; 4]) -> Result<FieldPair<R>> {
        let [t, _, _, z] = p;
        let c = ((z - t) * self.wavenumber).cos() * self.amplitude;
        let zero = R::cst(0.0);
        // dx ^ (dz - dt) = dt ^ dx + dx ^ dz
        let f = [-c, zero, zero, zero, -c, zero];
        let g = [zero, c, zero, zero, zero, c];
        Ok((f, g))
    }
}

/// The Hopf-Ranada knot: `F = -phi^* eps`, `*F = theta^* eps` with
/// `phi = Pi_1 o Omega`, `theta = Pi_2 o Omega`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HopfRanada;

impl AnalyticField for HopfRanada {
    fn eval<R: Scalar>(&self, p: [R; 4]) -> Result<FieldPair<R>> {
        let u = omega(Jet::seed(p));
        let (n1, d1) = hopf_parts(HopfIndex::One, u);
        let (n2, d2) = hopf_parts(HopfIndex::Two, u);
        let f = pull_chart(stereo_ratio(n1, d1)).map(|c| -c);
        let g = pull_chart(stereo_ratio(n2, d2));
        Ok((f, g))
    }
}

/// `F = -phi^* eps`, `*F = theta^* eps` for an arbitrary map pair. Whether the
/// dual condition holds is not assumed; see [`duality_residual`].
#[derive(Clone, Copy, Debug)]
pub struct ScalarPair<P, Q> {
    pub phi: P,
    pub theta: Q,
}

impl<P: ScalarMap, Q: ScalarMap> AnalyticField for ScalarPair<P, Q> {
    fn eval<R: Scalar>(&self, p: [R; 4]) -> Result<FieldPair<R>> {
        let f = pullback_components(&self.phi, p)?.map(|c| -c);
        let g = pullback_components(&self.theta, p)?;
        Ok((f, g))
    }
}

/// Coulomb `phi`: polar `(R, Theta) = (r^{-1/2}, -2 e t)` in Cartesian form.
#[derive(Clone, Copy, Debug)]
pub struct CoulombPhiMap {
    pub charge: f64,
}

impl ScalarMap for CoulombPhiMap {
    fn chart_value<R: Scalar>(&self, p: [R; 4]) -> Result<ChartValue<R>> {
        let [t, x, y, z] = p;
        let r = (x * x + y * y + z * z).sqrt();
        if r.re() < COULOMB_CORE {
            return Err(Error::Singularity("Coulomb map at r = 0"));
        }
        let radial = r.sqrt().recip();
        let angle = t * (-2.0 * self.charge);
        Ok(ChartValue {
            coords: [radial * angle.cos(), radial * angle.sin()],
            chart: Chart::Planar { density: 1.0 },
        })
    }
}

/// Coulomb `theta`: `(R^2, Theta) = (cos xi, 2 e azimuth)`, area `1/2 d(R^2) ^ dTheta`.
#[derive(Clone, Copy, Debug)]
pub struct CoulombThetaMap {
    pub charge: f64,
}

impl ScalarMap for CoulombThetaMap {
    fn chart_value<R: Scalar>(&self, p: [R; 4]) -> Result<ChartValue<R>> {
        let [_, x, y, z] = p;
        let r = (x * x + y * y + z * z).sqrt();
        if (x * x + y * y).re() == 0.0 {
            return Err(Error::ChartSingularity("azimuth undefined on the z axis"));
        }
        Ok(ChartValue {
            coords: [z / r, y.atan2(x) * (2.0 * self.charge)],
            chart: Chart::Planar { density: 0.5 },
        })
    }
}

/// Plane-wave maps `(E0 x, sin(k(z - t))/k)` and `(E0 y, sin(k(z - t))/k)`.
#[derive(Clone, Copy, Debug)]
pub struct PlaneWaveMap {
    pub amplitude: f64,
    pub wavenumber: f64,
    /// `false` for `phi` (uses x), `true` for `theta` (uses y).
    pub transverse_y: bool,
}

impl ScalarMap for PlaneWaveMap {
    fn chart_value<R: Scalar>(&self, p: [R; 4]) -> Result<ChartValue<R>> {
        let [t, x, y, z] = p;
        let first = if self.transverse_y { y } else { x } * self.amplitude;
        let second = ((z - t) * self.wavenumber).sin() * (1.0 / self.wavenumber);
        Ok(ChartValue {
            coords: [first, second],
            chart: Chart::Planar { density: 1.0 },
        })
    }
}

/// A map with constant value.
#[derive(Clone, Copy, Debug)]
pub struct ConstantMap(pub [f64; 2]);

impl ScalarMap for ConstantMap {
    fn chart_value<R: Scalar>(&self, _p: [R; 4]) -> Result<ChartValue<R>> {
        Ok(ChartValue {
            coords: self.0.map(R::cst),
            chart: Chart::Stereo,
        })
    }
}

pub fn make_coulomb(e: f64) -> Result<FieldSolution> {
    if e == 0.0 || !e.is_finite() {
        return Err(Error::InvalidParameter(
            "Coulomb charge must be finite and nonzero".into(),
        ));
    }
    Ok(FieldSolution::from_analytic("coulomb", Coulomb { charge: e })
        .with_decay(true)
        .with_singular_set(SingularSet::SpatialOrigin { radius: COULOMB_CORE })
        .with_expected_class(FieldClass::ElectricallyDominated)
        .with_potential_base(Event::new(0.0, 3.0, 0.0, 0.0)))
}

pub fn make_plane_wave(e0: f64, k: f64) -> Result<FieldSolution> {
    if !(e0 > 0.0 && k > 0.0) {
        return Err(Error::InvalidParameter("plane wave needs E0 > 0 and k > 0".into()));
    }
    Ok(FieldSolution::from_analytic(
        "plane-wave",
        PlaneWave {
            amplitude: e0,
            wavenumber: k,
        },
    )
    .with_decay(false)
    .with_expected_class(FieldClass::Null))
}

pub fn make_hopf_ranada() -> FieldSolution {
    let mut s = FieldSolution::from_analytic("hopf", HopfRanada)
        .with_decay(true)
        .with_expected_class(FieldClass::Null);
    s.provenance = Some(("phi = Pi_1 o Omega".into(), "theta = Pi_2 o Omega".into()));
    s
}

pub fn from_scalar_pair<P, Q>(phi: P, theta: Q) -> FieldSolution
where
    P: ScalarMap + std::fmt::Debug + 'static,
    Q: ScalarMap + std::fmt::Debug + 'static,
{
    let provenance = (format!("{phi:?}"), format!("{theta:?}"));
    let mut s = FieldSolution::from_analytic("scalar-pair", ScalarPair { phi, theta });
    s.provenance = Some(provenance);
    s
}

/// Built-in solution by CLI name.
pub fn by_name(name: &str, e: f64, e0: f64, k: f64) -> Result<FieldSolution> {
    match name {
        "coulomb" => make_coulomb(e),
        "plane-wave" => make_plane_wave(e0, k),
        "hopf" => Ok(make_hopf_ranada()),
        other => Err(Error::InvalidParameter(format!("unknown solution `{other}`"))),
    }
}

/// `|*F - Fdual|_inf / (|F|_inf + floor)`.
pub fn duality_residual(s: &FieldSolution, p: &Event) -> Result<f64> {
    let (f, g) = s.fields(p)?;
    Ok((hodge_dual(&f) - g).norm_inf() / (f.norm_inf() + 1e-300))
}
