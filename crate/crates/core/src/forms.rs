//! Pointwise Minkowski exterior algebra.
//!
//! Conventions: signature (+,-,-,-), coordinates ordered (t, x, y, z),
//! `eps_{0123} = +1`. Two-forms store the six independent covariant components
//! in the order (01, 02, 03, 12, 13, 23); three-forms in the order
//! (012, 013, 023, 123).

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{Error, Result};

/// Diagonal of the Minkowski metric.
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Index pairs of the stored two-form components.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Index triples of the stored three-form components.
pub const TRIPLES: [(usize, usize, usize); 4] = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];

/// Squared norms below this are treated as the zero form.
pub const NORM_FLOOR: f64 = 1e-286;

/// Default relative tolerance for simplicity and kernel rank decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A spacetime event in natural units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Event {
    pub const ORIGIN: Event = Event {
        t: 0.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Event { t, x, y, z }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Event::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    pub fn spatial(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn radius(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    /// `self + s * (other - self)`.
    pub fn lerp(self, other: Event, s: f64) -> Event {
        let (a, b) = (self.to_array(), other.to_array());
        Event::from_array([0, 1, 2, 3].map(|i| a[i] + s * (b[i] - a[i])))
    }

    pub fn offset(self, v: FourVector) -> Event {
        let a = self.to_array();
        Event::from_array([0, 1, 2, 3].map(|i| a[i] + v.0[i]))
    }
}

/// Displacement vector between two events.
impl Sub for Event {
    type Output = FourVector;
    fn sub(self, o: Event) -> FourVector {
        let (a, b) = (self.to_array(), o.to_array());
        FourVector([0, 1, 2, 3].map(|i| a[i] - b[i]))
    }
}

/// Components of a vector (or, where documented, a covector) in the
/// coordinate basis.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

/// A one-form stored by its covariant components.
pub type Covector = FourVector;

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub fn new(v0: f64, v1: f64, v2: f64, v3: f64) -> Self {
        FourVector([v0, v1, v2, v3])
    }

    /// Purely spatial vector.
    pub fn spatial(s: [f64; 3]) -> Self {
        FourVector([0.0, s[0], s[1], s[2]])
    }

    /// Minkowski product `eta(self, o)`.
    pub fn eta_dot(&self, o: &FourVector) -> f64 {
        (0..4).map(|a| ETA[a] * self.0[a] * o.0[a]).sum()
    }

    pub fn euclid_dot(&self, o: &FourVector) -> f64 {
        (0..4).map(|a| self.0[a] * o.0[a]).sum()
    }

    pub fn euclid_norm(&self) -> f64 {
        self.euclid_dot(self).sqrt()
    }

    pub fn normalized(&self) -> FourVector {
        *self * (1.0 / self.euclid_norm())
    }

    /// Index lowering (or raising; the metric is its own inverse).
    pub fn lower(&self) -> FourVector {
        FourVector([0, 1, 2, 3].map(|a| ETA[a] * self.0[a]))
    }

    pub fn space_part(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector([0, 1, 2, 3].map(|a| self.0[a] + o.0[a]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector([0, 1, 2, 3].map(|a| self.0[a] - o.0[a]))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector(self.0.map(|c| c * s))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        self * -1.0
    }
}

/// Antisymmetric covariant rank-2 tensor, stored as (F01, F02, F03, F12, F13, F23).
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoForm(pub [f64; 6]);

impl TwoForm {
    pub const ZERO: TwoForm = TwoForm([0.0; 6]);

    /// Basis form `dx^a ^ dx^b` for `a != b`.
    pub fn basis(a: usize, b: usize) -> TwoForm {
        let mut f = TwoForm::ZERO;
        f.set(a, b, 1.0);
        f
    }

    /// Component `F_ab` for arbitrary indices.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        sign * self.0[pair_slot(lo, hi)]
    }

    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        assert!(a != b, "diagonal of a two-form is structurally zero");
        if a < b {
            self.0[pair_slot(a, b)] = v;
        } else {
            self.0[pair_slot(b, a)] = -v;
        }
    }

    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            m[a][b] = self.0[k];
            m[b][a] = -self.0[k];
        }
        m
    }

    /// Contravariant components `F^ab`, returned in the same slot order.
    pub fn raised(&self) -> TwoForm {
        TwoForm(raise_components(self.0))
    }

    /// Sum of squared components.
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// `F_ab v^b` as a covector.
    pub fn contract(&self, v: &FourVector) -> Covector {
        let m = self.matrix();
        FourVector([0, 1, 2, 3].map(|a| (0..4).map(|b| m[a][b] * v.0[b]).sum()))
    }
}

impl Add for TwoForm {
    type Output = TwoForm;
    fn add(self, o: TwoForm) -> TwoForm {
        TwoForm([0, 1, 2, 3, 4, 5].map(|k| self.0[k] + o.0[k]))
    }
}

impl Sub for TwoForm {
    type Output = TwoForm;
    fn sub(self, o: TwoForm) -> TwoForm {
        TwoForm([0, 1, 2, 3, 4, 5].map(|k| self.0[k] - o.0[k]))
    }
}

impl Mul<f64> for TwoForm {
    type Output = TwoForm;
    fn mul(self, s: f64) -> TwoForm {
        TwoForm(self.0.map(|c| c * s))
    }
}

impl Neg for TwoForm {
    type Output = TwoForm;
    fn neg(self) -> TwoForm {
        self * -1.0
    }
}

/// Covariant three-form, stored as (T012, T013, T023, T123).
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ThreeForm(pub [f64; 4]);

impl ThreeForm {
    pub const ZERO: ThreeForm = ThreeForm([0.0; 4]);

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// The purely spatial (xyz) component.
    pub fn spatial(&self) -> f64 {
        self.0[3]
    }
}

impl Add for ThreeForm {
    type Output = ThreeForm;
    fn add(self, o: ThreeForm) -> ThreeForm {
        ThreeForm([0, 1, 2, 3].map(|k| self.0[k] + o.0[k]))
    }
}

/// The two quadratic Lorentz invariants of a two-form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantPair {
    /// `1/2 F_ab F^ab`, equal to `B.B - E.E`.
    pub psi: f64,
    /// `1/4 *F_ab F^ab`, equal to `E.B`.
    pub phi: f64,
}

#[inline]
fn pair_slot(lo: usize, hi: usize) -> usize {
    match (lo, hi) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => unreachable!("invalid pair ({lo},{hi})"),
    }
}

#[inline]
pub(crate) fn raise_components<R: Scalar>(f: [R; 6]) -> [R; 6] {
    [-f[0], -f[1], -f[2], f[3], f[4], f[5]]
}

/// Hodge dual on raw components; shared by the `f64` and jet evaluators.
#[inline]
pub(crate) fn hodge_components<R: Scalar>(f: [R; 6]) -> [R; 6] {
    let [f01, f02, f03, f12, f13, f23] = f;
    [f23, -f13, f12, -f03, f02, -f01]
}

/// Hodge dual `*F_ab = 1/2 eps_abcd F^cd`; applying it twice gives `-F`.
pub fn hodge_dual(f: &TwoForm) -> TwoForm {
    TwoForm(hodge_components(f.0))
}

/// Coefficient of `f ^ g` relative to `dt ^ dx ^ dy ^ dz`.
pub fn wedge_22(f: &TwoForm, g: &TwoForm) -> f64 {
    let (a, b) = (f.0, g.0);
    a[0] * b[5] - a[1] * b[4] + a[2] * b[3] + a[3] * b[2] - a[4] * b[1] + a[5] * b[0]
}

/// `f ^ a` for a two-form and a one-form.
pub fn wedge_21(f: &TwoForm, a: &Covector) -> ThreeForm {
    ThreeForm(TRIPLES.map(|(i, j, k)| f.get(i, j) * a.0[k] + f.get(j, k) * a.0[i] + f.get(k, i) * a.0[j]))
}

pub fn invariants(f: &TwoForm) -> InvariantPair {
    let up = f.raised();
    let dual = hodge_dual(f);
    let psi: f64 = (0..6).map(|k| f.0[k] * up.0[k]).sum();
    let phi: f64 = 0.5 * (0..6).map(|k| dual.0[k] * up.0[k]).sum::<f64>();
    InvariantPair { psi, phi }
}

/// Relative simplicity test `|Phi| <= tol * max(|F|^2, floor)`.
pub fn is_simple(f: &TwoForm, tol: f64) -> bool {
    let inv = invariants(f);
    inv.phi.abs() <= tol * f.norm_sq().max(NORM_FLOOR)
}

/// Euclidean-orthonormal basis of `{v : F_ab v^b = 0}`.
///
/// Singular values below `tol * sigma_max` count as zero. A simple nonzero
/// form yields two vectors and a non-simple one none.
pub fn kernel_2form(f: &TwoForm, tol: f64) -> Result<Vec<FourVector>> {
    if f.norm_sq() < NORM_FLOOR {
        return Err(Error::ZeroForm);
    }
    let m = f.matrix();
    let mat = Matrix4::from_fn(|a, b| m[a][b]);
    Ok(null_space(&mat, tol))
}

/// Right null vectors of a small matrix by singular value decomposition.
pub(crate) fn null_space(mat: &Matrix4<f64>, tol: f64) -> Vec<FourVector> {
    let svd = mat.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let s = svd.singular_values;
    let smax = s.max();
    (0..4)
        .filter(|&i| s[i] <= tol * smax)
        .map(|i| {
            let row = v_t.row(i);
            FourVector([row[0], row[1], row[2], row[3]])
        })
        .collect()
}

/// Mixed-index matrix `F^a_b = eta^aa F_ab`.
pub fn mixed(f: &TwoForm) -> [[f64; 4]; 4] {
    let m = f.matrix();
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = ETA[a] * m[a][b];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Levi-Civita symbol with eps_{0123} = +1, by counting inversions.
    fn levi(idx: [usize; 4]) -> f64 {
        for i in 0..4 {
            for j in i + 1..4 {
                if idx[i] == idx[j] {
                    return 0.0;
                }
            }
        }
        let mut inv = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if idx[i] > idx[j] {
                    inv += 1;
                }
            }
        }
        if inv % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Independent oracle: full index expansion of 1/2 eps_abcd F^cd.
    fn hodge_oracle(f: &TwoForm) -> TwoForm {
        let m = f.matrix();
        let mut up = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                up[a][b] = ETA[a] * ETA[b] * m[a][b];
            }
        }
        let mut out = TwoForm::ZERO;
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            let mut s = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    s += 0.5 * levi([a, b, c, d]) * up[c][d];
                }
            }
            out.0[k] = s;
        }
        out
    }

    #[test]
    fn hodge_of_basis_forms() {
        let dtdx = TwoForm::basis(0, 1);
        let dydz = TwoForm::basis(2, 3);
        assert_eq!(hodge_dual(&dtdx), TwoForm::basis(2, 3) * -1.0);
        assert_eq!(hodge_dual(&dydz), dtdx);
        for (a, b) in PAIRS {
            let e = TwoForm::basis(a, b);
            assert_eq!(hodge_dual(&e), hodge_oracle(&e));
        }
    }

    #[test]
    fn invariant_examples() {
        let dtdx = TwoForm::basis(0, 1);
        let inv = invariants(&dtdx);
        assert_eq!((inv.psi, inv.phi), (-1.0, 0.0));
        let nonsimple = dtdx + TwoForm::basis(2, 3);
        let inv = invariants(&nonsimple);
        assert_eq!((inv.psi, inv.phi), (0.0, -1.0));
        assert_eq!(wedge_22(&nonsimple, &nonsimple), 2.0);
    }

    #[test]
    fn wedge_examples() {
        let dtdx = TwoForm::basis(0, 1);
        let dydz = TwoForm::basis(2, 3);
        assert_eq!(wedge_22(&dtdx, &dtdx), 0.0);
        assert_eq!(wedge_22(&dtdx, &dydz), 1.0);
        let dy = FourVector::new(0.0, 0.0, 1.0, 0.0);
        assert_eq!(wedge_21(&dtdx, &dy), ThreeForm([1.0, 0.0, 0.0, 0.0]));
        assert_eq!(wedge_21(&dydz, &dy), ThreeForm::ZERO);
    }

    #[test]
    fn simplicity_examples() {
        let dtdx = TwoForm::basis(0, 1);
        assert!(is_simple(&dtdx, DEFAULT_TOL));
        assert!(!is_simple(&(dtdx + TwoForm::basis(2, 3)), DEFAULT_TOL));
        assert!(is_simple(&TwoForm::ZERO, DEFAULT_TOL));
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_2form(&TwoForm::basis(0, 1), DEFAULT_TOL).unwrap();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(v.0[0].abs() < 1e-15 && v.0[1].abs() < 1e-15);
            assert!((v.euclid_norm() - 1.0).abs() < 1e-14);
        }
        assert!(k[0].euclid_dot(&k[1]).abs() < 1e-14);
        let full = TwoForm::basis(0, 1) + TwoForm::basis(2, 3);
        assert!(kernel_2form(&full, DEFAULT_TOL).unwrap().is_empty());
        assert_eq!(kernel_2form(&TwoForm::ZERO, DEFAULT_TOL), Err(Error::ZeroForm));
    }

    #[test]
    fn component_access_is_antisymmetric() {
        let mut f = TwoForm::ZERO;
        f.set(3, 1, 2.5);
        assert_eq!(f.get(1, 3), -2.5);
        assert_eq!(f.get(3, 1), 2.5);
        assert_eq!(f.get(2, 2), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn two_form() -> impl Strategy<Value = TwoForm> {
            proptest::array::uniform6(-10.0f64..10.0).prop_map(TwoForm)
        }

        proptest! {
            #[test]
            fn double_dual_is_minus_identity(f in two_form()) {
                prop_assert_eq!(hodge_dual(&hodge_dual(&f)), -f);
            }

            #[test]
            fn closed_form_hodge_matches_index_expansion(f in two_form()) {
                let d = hodge_dual(&f) - hodge_oracle(&f);
                prop_assert!(d.norm_inf() <= 1e-13 * (1.0 + f.norm_inf()));
            }

            #[test]
            fn wedge_identities(f in two_form()) {
                let inv = invariants(&f);
                let scale = 1.0 + f.norm_sq();
                prop_assert!((wedge_22(&f, &f) + 2.0 * inv.phi).abs() <= 1e-12 * scale);
                prop_assert!((wedge_22(&f, &hodge_dual(&f)) - inv.psi).abs() <= 1e-12 * scale);
            }

            #[test]
            fn algebraic_relations(f in two_form()) {
                let inv = invariants(&f);
                let (m, d) = (mixed(&f), mixed(&hodge_dual(&f)));
                let scale = 1.0 + f.norm_sq();
                for a in 0..4 {
                    for c in 0..4 {
                        let delta = if a == c { 1.0 } else { 0.0 };
                        let dd: f64 = (0..4).map(|b| d[a][b] * d[b][c] - m[a][b] * m[b][c]).sum();
                        let fd: f64 = (0..4).map(|b| m[a][b] * d[b][c]).sum();
                        prop_assert!((dd - inv.psi * delta).abs() <= 1e-10 * scale);
                        prop_assert!((fd + inv.phi * delta).abs() <= 1e-10 * scale);
                    }
                }
            }

            #[test]
            fn wedge_21_is_linear(f in two_form(),
                                  a in proptest::array::uniform4(-5.0f64..5.0),
                                  b in proptest::array::uniform4(-5.0f64..5.0)) {
                let (a, b) = (FourVector(a), FourVector(b));
                let lhs = wedge_21(&f, &(a + b));
                let rhs = wedge_21(&f, &a) + wedge_21(&f, &b);
                for k in 0..4 {
                    prop_assert!((lhs.0[k] - rhs.0[k]).abs() <= 1e-12 * (1.0 + lhs.0[k].abs()));
                }
            }

            #[test]
            fn kernel_count_and_annihilation(f in two_form(), v in proptest::array::uniform4(-3.0f64..3.0)) {
                // Project onto the simple forms: w ^ u for random u, w.
                let w = FourVector(v);
                let u = FourVector([f.0[0], f.0[1], f.0[2], f.0[3]]);
                let mut s = TwoForm::ZERO;
                for (k, &(a, b)) in PAIRS.iter().enumerate() {
                    s.0[k] = w.0[a] * u.0[b] - w.0[b] * u.0[a];
                }
                prop_assume!(s.norm_sq() > 1e-6);
                let ker = kernel_2form(&s, DEFAULT_TOL).unwrap();
                prop_assert_eq!(ker.len(), 2);
                let scale = s.norm_sq().sqrt();
                for k in &ker {
                    prop_assert!(s.contract(k).max_abs() <= 1e-8 * scale);
                }
                let general = kernel_2form(&f, DEFAULT_TOL).unwrap();
                prop_assert!(general.is_empty() || general.len() == 2);
            }
        }
    }
}
