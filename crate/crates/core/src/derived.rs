//! Quantities obtained from the region of tension or from single channels:
//! Gray-Wyner and assisted-common-information points, the affine maps that
//! carry them onto tension points, Wyner common information and the corner
//! quantities `G(Y→X)`, `G(X→Y)`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::probkit::{
    channel_entropies, check_channel, conditional_mutual_information, Channel, ExtendedJoint,
    JointPMF, TensionPoint, Var,
};
use crate::structure::intercepts_exact;
use crate::tension_opt::{slice_at, OptimizerConfig};

/// Rates `(H(X|Q), H(Y|Q), I(XY;Q))` of a Gray-Wyner system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrayWynerPoint {
    pub ra: f64,
    pub rb: f64,
    pub rc: f64,
}

impl GrayWynerPoint {
    /// Checks the lower bounds every achievable Gray-Wyner point satisfies.
    pub fn satisfies_lower_bounds(&self, j: &JointPMF, tol: f64) -> bool {
        self.ra + self.rc >= j.entropy_x() - tol
            && self.rb + self.rc >= j.entropy_y() - tol
            && self.ra + self.rb + self.rc >= j.entropy_xy() - tol
    }
}

/// Assisted common information point `(I(Y;Q|X), I(X;Q|Y), I(XY;Q))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ACIPoint {
    pub r1: f64,
    pub r2: f64,
    pub rci: f64,
}

pub fn gray_wyner_point(j: &JointPMF, c: &Channel) -> Result<GrayWynerPoint> {
    check_channel(j, c)?;
    let e = channel_entropies(j, c);
    Ok(GrayWynerPoint {
        ra: (e.hxq - e.hq).max(0.0),
        rb: (e.hyq - e.hq).max(0.0),
        rc: (j.entropy_xy() + e.hq - e.hxyq).max(0.0),
    })
}

/// Evaluated on the dense `p(x,y,q)` tensor, independently of the tension
/// routines.
pub fn aci_point(j: &JointPMF, c: &Channel) -> Result<ACIPoint> {
    let e = ExtendedJoint::new(j, c)?;
    let rci = e.entropy_of(&[Var::X, Var::Y]) + e.entropy_of(&[Var::Q])
        - e.entropy_of(&[Var::X, Var::Y, Var::Q]);
    Ok(ACIPoint {
        r1: conditional_mutual_information(&e, Var::Y, Var::Q, Var::X)?,
        r2: conditional_mutual_information(&e, Var::X, Var::Q, Var::Y)?,
        rci: rci.max(0.0),
    })
}

/// `(r1, r2, rci) ↦ (r1, r2, I(X;Y) + r1 + r2 - rci)`.
pub fn affine_f(p: &ACIPoint, j: &JointPMF) -> TensionPoint {
    TensionPoint::new(p.r1, p.r2, j.mutual_information() + p.r1 + p.r2 - p.rci)
}

/// `(ra, rb, rc) ↦ (ra + rc - H(X), rb + rc - H(Y), ra + rb + rc - H(XY))`.
pub fn affine_g(p: &GrayWynerPoint, j: &JointPMF) -> TensionPoint {
    TensionPoint::new(
        p.ra + p.rc - j.entropy_x(),
        p.rb + p.rc - j.entropy_y(),
        p.ra + p.rb + p.rc - j.entropy_xy(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WynerEstimate {
    /// `I(X;Y) + r1 + r2` at the best slice point found.
    pub value: f64,
    pub mutual_information: f64,
    pub r1: f64,
    pub r2: f64,
    /// `I(X;Y|Q)` at the witness; zero on the exact slice.
    pub residual: f64,
    /// `I(XY;Q)` evaluated directly at the witness.
    pub direct: f64,
    /// Residual above the slice tolerance, or the optimizer hit its cap.
    pub flagged: bool,
}

/// Wyner common information through the `z = 0` slice of the region:
/// `I(X;Y) + min r1 + r2` over `(r1, r2, 0)` in the region.
pub fn wyner_common_information(j: &JointPMF, cfg: &OptimizerConfig) -> Result<WynerEstimate> {
    let sp = slice_at(j, 0.5, cfg)?;
    let mi = j.mutual_information();
    let direct = aci_point(j, &sp.witness)?.rci;
    Ok(WynerEstimate {
        value: mi + sp.r1 + sp.r2,
        mutual_information: mi,
        r1: sp.r1,
        r2: sp.r2,
        residual: sp.residual,
        direct,
        flagged: !sp.feasible || !sp.converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerQuantities {
    /// `G(Y→X) = I(X;Y) + tx`.
    pub gyx: f64,
    /// `G(X→Y) = I(X;Y) + ty`.
    pub gxy: f64,
    pub max: f64,
}

pub fn corner_quantities(j: &JointPMF) -> CornerQuantities {
    let i = intercepts_exact(j);
    let mi = j.mutual_information();
    let (gyx, gxy) = (mi + i.tx, mi + i.ty);
    CornerQuantities {
        gyx,
        gxy,
        max: gyx.max(gxy),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::{tension_of, Alphabet};
    use crate::structure::CommonPart;

    fn copy_bit() -> JointPMF {
        JointPMF::from_matrix(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn gray_wyner_examples() {
        let j = JointPMF::from_matrix(2, 3, vec![0.1, 0.2, 0.05, 0.3, 0.15, 0.2]).unwrap();
        let p = gray_wyner_point(&j, &Channel::constant(6)).unwrap();
        assert!(close(p.ra, j.entropy_x()) && close(p.rb, j.entropy_y()) && close(p.rc, 0.0));
        let p = gray_wyner_point(&j, &Channel::reveal_xy(j.x_alphabet(), j.y_alphabet())).unwrap();
        assert!(close(p.ra, 0.0) && close(p.rb, 0.0) && close(p.rc, j.entropy_xy()));
        let c = copy_bit();
        let p = gray_wyner_point(&c, &Channel::reveal_x(c.x_alphabet(), 2)).unwrap();
        assert!(close(p.ra, 0.0) && close(p.rb, 0.0) && close(p.rc, 1.0));
        assert!(p.satisfies_lower_bounds(&c, 1e-9));
    }

    #[test]
    fn aci_examples() {
        let c = copy_bit();
        let p = aci_point(&c, &Channel::constant(4)).unwrap();
        assert!(close(p.r1, 0.0) && close(p.r2, 0.0) && close(p.rci, 0.0));
        let p = aci_point(&c, &Channel::reveal_x(c.x_alphabet(), 2)).unwrap();
        assert!(close(p.r1, 0.0) && close(p.r2, 0.0) && close(p.rci, 1.0));

        // X = (X', Q0), Y = (Y', Q0) with Q0 a uniform 4-ary symbol
        let x = Alphabet::indexed(2).product(&Alphabet::indexed(4));
        let y = Alphabet::indexed(3).product(&Alphabet::indexed(4));
        let mut mass = vec![0.0; 8 * 12];
        for xp in 0..2 {
            for yp in 0..3 {
                for q in 0..4 {
                    mass[(xp * 4 + q) * 12 + yp * 4 + q] = 1.0 / 24.0;
                }
            }
        }
        let j = JointPMF::new(x, y, mass).unwrap();
        let w = CommonPart::of(&j).witness(&j);
        let p = aci_point(&j, &w).unwrap();
        assert!(close(p.r1, 0.0) && close(p.r2, 0.0) && close(p.rci, 2.0));
    }

    #[test]
    fn affine_maps_match_tension() {
        let j = JointPMF::from_matrix(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let c = Channel::from_rows(
            Alphabet::indexed(3),
            vec![
                vec![0.2, 0.5, 0.3],
                vec![0.6, 0.1, 0.3],
                vec![0.0, 1.0, 0.0],
                vec![0.3, 0.3, 0.4],
            ],
        )
        .unwrap();
        let t = tension_of(&j, &c).unwrap();
        let f = affine_f(&aci_point(&j, &c).unwrap(), &j);
        let g = affine_g(&gray_wyner_point(&j, &c).unwrap(), &j);
        assert!(t.max_abs_diff(f) < 1e-9);
        assert!(t.max_abs_diff(g) < 1e-9);
        let zero = affine_f(
            &ACIPoint {
                r1: 0.0,
                r2: 0.0,
                rci: 0.0,
            },
            &copy_bit(),
        );
        assert!(zero.max_abs_diff(TensionPoint::new(0.0, 0.0, 1.0)) < 1e-12);
    }

    #[test]
    fn wyner_of_copy_bit() {
        let w = wyner_common_information(&copy_bit(), &OptimizerConfig::default()).unwrap();
        assert!(close(w.value, 1.0) && !w.flagged);
    }

    #[test]
    fn corners() {
        let ind = JointPMF::from_matrix(2, 2, vec![0.25; 4]).unwrap();
        let c = corner_quantities(&ind);
        assert!(close(c.gyx, 0.0) && close(c.gxy, 0.0));
        let c = corner_quantities(&copy_bit());
        assert!(close(c.gyx, 1.0) && close(c.gxy, 1.0) && close(c.max, 1.0));
    }
}
