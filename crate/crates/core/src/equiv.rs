//! Checks that two lattice Boltzmann schemes induce the same finite
//! difference scheme, plus constructions of such pairs.
//!
//! Every condition is recomputed from the definitions (rows of `B`, `AB`,
//! `A^2 B` and the coefficients of `chi_A`) and then confirmed by deriving
//! both schemes and comparing them structurally.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::derive::{fds_close, fds_equal, fds_from_lbs, fds_from_matrices, Splitting};
use crate::error::{Error, Result};
use crate::opmatrix::{complex_charpoly, OpMatrix};
use crate::rational::{int, QMatrix, Rational};
use crate::scheme::{collision_from_transport, transport_matrix, LbsSpec};
use crate::shiftring::ShiftPoly;

/// Default tolerance for floating symbol comparisons.
pub const SYMBOL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionVerdict {
    pub name: String,
    pub holds: bool,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivReport {
    pub mode: String,
    pub conditions: Vec<ConditionVerdict>,
    /// Structural equality of the derived schemes; `None` if either could
    /// not be derived.
    pub fds_equal: Option<bool>,
    pub differences: Vec<String>,
    pub notes: Vec<String>,
}

impl EquivReport {
    pub fn conditions_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn failed_conditions(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn equivalent(&self) -> bool {
        self.conditions_hold() && self.fds_equal == Some(true)
    }
}

impl fmt::Display for EquivReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: {}", self.mode)?;
        for (k, c) in self.conditions.iter().enumerate() {
            let mark = if c.holds { "ok  " } else { "FAIL" };
            writeln!(f, "  [{mark}] ({}) {}", k + 1, c.name)?;
            if !c.holds {
                writeln!(f, "         lhs: {}", c.lhs)?;
                writeln!(f, "         rhs: {}", c.rhs)?;
            }
        }
        match self.fds_equal {
            Some(true) => writeln!(f, "derived schemes: identical")?,
            Some(false) => writeln!(f, "derived schemes: differ")?,
            None => writeln!(f, "derived schemes: not derivable")?,
        }
        for d in &self.differences {
            writeln!(f, "  differs at {d}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        write!(
            f,
            "verdict: {}",
            if self.equivalent() {
                "equivalent"
            } else {
                "not equivalent"
            }
        )
    }
}

fn verdict(name: &str, lhs: &ShiftPoly, rhs: &ShiftPoly) -> ConditionVerdict {
    ConditionVerdict {
        name: name.to_string(),
        holds: lhs == rhs,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
    }
}

fn row_text(row: &[ShiftPoly]) -> String {
    let parts: Vec<String> = row.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(", "))
}

fn check_d1q3_pair(t: &OpMatrix, tt: &OpMatrix) -> Result<()> {
    if t.size() != 3 || tt.size() != 3 {
        return Err(Error::SizeMismatch {
            expected: 3,
            found: if t.size() != 3 { t.size() } else { tt.size() },
        });
    }
    if t.dim() != tt.dim() {
        return Err(Error::DimensionMismatch {
            left: t.dim(),
            right: tt.dim(),
        });
    }
    Ok(())
}

fn compare_derived(t: &OpMatrix, tt: &OpMatrix, relaxation: &[Rational], report: &mut EquivReport) -> Result<()> {
    let (a, b) = collision_from_transport(t, relaxation)?;
    let (at, bt) = collision_from_transport(tt, relaxation)?;
    let f = fds_from_matrices(&a, &b, 1, 0, &Splitting::Canonical)?;
    let ft = fds_from_matrices(&at, &bt, 1, 0, &Splitting::Canonical)?;
    let cmp = fds_equal(&f, &ft)?;
    report.fds_equal = Some(cmp.equal);
    report.differences = cmp.differences.iter().map(ToString::to_string).collect();
    Ok(())
}

/// Three-velocity scheme relaxing both non-conserved moments onto
/// equilibrium (`S = diag(0, 1, 1)`): the scheme for `m_1` only sees the
/// first row of `T`.
pub fn check_trivial(t: &OpMatrix, tt: &OpMatrix) -> Result<EquivReport> {
    check_d1q3_pair(t, tt)?;
    let conditions = (0..3)
        .map(|c| verdict(&format!("t1{0} = t~1{0}", c + 1), t.get(0, c), tt.get(0, c)))
        .collect();
    let mut report = EquivReport {
        mode: "trivial".into(),
        conditions,
        fds_equal: None,
        differences: Vec::new(),
        notes: vec!["S = diag(0, 1, 1), N = 1".into()],
    };
    compare_derived(t, tt, &[int(0), int(1), int(1)], &mut report)?;
    Ok(report)
}

/// The eight conditions for `S = diag(0, 2, 2)`, in fixed order:
/// (1) first rows of `B`, (2)-(3) entries 2 and 3 of the first row of `AB`,
/// (4)-(5) the same for `A^2 B`, (6)-(8) `gamma_2`, `gamma_1`, `gamma_0` of
/// `chi_A`.
pub fn check_nontrivial(t: &OpMatrix, tt: &OpMatrix) -> Result<EquivReport> {
    check_d1q3_pair(t, tt)?;
    let rates = [int(0), int(2), int(2)];
    let (a, b) = collision_from_transport(t, &rates)?;
    let (at, bt) = collision_from_transport(tt, &rates)?;
    let ab = a.mul(&b)?;
    let abt = at.mul(&bt)?;
    let aab = a.mul(&ab)?;
    let aabt = at.mul(&abt)?;
    let chi = a.charpoly();
    let chit = at.charpoly();

    let b_row = &b.row(0)[1..];
    let bt_row = &bt.row(0)[1..];
    let mut conditions = vec![ConditionVerdict {
        name: "(B)_1 = (B~)_1".into(),
        holds: b_row == bt_row,
        lhs: row_text(b_row),
        rhs: row_text(bt_row),
    }];
    conditions.push(verdict("(AB)_12 = (A~B~)_12", ab.get(0, 1), abt.get(0, 1)));
    conditions.push(verdict("(AB)_13 = (A~B~)_13", ab.get(0, 2), abt.get(0, 2)));
    conditions.push(verdict("(A^2B)_12 = (A~^2B~)_12", aab.get(0, 1), aabt.get(0, 1)));
    conditions.push(verdict("(A^2B)_13 = (A~^2B~)_13", aab.get(0, 2), aabt.get(0, 2)));
    conditions.push(verdict("gamma_2 = -tr(A) matches", chi.coeff(2), chit.coeff(2)));
    conditions.push(verdict("gamma_1 matches", chi.coeff(1), chit.coeff(1)));
    conditions.push(verdict("gamma_0 = -det(A) matches", chi.coeff(0), chit.coeff(0)));

    let mut report = EquivReport {
        mode: "nontrivial".into(),
        conditions,
        fds_equal: None,
        differences: Vec::new(),
        notes: vec!["S = diag(0, 2, 2), N = 1".into()],
    };
    compare_derived(t, tt, &rates, &mut report)?;
    Ok(report)
}

/// Compares the derived schemes of two specs directly.
pub fn check_direct(a: &LbsSpec, b: &LbsSpec, moment: usize) -> Result<EquivReport> {
    let fa = fds_from_lbs(a, moment)?;
    let fb = fds_from_lbs(b, moment)?;
    let cmp = fds_equal(&fa, &fb)?;
    Ok(EquivReport {
        mode: "direct".into(),
        conditions: Vec::new(),
        fds_equal: Some(cmp.equal),
        differences: cmp.differences.iter().map(ToString::to_string).collect(),
        notes: Vec::new(),
    })
}

/// Compares the schemes after substituting each spec's linear equilibria.
pub fn check_closed(a: &LbsSpec, b: &LbsSpec, moment: usize) -> Result<EquivReport> {
    let ea = a.equilibria().ok_or(Error::MissingEquilibria)?;
    let eb = b.equilibria().ok_or(Error::MissingEquilibria)?;
    let ca = fds_close(&fds_from_lbs(a, moment)?, ea)?;
    let cb = fds_close(&fds_from_lbs(b, moment)?, eb)?;
    let mut differences = Vec::new();
    if ca.depth() != cb.depth() || ca.n_conserved() != cb.n_conserved() {
        return Err(Error::Incomparable("closed schemes of different shape".into()));
    }
    for (lag, (ra, rb)) in ca.coeffs().iter().zip(cb.coeffs()).enumerate() {
        for (j, (x, y)) in ra.iter().zip(rb).enumerate() {
            if x != y {
                differences.push(format!("closed[lag {lag}][moment {}]", j + 1));
            }
        }
    }
    Ok(EquivReport {
        mode: "closed".into(),
        conditions: Vec::new(),
        fds_equal: Some(differences.is_empty()),
        differences,
        notes: Vec::new(),
    })
}

/// Free parameters of the two-velocity family; `m~11` follows from them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyParams {
    #[serde(serialize_with = "ser_rational")]
    pub m12: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub m21: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub m22: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub eps: Rational,
}

fn ser_rational<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl FamilyParams {
    pub fn new(m12: Rational, m21: Rational, m22: Rational, eps: Rational) -> Self {
        FamilyParams { m12, m21, m22, eps }
    }

    /// `m~11 = m~12 m~21 (eps + 1) / (eps m~22 + 2 m~12 eps - m~22)`.
    pub fn m11(&self) -> Result<Rational> {
        let denom = &self.eps * &self.m22 + int(2) * &self.m12 * &self.eps - &self.m22;
        if denom.is_zero() {
            return Err(Error::DegenerateParameter(format!(
                "eps*m22 + 2*m12*eps - m22 = 0 for m12 = {}, m22 = {}, eps = {}",
                self.m12, self.m22, self.eps
            )));
        }
        Ok(&self.m12 * &self.m21 * (&self.eps + Rational::one()) / denom)
    }

    pub fn moment_matrix(&self) -> Result<QMatrix> {
        let m = QMatrix::from_rows(vec![
            vec![self.m11()?, self.m12.clone()],
            vec![self.m21.clone(), self.m22.clone()],
        ])?;
        if m.determinant()?.is_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(m)
    }
}

/// Two-velocity scheme `c = (1, -1)`, `S = diag(0, s)`, `m2_eq = eps m1`.
pub fn d1q2_spec(moments: QMatrix, s: Rational, eps: Rational) -> Result<LbsSpec> {
    LbsSpec::new(
        moments,
        vec![vec![1], vec![-1]],
        vec![Rational::zero(), s],
        1,
        Some(QMatrix::from_rows(vec![vec![Rational::one()], vec![eps]])?),
    )
}

pub fn d1q2_reference_moments() -> QMatrix {
    QMatrix::from_ints(&[&[1, 1], &[1, -1]]).expect("static matrix")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyVerdict {
    #[serde(serialize_with = "ser_rational")]
    pub s: Rational,
    pub closure_charpoly_equal: bool,
    pub closed_fds_equal: bool,
}

impl FamilyVerdict {
    pub fn holds(&self) -> bool {
        self.closure_charpoly_equal && self.closed_fds_equal
    }
}

#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub params: FamilyParams,
    pub m_tilde: QMatrix,
    pub reference: LbsSpec,
    pub candidate: LbsSpec,
    pub verdict: FamilyVerdict,
}

fn family_verdict(reference: &LbsSpec, candidate: &LbsSpec, s: &Rational) -> Result<FamilyVerdict> {
    let e = reference.closure()?;
    let et = candidate.closure()?;
    let closed_ref = fds_close(
        &fds_from_lbs(reference, 0)?,
        reference.equilibria().ok_or(Error::MissingEquilibria)?,
    )?;
    let closed_cand = fds_close(
        &fds_from_lbs(candidate, 0)?,
        candidate.equilibria().ok_or(Error::MissingEquilibria)?,
    )?;
    Ok(FamilyVerdict {
        s: s.clone(),
        closure_charpoly_equal: e.charpoly() == et.charpoly(),
        closed_fds_equal: closed_ref == closed_cand,
    })
}

/// Builds `M~` from the family formula and compares the scheme it defines
/// with the reference `M = [[1, 1], [1, -1]]` at relaxation rate `s`.
pub fn d1q2_family(params: &FamilyParams, s: &Rational) -> Result<FamilyMember> {
    let m_tilde = params.moment_matrix()?;
    let reference = d1q2_spec(d1q2_reference_moments(), s.clone(), params.eps.clone())?;
    let candidate = d1q2_spec(m_tilde.clone(), s.clone(), params.eps.clone())?;
    let verdict = family_verdict(&reference, &candidate, s)?;
    Ok(FamilyMember {
        params: params.clone(),
        m_tilde,
        reference,
        candidate,
        verdict,
    })
}

/// Per-rate verdicts for one family member.
pub fn d1q2_family_sweep(params: &FamilyParams, rates: &[Rational]) -> Result<Vec<FamilyVerdict>> {
    rates
        .iter()
        .map(|s| d1q2_family(params, s).map(|m| m.verdict))
        .collect()
}

/// Same construction, but the candidate uses its own equilibrium slope
/// `eps_tilde`; exploration only.
pub fn d1q2_family_with_eps_tilde(params: &FamilyParams, eps_tilde: &Rational, s: &Rational) -> Result<FamilyVerdict> {
    let m_tilde = params.moment_matrix()?;
    let reference = d1q2_spec(d1q2_reference_moments(), s.clone(), params.eps.clone())?;
    let candidate = d1q2_spec(m_tilde, s.clone(), eps_tilde.clone())?;
    family_verdict(&reference, &candidate, s)
}

/// Rates `1/4, 1/2, ..., 2`.
pub fn quarter_rate_grid() -> Vec<Rational> {
    (1..=8).map(|k| Rational::new(k.into(), 4.into())).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimilarityWitness {
    /// `P = M~ M^-1`.
    pub p: QMatrix,
    /// Whether `P T P^-1 = T~` holds exactly.
    pub holds: bool,
}

/// Transport matrices over one velocity set are conjugate through
/// `P = M~ M^-1`.
pub fn similarity_witness(
    moments: &QMatrix,
    moments_tilde: &QMatrix,
    velocities: &[Vec<i64>],
) -> Result<SimilarityWitness> {
    if moments.rows() != moments_tilde.rows() || !moments.is_square() || !moments_tilde.is_square() {
        return Err(Error::SizeMismatch {
            expected: moments.rows(),
            found: moments_tilde.rows(),
        });
    }
    let inv = moments.inverse()?;
    let p = moments_tilde.mul(&inv)?;
    let t = transport_matrix(moments, velocities)?;
    let tt = transport_matrix(moments_tilde, velocities)?;
    let conj = conjugate(&t, &p)?;
    Ok(SimilarityWitness { holds: conj == tt, p })
}

/// `P T P^-1` for a rational `P`.
pub fn conjugate(t: &OpMatrix, p: &QMatrix) -> Result<OpMatrix> {
    let pinv = p.inverse()?;
    let p_op = OpMatrix::from_rational(p, t.dim())?;
    let pinv_op = OpMatrix::from_rational(&pinv, t.dim())?;
    p_op.mul(t)?.mul(&pinv_op)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolSample {
    pub theta: Vec<f64>,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolReport {
    pub samples: Vec<SymbolSample>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub agree: bool,
}

/// Compares the complex characteristic polynomials of the two symbol
/// matrices at each sample angle.
pub fn symbol_cross_check(e: &OpMatrix, et: &OpMatrix, thetas: &[Vec<f64>]) -> Result<SymbolReport> {
    if e.size() != et.size() {
        return Err(Error::SizeMismatch {
            expected: e.size(),
            found: et.size(),
        });
    }
    if e.dim() != et.dim() {
        return Err(Error::DimensionMismatch {
            left: e.dim(),
            right: et.dim(),
        });
    }
    let mut samples = Vec::with_capacity(thetas.len());
    for theta in thetas {
        if theta.len() != e.dim() {
            return Err(Error::DimensionMismatch {
                left: e.dim(),
                right: theta.len(),
            });
        }
        let p = complex_charpoly(&e.symbol(theta));
        let pt = complex_charpoly(&et.symbol(theta));
        let deviation = p.iter().zip(&pt).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        samples.push(SymbolSample {
            theta: theta.clone(),
            deviation,
        });
    }
    let max_deviation = samples.iter().map(|s| s.deviation).fold(0.0, f64::max);
    Ok(SymbolReport {
        agree: max_deviation <= SYMBOL_TOLERANCE,
        samples,
        max_deviation,
        tolerance: SYMBOL_TOLERANCE,
    })
}

/// `theta_k = 2 pi k / count` in one dimension.
pub fn uniform_thetas(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| vec![2.0 * std::f64::consts::PI * k as f64 / count as f64])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn sp(text: &str) -> ShiftPoly {
        ShiftPoly::parse(text, 1).unwrap()
    }

    fn sample_t() -> OpMatrix {
        OpMatrix::from_rows(vec![
            vec![sp("1/2 * T[1] + 1/3"), sp("T[-1]"), sp("1/4 * T[1] - 2")],
            vec![sp("-1/4 * T[2]"), sp("1/2"), sp("T[0] - T[1]")],
            vec![sp("3/5"), sp("1/2 * T[-1] + 1/2 * T[1]"), sp("-1 * T[1]")],
        ])
        .unwrap()
    }

    #[test]
    fn self_comparison_is_equivalent() {
        let t = sample_t();
        let triv = check_trivial(&t, &t).unwrap();
        assert!(triv.equivalent());
        assert_eq!(triv.conditions.len(), 3);
        let nontriv = check_nontrivial(&t, &t).unwrap();
        assert!(nontriv.equivalent());
        assert_eq!(nontriv.conditions.len(), 8);
    }

    #[test]
    fn trivial_pair_with_other_rows_changed() {
        let t = sample_t();
        let mut tt = t.clone();
        tt.set(1, 0, sp("7 * T[3]")).unwrap();
        tt.set(2, 2, sp("0")).unwrap();
        let r = check_trivial(&t, &tt).unwrap();
        assert!(r.conditions_hold());
        assert_eq!(r.fds_equal, Some(true));

        tt.set(0, 0, t.get(0, 0) + &ShiftPoly::one(1)).unwrap();
        let r = check_trivial(&t, &tt).unwrap();
        assert_eq!(r.failed_conditions(), vec!["t11 = t~11"]);
        assert_eq!(r.fds_equal, Some(false));
    }

    #[test]
    fn trace_break_detected_at_gamma_2() {
        let t = OpMatrix::zero(3, 1);
        let mut tt = t.clone();
        tt.set(1, 1, ShiftPoly::one(1)).unwrap();
        let r = check_nontrivial(&t, &tt).unwrap();
        assert_eq!(r.failed_conditions(), vec!["gamma_2 = -tr(A) matches"]);
        assert_eq!(r.fds_equal, Some(false));
        assert!(r.differences.iter().any(|d| d == "gamma_2"));
        let e = collision_from_transport(&t, &[int(0), int(2), int(2)]).unwrap().0;
        let et = collision_from_transport(&tt, &[int(0), int(2), int(2)]).unwrap().0;
        let sym = symbol_cross_check(&e, &et, &[vec![0.37]]).unwrap();
        assert!(!sym.agree);
    }

    #[test]
    fn wrong_sizes_rejected() {
        let t = OpMatrix::identity(2, 1);
        assert!(check_trivial(&t, &t).is_err());
        assert!(check_nontrivial(&t, &t).is_err());
    }

    #[test]
    fn family_contains_reference() {
        let eps = rat(3, 7);
        let params = FamilyParams::new(int(1), int(1), int(-1), eps);
        assert_eq!(params.m11().unwrap(), int(1));
        let member = d1q2_family(&params, &int(2)).unwrap();
        assert_eq!(member.m_tilde, d1q2_reference_moments());
        assert!(member.verdict.holds());
    }

    #[test]
    fn family_member_from_worked_parameters() {
        let params = FamilyParams::new(int(2), int(1), int(-1), rat(1, 2));
        assert_eq!(params.m11().unwrap(), rat(6, 5));
        let member = d1q2_family(&params, &int(2)).unwrap();
        assert_eq!(
            member.m_tilde,
            QMatrix::from_fracs(&[&[(6, 5), (2, 1)], &[(1, 1), (-1, 1)]]).unwrap()
        );
        assert_eq!(member.m_tilde.determinant().unwrap(), rat(-16, 5));
        assert!(member.verdict.holds());
    }

    #[test]
    fn family_degenerate_denominator() {
        let params = FamilyParams::new(int(1), int(1), int(2), rat(1, 2));
        assert!(matches!(params.m11(), Err(Error::DegenerateParameter(_))));
        assert!(matches!(
            d1q2_family(&params, &int(2)),
            Err(Error::DegenerateParameter(_))
        ));
    }

    #[test]
    fn family_singular_candidate() {
        // m21 = 0 forces m11 = 0 and a zero first column
        let params = FamilyParams::new(int(1), int(0), int(1), int(2));
        assert_eq!(params.m11().unwrap(), int(0));
        assert!(matches!(params.moment_matrix(), Err(Error::SingularMatrix)));
    }

    #[test]
    fn similarity_of_identical_moments() {
        let m = d1q2_reference_moments();
        let w = similarity_witness(&m, &m, &[vec![1], vec![-1]]).unwrap();
        assert_eq!(w.p, QMatrix::identity(2));
        assert!(w.holds);
    }

    #[test]
    fn similarity_with_family_member() {
        let m = d1q2_reference_moments();
        let mt = QMatrix::from_fracs(&[&[(6, 5), (2, 1)], &[(1, 1), (-1, 1)]]).unwrap();
        let w = similarity_witness(&m, &mt, &[vec![1], vec![-1]]).unwrap();
        assert!(w.holds);
        assert_eq!(w.p, mt.mul(&m.inverse().unwrap()).unwrap());
    }

    #[test]
    fn symbol_check_of_identical_matrices() {
        let e = sample_t();
        let r = symbol_cross_check(&e, &e, &uniform_thetas(8)).unwrap();
        assert!(r.agree);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn report_text_mentions_failures() {
        let t = OpMatrix::zero(3, 1);
        let mut tt = t.clone();
        tt.set(1, 1, ShiftPoly::one(1)).unwrap();
        let text = check_nontrivial(&t, &tt).unwrap().to_string();
        assert!(text.contains("[FAIL] (6)"));
        assert!(text.ends_with("verdict: not equivalent"));
    }
}
