//! Closed-form moments and exact operator propagation.
//!
//! Single-mode inputs are summarized by their normally ordered moments
//! `<a^dag^m a^n>` up to total order four. Observables written in output
//! modes are pulled back through a two-mode network by substitution and
//! normal ordering, then evaluated on the product input state.

mod polynomial;

pub use polynomial::{
    heisenberg_derivative, heisenberg_substitute, normal_order, Exponents, Ladder, Monomial,
    OperatorPolynomial, MAX_DEGREE,
};

use num_complex::Complex64 as C64;

use crate::error::{MetroError, Result};
use crate::fock_oracle::Seed;

/// Highest moment order any table holds.
pub const MAX_ORDER: usize = 4;

/// Largest `|r|` accepted before cosh/sinh powers lose meaning.
pub const MAX_SQUEEZING: f64 = 10.0;

/// `(m, n) -> <a^dag^m a^n>` for `m + n <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    order: usize,
    values: [[C64; MAX_ORDER + 1]; MAX_ORDER + 1],
}

impl MomentTable {
    /// Builds a table of the given order from a moment function.
    pub fn from_fn(order: usize, f: impl Fn(usize, usize) -> C64) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(MetroError::DegreeTooHigh {
                degree: order,
                max: MAX_ORDER,
            });
        }
        let mut values = [[C64::new(0.0, 0.0); MAX_ORDER + 1]; MAX_ORDER + 1];
        for (m, row) in values.iter_mut().enumerate() {
            for (n, v) in row.iter_mut().enumerate() {
                if m + n <= order {
                    *v = f(m, n);
                }
            }
        }
        Ok(Self { order, values })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, m: usize, n: usize) -> Result<C64> {
        if m + n > self.order {
            return Err(MetroError::TableOrder {
                m,
                n,
                order: self.order,
            });
        }
        Ok(self.values[m][n])
    }

    pub fn mean_photons(&self) -> f64 {
        self.values[1][1].re
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().flatten().all(|v| v.im.abs() <= tol)
    }
}

/// Moments of `S(r)|k>`, from `S^dag a S = a cosh r + a^dag sinh r` expanded
/// and normally ordered, then evaluated on the number state `|k>`.
pub fn bogoliubov_moments(r: f64, seed: Seed) -> Result<MomentTable> {
    if !(r.abs() <= MAX_SQUEEZING) {
        return Err(MetroError::ParameterRange {
            name: "r",
            value: r,
            reason: "|r| must not exceed 10",
        });
    }
    let (c, s) = (C64::new(r.cosh(), 0.0), C64::new(r.sinh(), 0.0));
    // S^dag a^dag S and S^dag a S
    let raised = OperatorPolynomial::letter(Ladder::ADag)
        .scale(c)
        .add(&OperatorPolynomial::letter(Ladder::A).scale(s));
    let lowered = OperatorPolynomial::letter(Ladder::A)
        .scale(c)
        .add(&OperatorPolynomial::letter(Ladder::ADag).scale(s));
    let k = seed.photons();
    // <k| a^dag^p a^q |k> = delta_pq k!/(k-p)!
    let fock_moment = |p: usize, q: usize| -> f64 {
        if p != q || p > k {
            0.0
        } else {
            ((k - p + 1)..=k).map(|j| j as f64).product()
        }
    };
    let mut values = [[C64::new(0.0, 0.0); MAX_ORDER + 1]; MAX_ORDER + 1];
    for m in 0..=MAX_ORDER {
        for n in 0..=(MAX_ORDER - m) {
            let mut word = OperatorPolynomial::identity();
            for _ in 0..m {
                word = word.mul(&raised)?;
            }
            for _ in 0..n {
                word = word.mul(&lowered)?;
            }
            values[m][n] = word
                .normal_form()
                .into_iter()
                .map(|(e, coeff)| coeff * fock_moment(e.a_dag, e.a))
                .sum();
        }
    }
    Ok(MomentTable {
        order: MAX_ORDER,
        values,
    })
}

/// Moments of a coherent state with real amplitude: `gamma^(m+n)`.
pub fn coherent_moments(gamma: f64) -> Result<MomentTable> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(MetroError::ParameterRange {
            name: "gamma",
            value: gamma,
            reason: "coherent amplitude must be finite and non-negative",
        });
    }
    MomentTable::from_fn(MAX_ORDER, |m, n| C64::new(gamma.powi((m + n) as i32), 0.0))
}

/// `<P>` on the product state whose single-mode moments are `table_a`, `table_b`.
pub fn evaluate(poly: &OperatorPolynomial, table_a: &MomentTable, table_b: &MomentTable) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (e, coeff) in poly.normal_form() {
        acc += coeff * table_a.get(e.a_dag, e.a)? * table_b.get(e.b_dag, e.b)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock_oracle::{
        apply_network, coherent_ket, expectation, squeezed_fock_ket, Truncation, TwoModeKet,
    };
    use crate::network::{EulerAngles, NetworkUnitary};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn re(table: &MomentTable, m: usize, n: usize) -> f64 {
        let v = table.get(m, n).unwrap();
        assert!(v.im.abs() < 1e-12);
        v.re
    }

    #[test]
    fn unsqueezed_single_photon() {
        let t = bogoliubov_moments(0.0, Seed::SinglePhoton).unwrap();
        assert_eq!(re(&t, 0, 0), 1.0);
        assert_eq!(re(&t, 1, 1), 1.0);
        assert_eq!(re(&t, 2, 2), 0.0);
        assert_eq!(re(&t, 2, 0), 0.0);
        assert_eq!(re(&t, 1, 0), 0.0);
    }

    #[test]
    fn squeezed_means() {
        let r: f64 = 0.8;
        let vac = bogoliubov_moments(r, Seed::Vacuum).unwrap();
        assert_relative_eq!(re(&vac, 1, 1), r.sinh().powi(2), max_relative = 1e-14);
        let one = bogoliubov_moments(r, Seed::SinglePhoton).unwrap();
        assert_relative_eq!(
            re(&one, 1, 1),
            (2.0 * r).cosh() + r.sinh().powi(2),
            max_relative = 1e-14
        );
        for k in [Seed::Vacuum, Seed::SinglePhoton] {
            let t = bogoliubov_moments(r, k).unwrap();
            let expect = r.sinh().powi(2) + k.photons() as f64 * (1.0 + 2.0 * r.sinh().powi(2));
            assert_relative_eq!(t.mean_photons(), expect, max_relative = 1e-14);
        }
    }

    #[test]
    fn squeezing_guard() {
        assert!(matches!(
            bogoliubov_moments(10.5, Seed::Vacuum),
            Err(MetroError::ParameterRange { name: "r", .. })
        ));
        assert!(bogoliubov_moments(-10.0, Seed::Vacuum).is_ok());
    }

    #[test]
    fn coherent_tables() {
        let vac = coherent_moments(0.0).unwrap();
        for m in 0..=4 {
            for n in 0..=(4 - m) {
                assert_eq!(re(&vac, m, n), if m + n == 0 { 1.0 } else { 0.0 });
            }
        }
        let one = coherent_moments(1.0).unwrap();
        assert!((0..=4).all(|m| (0..=(4 - m)).all(|n| re(&one, m, n) == 1.0)));
        let two = coherent_moments(2.0).unwrap();
        assert_eq!(re(&two, 1, 1), 4.0);
        assert_eq!(re(&two, 2, 2), 16.0);
        assert!(matches!(
            two.get(3, 2),
            Err(MetroError::TableOrder { m: 3, n: 2, order: 4 })
        ));
    }

    #[test]
    fn product_of_means() {
        let p = OperatorPolynomial::number_a().mul(&OperatorPolynomial::number_b()).unwrap();
        let ta = bogoliubov_moments(0.0, Seed::SinglePhoton).unwrap();
        let tb = coherent_moments(2.0).unwrap();
        assert_eq!(evaluate(&p, &ta, &tb).unwrap().re, 4.0);
    }

    #[test]
    fn lower_order_table_rejects() {
        let low = MomentTable::from_fn(2, |_, _| C64::new(1.0, 0.0)).unwrap();
        let p = OperatorPolynomial::number_a().mul(&OperatorPolynomial::number_a()).unwrap();
        assert!(matches!(
            evaluate(&p, &low, &low),
            Err(MetroError::TableOrder { order: 2, .. })
        ));
    }

    fn generator() -> OperatorPolynomial {
        heisenberg_substitute(&OperatorPolynomial::number_a(), &NetworkUnitary::beam_splitter())
    }

    #[test]
    fn generator_moments_for_single_photon_and_coherent() {
        // brute force on |1> (x) |gamma = 1>, then the analytic route
        let a = squeezed_fock_ket(0.0, Seed::SinglePhoton, Truncation::Auto).unwrap();
        let b = coherent_ket(1.0, Truncation::Auto).unwrap();
        let after_bs = apply_network(&TwoModeKet::product(&a, &b), &NetworkUnitary::beam_splitter());
        let n = OperatorPolynomial::number_a();
        let n2 = n.mul(&n).unwrap();
        let brute_mean = expectation(&after_bs, &n).re;
        let brute_var = expectation(&after_bs, &n2).re - brute_mean * brute_mean;
        assert!((brute_mean - 1.0).abs() < 1e-12);
        assert!((brute_var - 1.25).abs() < 1e-12);

        let ta = bogoliubov_moments(0.0, Seed::SinglePhoton).unwrap();
        let tb = coherent_moments(1.0).unwrap();
        let g = generator();
        let g2 = g.mul(&g).unwrap();
        let mean = evaluate(&g, &ta, &tb).unwrap().re;
        let var = evaluate(&g2, &ta, &tb).unwrap().re - mean * mean;
        assert!((mean - 1.0).abs() < 1e-14);
        assert!((var - 1.25).abs() < 1e-14);
    }

    #[test]
    fn table_matches_fock_oracle() {
        for &(r, seed) in &[(0.3, Seed::Vacuum), (1.1, Seed::SinglePhoton), (0.7, Seed::Vacuum)] {
            let table = bogoliubov_moments(r, seed).unwrap();
            let ket = squeezed_fock_ket(r, seed, Truncation::Auto).unwrap();
            let vac = coherent_ket(0.0, Truncation::Fixed(1)).unwrap();
            let psi = TwoModeKet::product(&ket, &vac);
            for m in 0..=4 {
                for n in 0..=(4 - m) {
                    let mut word = vec![Ladder::ADag; m];
                    word.extend(vec![Ladder::A; n]);
                    let p = OperatorPolynomial::word(C64::new(1.0, 0.0), &word).unwrap();
                    let brute = expectation(&psi, &p);
                    let exact = table.get(m, n).unwrap();
                    assert!(
                        (brute - exact).norm() <= 1e-9 * exact.norm().max(1.0),
                        "r={r} ({m},{n}): {brute} vs {exact}"
                    );
                }
            }
        }
    }

    fn unitary(g: f64, a: f64, t: f64, b: f64) -> NetworkUnitary {
        NetworkUnitary::new(EulerAngles { global: g, alpha: a, half_angle: t, beta: b }.to_matrix())
            .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn substitution_composes(
            x in prop::array::uniform4(-3.0..3.0f64),
            y in prop::array::uniform4(-3.0..3.0f64),
            r in 0.0..1.2f64,
            gamma in 0.0..2.5f64,
        ) {
            let u1 = unitary(x[0], x[1], x[2], x[3]);
            let u2 = unitary(y[0], y[1], y[2], y[3]);
            let n = OperatorPolynomial::number_a().sub(&OperatorPolynomial::number_b());
            let p = n.mul(&n).unwrap();
            let ta = bogoliubov_moments(r, Seed::SinglePhoton).unwrap();
            let tb = coherent_moments(gamma).unwrap();
            let direct = evaluate(&heisenberg_substitute(&p, &u1.after(&u2)), &ta, &tb).unwrap();
            // (a,b)_out = U1 U2 (a,b)_in: substitute U1 first, then U2
            let nested = evaluate(
                &heisenberg_substitute(&heisenberg_substitute(&p, &u1), &u2),
                &ta,
                &tb,
            )
            .unwrap();
            prop_assert!((direct - nested).norm() <= 1e-10 * direct.norm().max(1.0));
        }

        #[test]
        fn photon_means_follow_network(
            x in prop::array::uniform4(-3.0..3.0f64),
            r in 0.0..1.2f64,
            gamma in 0.0..2.5f64,
            vac in any::<bool>(),
        ) {
            let seed = if vac { Seed::Vacuum } else { Seed::SinglePhoton };
            let u = unitary(x[0], x[1], x[2], x[3]);
            let psi = TwoModeKet::product(
                &squeezed_fock_ket(r, seed, Truncation::Auto).unwrap(),
                &coherent_ket(gamma, Truncation::Auto).unwrap(),
            );
            let out = apply_network(&psi, &u);
            let ta = bogoliubov_moments(r, seed).unwrap();
            let tb = coherent_moments(gamma).unwrap();
            for p in [OperatorPolynomial::number_a(), OperatorPolynomial::number_b()] {
                let brute = expectation(&out, &p);
                let exact = evaluate(&heisenberg_substitute(&p, &u), &ta, &tb).unwrap();
                prop_assert!((brute - exact).norm() <= 1e-8 * exact.norm().max(1.0));
            }
        }
    }
}
