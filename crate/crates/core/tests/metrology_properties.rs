use prethermal_core::dynamics::prethermal_state;
use prethermal_core::metrology::{
    cfi_energy_basis, cfi_prethermal_analytic, dstate_dbeta, prethermal_builder, qfi_equilibrium_n, qfi_from_state,
    qfi_prethermal_analytic, sld,
};
use prethermal_core::probes::ProbeModel;

fn beta_grid() -> Vec<f64> {
    (0..50).map(|i| 0.5 + 5.5 * i as f64 / 49.0).collect()
}

fn xi_grid() -> Vec<f64> {
    (0..=10).map(|i| -(i as f64) / 10.0).collect()
}

#[test]
fn numeric_fisher_matches_closed_forms_on_grid() {
    for beta in beta_grid() {
        for xi in xi_grid() {
            let rho = prethermal_state(beta, 1.0, xi).unwrap().matrix();
            let d = dstate_dbeta(prethermal_builder(1.0, xi), beta, None).unwrap();
            let q = qfi_from_state(&rho, &d).unwrap();
            let c = cfi_energy_basis(&rho, &d).unwrap();
            let qa = qfi_prethermal_analytic(beta, 1.0, xi).unwrap();
            let ca = cfi_prethermal_analytic(beta, 1.0, xi).unwrap();
            if xi == -1.0 {
                assert!(q.abs() < 1e-12 && c.abs() < 1e-12 && qa == 0.0 && ca == 0.0);
                continue;
            }
            assert!((q / qa - 1.0).abs() < 1e-6, "beta {beta} xi {xi}: qfi {q} vs {qa}");
            assert!((c / ca - 1.0).abs() < 1e-6, "beta {beta} xi {xi}: cfi {c} vs {ca}");
            assert!(q >= c - 1e-10);
            assert!(qa >= ca - 1e-10);
            if xi == 0.0 {
                assert!((qa - ca).abs() < 1e-10);
                assert!((q - c).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn finite_difference_matches_analytic_derivative() {
    for beta in beta_grid() {
        for xi in xi_grid() {
            let st = prethermal_state(beta, 1.0, xi).unwrap();
            let d = dstate_dbeta(prethermal_builder(1.0, xi), beta, None).unwrap();
            assert!((&d - &st.matrix_derivative()).max_abs() < 1e-8);
        }
    }
}

#[test]
fn sld_defining_equation_holds_on_grid() {
    for beta in [0.5, 2.0, 4.0, 6.0] {
        for xi in xi_grid() {
            let st = prethermal_state(beta, 1.0, xi).unwrap();
            let rho = st.matrix();
            let d = st.matrix_derivative();
            let s = sld(&rho, &d).unwrap();
            assert!(s.residual(&rho, &d) < 1e-9, "beta {beta} xi {xi}");
        }
    }
}

fn energy_variance(m: &ProbeModel) -> f64 {
    let rho = m.gibbs_state();
    let h = m.manifold_hamiltonian();
    let mean = (&h * rho.matrix()).trace().re;
    let second = (&(&h * &h) * rho.matrix()).trace().re;
    second - mean * mean
}

#[test]
fn gibbs_qfi_is_energy_variance() {
    let mut models = vec![
        ProbeModel::qubit(1.0, 0.07, 4.0).unwrap(),
        ProbeModel::v_model(1.0, 1e-4, 0.07, 4.0).unwrap(),
    ];
    for n in 3..=10 {
        models.push(ProbeModel::n_level(1.0, n, 0.0, 0.07, 4.0).unwrap());
    }
    for beta in [1.0, 4.0] {
        for m in &models {
            let m = m.with_beta(beta).unwrap();
            let q = qfi_from_state(&m.gibbs_state(), &m.gibbs_state_derivative()).unwrap();
            assert!((q - energy_variance(&m)).abs() < 1e-9);
            let fnl = qfi_equilibrium_n(beta, 1.0, m.degeneracy()).unwrap();
            assert!((q - fnl).abs() < 1e-9, "N {}", m.degeneracy());
        }
    }
}

#[test]
fn equilibrium_qfi_is_unimodal_in_n() {
    let beta: f64 = 4.0;
    let star = beta.exp();
    let f: Vec<f64> = (1..=200).map(|n| qfi_equilibrium_n(beta, 1.0, n).unwrap()).collect();
    for n in 1..200usize {
        let (a, b) = (f[n - 1], f[n]);
        if ((n + 1) as f64) <= star {
            assert!(b > a, "increasing below N*: {n}");
        } else if (n as f64) >= star {
            assert!(b < a, "decreasing above N*: {n}");
        }
    }
}
