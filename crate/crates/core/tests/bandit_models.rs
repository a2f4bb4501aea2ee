use ratiobandit::bandit::{assemble, evaluate_on_product, index_policy_on_product, product_alpha, solve_restless_optimum, DEFAULT_STATE_CAP};
use ratiobandit::gittins::index_table;
use ratiobandit::modelgen::{generate_model, switch_delay_for, EnsembleSpec};
use ratiobandit::sim::mc_ratio;

#[test]
fn product_row_mass_is_joint_survival() {
    let model = generate_model(&EnsembleSpec::new(3, 1, 4, 3), 0).unwrap();
    let product = assemble(&model.with_switch_delay(0.2).unwrap(), DEFAULT_STATE_CAP).unwrap();
    for (j, alt) in product.alternatives().iter().enumerate() {
        for s in 0..product.n() {
            let (x, _) = product.codec().decode(s);
            let survive: f64 = model
                .arms()
                .iter()
                .enumerate()
                .map(|(i, arm)| {
                    let src = if i == j { arm.active_source() } else { arm.passive_source() };
                    src.beta()[x[i]]
                })
                .product();
            let mass: f64 = alt.p().row(s).iter().sum();
            assert!((mass - survive).abs() <= 1e-15, "action {j} state {s}: {mass} vs {survive}");
        }
    }
}

#[test]
fn switching_cost_never_helps_the_optimum() {
    let spec = EnsembleSpec::new(8, 5, 6, 2);
    for k in 0..spec.count {
        let model = generate_model(&spec, k).unwrap();
        let mut last = f64::INFINITY;
        for kappa in [0.0, 0.5, 1.0, 4.0 / 3.0] {
            let m = model.with_switch_delay(switch_delay_for(&model, kappa).unwrap()).unwrap();
            let product = assemble(&m, DEFAULT_STATE_CAP).unwrap();
            let alpha = product_alpha(&product, m.initial()).unwrap();
            let g = solve_restless_optimum(&product, &alpha).unwrap().g;
            assert!(g <= last + 1e-9, "model {k} kappa {kappa}: {g} > {last}");
            last = g;
        }
    }
}

#[test]
fn monte_carlo_matches_index_policy_evaluation() {
    let model = generate_model(&EnsembleSpec::new(21, 1, 4, 2), 0).unwrap();
    let model = model.with_switch_delay(switch_delay_for(&model, 0.5).unwrap()).unwrap();
    let product = assemble(&model, DEFAULT_STATE_CAP).unwrap();
    let alpha = product_alpha(&product, model.initial()).unwrap();
    let pi = index_policy_on_product(&product, &index_table(model.arms()).unwrap());
    let exact = evaluate_on_product(&product, &pi, &alpha).unwrap().ratio;
    let est = mc_ratio(&product, &pi, &alpha, 4, 50_000).unwrap();
    let z = (est.estimate - exact) / est.std_error;
    assert!(z.abs() <= 3.0, "z = {z}: {est:?} vs {exact}");
}
