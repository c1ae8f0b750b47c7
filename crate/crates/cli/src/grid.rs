use flucast::models::{ModelKind, ModelSpec};

/// Candidate specs searched when no grid is configured.
pub fn default_grid(seed: u64) -> Vec<ModelSpec> {
    let mut g = vec![ModelSpec::new(ModelKind::Ols)];
    for a in [0.1, 1.0, 10.0, 100.0] {
        g.push(ModelSpec::new(ModelKind::Ridge).with("alpha", a));
    }
    for a in [0.01, 0.1, 1.0, 10.0] {
        g.push(ModelSpec::new(ModelKind::Lasso).with("alpha", a));
    }
    for a in [0.1, 1.0, 10.0] {
        for r in [0.1, 0.5, 0.9] {
            g.push(ModelSpec::new(ModelKind::ElasticNet).with("alpha", a).with("l1_ratio", r));
        }
    }
    for k in [2.0, 4.0, 6.0, 8.0, 10.0] {
        g.push(ModelSpec::new(ModelKind::Knn).with("k", k));
    }
    for c in [1.0, 10.0, 100.0] {
        g.push(ModelSpec::new(ModelKind::Svr).with("c", c));
    }
    for d in [3.0, 6.0, 10.0] {
        g.push(ModelSpec::new(ModelKind::Tree).with("max_depth", d));
    }
    for m in [1.0, 3.0, 5.0] {
        g.push(ModelSpec::new(ModelKind::RandomForest).with("max_features", m).with_seed(seed));
    }
    for lr in [0.001, 0.01, 0.1] {
        g.push(ModelSpec::new(ModelKind::AdaboostR2).with("learning_rate", lr).with_seed(seed));
    }
    for lr in [0.1, 0.3] {
        for a in [0.0, 10.0] {
            g.push(ModelSpec::new(ModelKind::Gbt).with("learning_rate", lr).with("reg_alpha", a).with_seed(seed));
        }
    }
    g
}
