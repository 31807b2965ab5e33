use geodefect::deformation::{
    cq_proxy, global_pipeline, proxy_points, MetricDescriptor, PipelineConfig, PipelineStatus,
};
use geodefect::manifold::{make_model, ModelDescriptor};
use geodefect::scanner::{scan, Region};

#[test]
fn round_sphere_planes_are_broken() {
    let base = ModelDescriptor::new("sphere", 4);
    let sphere = make_model(&base).unwrap();
    let config = PipelineConfig::default();
    let out = global_pipeline(&sphere, 2, &config).unwrap();
    assert_eq!(out.status, PipelineStatus::Cleared);
    assert!(!out.audit.is_empty());
    for level in &out.levels {
        assert!(level.min_defect > level.tau_pg, "{level:?}");
    }
    // the conformal factor forces smaller supports somewhere
    assert!(out.audit.iter().any(|a| a.rho < config.local.rho));
    for a in &out.audit {
        assert!(a.cq_proxy <= config.xi);
        assert!(a.s > 0.0);
    }

    let region = Region::from_chart(sphere.chart()).unwrap();
    let pts = proxy_points(&region, config.proxy_samples, config.seed, &out.deformations);
    assert!(cq_proxy(&sphere, &out.metric, &pts, 2).unwrap() <= config.xi);

    let rebuilt = MetricDescriptor {
        base,
        deformations: out.deformations.clone(),
    }
    .build()
    .unwrap();
    let grid = config.grid(&sphere, 2).unwrap();
    assert_eq!(scan(&rebuilt, &grid).unwrap(), scan(&out.metric, &grid).unwrap());
}

#[test]
fn audit_is_consistent_with_levels() {
    let torus = make_model(&ModelDescriptor::new("torus", 4)).unwrap();
    let config = PipelineConfig::default();
    let out = global_pipeline(&torus, 3, &config).unwrap();
    assert_eq!(out.status, PipelineStatus::Cleared);
    assert_eq!(out.levels.len(), 1);
    assert_eq!(out.audit.len(), out.deformations.len());
    for (i, a) in out.audit.iter().enumerate() {
        assert_eq!(a.step, i);
        assert_eq!(a.level, 3);
        assert!(a.candidates_after < a.candidates_before || a.min_defect_after >= a.min_defect_before);
    }
    assert_eq!(out.audit.last().unwrap().candidates_after, 0);
    assert_eq!(out.cq_proxy, out.audit.last().unwrap().cq_proxy);
}

#[test]
fn descriptor_json_round_trip_is_exact() {
    let torus = make_model(&ModelDescriptor::new("torus", 4)).unwrap();
    let config = PipelineConfig {
        max_steps: 3,
        ..Default::default()
    };
    let out = global_pipeline(&torus, 3, &config).unwrap();
    assert_eq!(out.status, PipelineStatus::StepLimit);
    assert_eq!(out.deformations.len(), 3);

    let desc = MetricDescriptor {
        base: ModelDescriptor::new("torus", 4),
        deformations: out.deformations,
    };
    let text = serde_json::to_string(&desc).unwrap();
    let back = MetricDescriptor::from_json_str(&text).unwrap();
    assert_eq!(back, desc);
    let rebuilt = back.build().unwrap();
    for k in 0..200 {
        let x = nalgebra::DVector::from_fn(4, |i, _| ((k * 7 + i * 13) % 97) as f64 / 97.0);
        assert_eq!(rebuilt.jet(&x).unwrap(), out.metric.jet(&x).unwrap());
    }
}
