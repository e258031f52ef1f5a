use dunkl::config::{ExperimentConfig, OutputFormat, Overrides};
use dunkl::DunklError;

fn config_err(text: &str) -> String {
    let cfg = ExperimentConfig::parse(text, false).and_then(|c| c.validate().map(|_| c));
    match cfg {
        Err(DunklError::Config(m)) => m,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn empty_document_is_the_default() {
    let cfg = ExperimentConfig::parse("", false).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
    cfg.validate().unwrap();
    assert_eq!(cfg.beta, vec![0.3, 0.5, 0.7]);
    assert_eq!(cfg.k, vec![0.0, 0.5, 1.0]);
    assert_eq!(cfg.time_grid().unwrap().len(), 60);
}

#[test]
fn tables_override_fields() {
    let text = r#"
k = [1.0]
beta = [0.25, 0.75]
corpus = ["cusp", "sine"]
generators = ["jordan"]

[time_grid]
points = 12

[tolerances]
ode = 1e-9

[output]
format = "json"
"#;
    let cfg = ExperimentConfig::parse(text, false).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.k, vec![1.0]);
    assert_eq!(cfg.beta, vec![0.25, 0.75]);
    assert_eq!(cfg.time_grid.points, 12);
    assert_eq!(cfg.time_grid.t_min, 1e-3);
    assert_eq!(cfg.output.format, OutputFormat::Json);
    assert_eq!(cfg.tol("ode"), 1e-9);
    // a tolerance table replaces the defaults, so unnamed checks fall back
    assert_eq!(cfg.tol("kernels"), 1e-6);
}

#[test]
fn unknown_field_reports_line_and_name() {
    let m = config_err("k = [0.0]\n\n[time_grid]\npoints = 10\nstep = 3\n");
    assert!(m.contains("line 5"), "{m}");
    assert!(m.contains("step"), "{m}");
}

#[test]
fn type_error_reports_line() {
    let m = config_err("beta = [0.5]\nk = \"one\"\n");
    assert!(m.contains("line 2"), "{m}");
}

#[test]
fn json_by_extension() {
    let dir = std::env::temp_dir().join(format!("dunkl-config-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("c.json");
    std::fs::write(&good, r#"{"k": [0.5], "space_grid": {"linear": 16, "dyadic": 4}}"#).unwrap();
    let cfg = ExperimentConfig::load(&good).unwrap();
    assert_eq!(cfg.k, vec![0.5]);
    assert_eq!(cfg.space_grid.linear, 16);

    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\n  \"k\": [0.5],\n  \"kk\": 1\n}").unwrap();
    match ExperimentConfig::load(&bad) {
        Err(DunklError::Config(m)) => {
            assert!(m.contains("line 3"), "{m}");
            assert!(m.contains("bad.json"), "{m}");
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(ExperimentConfig::load(&dir.join("missing.toml")), Err(DunklError::Config(_))));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tol_override_leaves_bounds() {
    let mut cfg = ExperimentConfig::default();
    let bounds = cfg.bounds.clone();
    let band = cfg.band;
    cfg.apply(&Overrides { tol: Some(1e-3), ..Default::default() });
    assert!(cfg.tolerances.values().all(|&t| t == 1e-3));
    assert_eq!(cfg.tol("anything"), 1e-3);
    assert_eq!(cfg.bounds, bounds);
    assert_eq!(cfg.band, band);
}

#[test]
fn overrides_replace_lists() {
    let mut cfg = ExperimentConfig::default();
    cfg.apply(&Overrides {
        k: Some(vec![2.5]),
        beta: Some(vec![0.9]),
        format: Some(OutputFormat::Json),
        generators: Some(vec!["diag".into()]),
        ..Default::default()
    });
    assert_eq!(cfg.k, vec![2.5]);
    assert_eq!(cfg.beta, vec![0.9]);
    assert_eq!(cfg.generators, vec!["diag".to_string()]);
    assert_eq!(cfg.output.format, OutputFormat::Json);
    cfg.validate().unwrap();
}

#[test]
fn validation_errors() {
    assert!(config_err("beta = []").contains("beta"));
    assert!(config_err("beta = [-0.5]").contains("beta"));
    assert!(config_err("k = [-1.0]").contains("k:"));
    assert!(config_err("[tolerances]\ndefault = -1e-6").contains("tolerances.default"));
    assert!(config_err("[time_grid]\nt_min = 1.0\nt_max = 0.1").contains("time_grid"));
    assert!(config_err("[space_grid]\nlinear = 0").contains("space_grid"));
    assert!(config_err("corpus = [\"bump\"]").contains("corpus"));
    assert!(config_err("generators = [\"hilbert\"]").contains("hilbert"));
    assert!(config_err("band = [2.0, 1.0]").contains("band"));
    assert!(config_err("[bounds]\nexponent = 0.0").contains("bounds.exponent"));
    assert!(config_err("[quadrature]\ncontour_nodes = 1").contains("quadrature"));
}

#[test]
fn output_format_parse() {
    assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
    assert_eq!("json".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
    assert!("xml".parse::<OutputFormat>().is_err());
}
