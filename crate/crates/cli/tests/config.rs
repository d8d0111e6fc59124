use gravwave::laminar::Vorticity;
use gravwave_cli::config::{parse_resolution, RunConfig, Side, VorticitySpec};
use gravwave_cli::error::CliError;

const BASE: &str = "[physical]\ng = 9.81\nh = 1.0\nL = 6.0\n";

#[test]
fn defaults_fill_missing_sections() {
    let cfg = RunConfig::from_toml(BASE).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.vorticity, VorticitySpec::Constant { value: 0.0 });
    assert_eq!((cfg.numerics.order, cfg.numerics.rows), (32, 64));
    assert_eq!(cfg.numerics.shooting(), 64);
    assert!(cfg.continuation.is_none() && cfg.output.is_none());
    let cfg = RunConfig::from_toml(&format!("{BASE}[continue]\nside = \"negative\"\n")).unwrap();
    let c = cfg.continuation.unwrap();
    assert_eq!(c.side, Side::Negative);
    assert_eq!(c.bracket(), (-50.0, -0.05));
    assert_eq!(c.continuation(&cfg.numerics, -1.0).direction, -1.0);
}

#[test]
fn threshold_overrides_apply() {
    let cfg = RunConfig::from_toml(&format!("{BASE}[continue]\nthresholds = {{ bernoulli_gap_max = 1e-9, lambda_max = 50.0 }}\n")).unwrap();
    let t = cfg.continuation.unwrap().thresholds.apply();
    assert_eq!(t.bernoulli_gap_max, 1e-9);
    assert_eq!(t.lambda_max, 50.0);
    assert_eq!(t.height_margin_min, 1e-3);
}

#[test]
fn vorticity_kinds_build() {
    let cases = [
        ("kind = \"affine\"\nslope = -1.5\nintercept = 1.0", 1.0 - 1.5 * 0.4),
        ("kind = \"sine\"\namplitude = 2.0\nfrequency = 1.0", 2.0 * 0.4f64.sin()),
        ("kind = \"piecewise\"\nbreakpoints = [-10.0, 0.0, 10.0]\npieces = [[1.0], [1.0, 2.0]]", 1.8),
    ];
    for (body, at) in cases {
        let cfg = RunConfig::from_toml(&format!("{BASE}[vorticity]\n{body}\n")).unwrap();
        cfg.validate().unwrap();
        let gamma: Vorticity<f64> = cfg.vorticity.build().unwrap();
        assert!((gamma.value(0.4) - at).abs() < 1e-15, "{body}");
    }
    let bad = RunConfig::from_toml(&format!("{BASE}[vorticity]\nkind = \"piecewise\"\nbreakpoints = [0.0]\npieces = []\n")).unwrap();
    assert!(matches!(bad.validate(), Err(CliError::Config(m)) if m.starts_with("vorticity")));
}

#[test]
fn invalid_values_name_their_field() {
    let cases = [
        ("[physical]\ng = 9.81\nh = 0.0\nL = 6.0\n", "physical.h"),
        ("[physical]\ng = 9.81\nh = 1.0\nL = -6.0\n", "physical.L"),
        (&format!("{BASE}[numerics]\nnewton_tolerance = 0.0\n"), "numerics.newton_tolerance"),
        (&format!("{BASE}[laminar]\nlambda_min = 2.0\nlambda_max = 1.0\ncount = 3\n"), "laminar"),
        (&format!("{BASE}[dispersion]\nk = [0]\nlambda_min = 1.0\nlambda_max = 2.0\ncount = 3\n"), "dispersion.k"),
        (&format!("{BASE}[bifurcate]\nbrackets = [[-1.0, 1.0]]\n"), "bifurcate.brackets[0]"),
        (&format!("{BASE}[continue]\ninitial_step = 1.0\nmax_step = 0.1\n"), "continue.initial_step"),
        (&format!("{BASE}[continue]\nsnapshot_every = 0\n"), "continue.snapshot_every"),
    ];
    for (text, key) in cases {
        let err = RunConfig::from_toml(text).and_then(|c| c.validate()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains(key), "{key}: {err}");
    }
    let err = RunConfig::from_toml(&format!("{BASE}[numerics]\nN = \"many\"\n")).unwrap_err();
    assert!(err.to_string().contains("numerics.N"), "{err}");
}

#[test]
fn resolution_flag_parses() {
    assert_eq!(parse_resolution("64,256"), Ok((64, 256)));
    assert_eq!(parse_resolution(" 8 , 32 "), Ok((8, 32)));
    assert!(parse_resolution("64").is_err());
    assert!(parse_resolution("a,b").is_err());
}
