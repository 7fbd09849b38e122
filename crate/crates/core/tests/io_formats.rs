use besov_core::io::{
    load_input, net_from_json, profile_svg, profile_to_csv, samples_from_csv, save_spectrum, NetContext, NetFile,
};
use besov_core::spectral::SpectralFunction;
use besov_core::scale::{critical_exponent, ProfileMeta, ScaleGrid, ScaleProfile};
use besov_core::spectral::Torus;
use besov_core::Error;

fn location(err: Error) -> String {
    match err {
        Error::Format { location, .. } => location,
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn two_column_csv_sets_the_period_from_x() {
    let mut text = String::from("x,value\n");
    for i in 0..16 {
        let x = 0.25 * i as f64;
        text.push_str(&format!("{x},{}\n", (std::f64::consts::PI * x / 2.0).cos()));
    }
    let f = samples_from_csv(&text, "mem").unwrap();
    assert_eq!(f.torus().period(), 4.0);
    assert_eq!(f.torus().size(), 16);
    // cos(2 pi x / 4) is the first mode with coefficient 1/2.
    assert!((f.coeffs()[1].re - 0.5).abs() < 1e-12);
}

#[test]
fn one_column_csv_with_comments() {
    let text = "# samples\n1\n2\n3\n4\n5\n6\n7\n8\n";
    let f = samples_from_csv(text, "mem").unwrap();
    assert_eq!(f.torus().period(), 1.0);
    assert!((f.coeffs()[0].re - 4.5).abs() < 1e-12);
}

#[test]
fn csv_errors_carry_line_and_column() {
    let text = "1,2\n3,oops\n";
    assert_eq!(location(samples_from_csv(text, "in.csv").unwrap_err()), "in.csv:2:2");
    let text = "1\n2\n3,4\n";
    assert_eq!(location(samples_from_csv(text, "in.csv").unwrap_err()), "in.csv:3");
    let text = "1\n2\n3\n";
    assert!(matches!(samples_from_csv(text, "in.csv"), Err(Error::NonPowerOfTwo(3))));
    let text = "0,1\n1,1\n3,1\n4,1\n5,1\n6,1\n7,1\n8,1\n";
    assert!(samples_from_csv(text, "in.csv").is_err());
}

#[test]
fn json_spectra_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("heaviside.json");
    let f = besov_core::corpus::heaviside(Torus::unit(8));
    save_spectrum(&f, &path).unwrap();
    let back = load_input(path.to_str().unwrap(), Torus::unit(4)).unwrap();
    assert_eq!(back, f);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"L\": 1.0,\n \"coeffs\": [[1, 0], 2]}").unwrap();
    let loc = location(load_input(bad.to_str().unwrap(), Torus::unit(4)).unwrap_err());
    assert!(loc.starts_with(bad.to_str().unwrap()) && loc.contains(":2:"), "{loc}");
}

#[test]
fn builtin_inputs_resolve() {
    let torus = Torus::unit(8);
    assert_eq!(load_input("builtin:dirac", torus).unwrap().torus().size(), 256);
    assert!(load_input("builtin:lacunary:0.5", torus).is_ok());
    assert!(load_input("builtin:nothing", torus).is_err());
    assert!(matches!(load_input("/nonexistent/file.csv", torus), Err(Error::Io(_))));
}

#[test]
fn profile_outputs() {
    let grid = ScaleGrid::new(1e-2, 1.0, 16).unwrap();
    let profile = ScaleProfile::from_fn(&grid, ProfileMeta::default(), |y| y * y).unwrap();
    let csv = profile_to_csv(&profile);
    assert!(csv.starts_with("y,norm\n"));
    assert_eq!(csv.lines().count(), 17);
    let fit = critical_exponent(&profile).unwrap();
    let svg = profile_svg(&profile, Some(&fit), "a < b & c");
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("a &lt; b &amp; c"));
    assert_eq!(svg.matches("<circle").count(), 16);
}

#[test]
fn net_files_resolve_to_their_values() {
    let torus = Torus::unit(8);
    let ctx = NetContext { torus, target: None, sigma: 16.0 };
    let power = net_from_json(r#"{"kind": "power", "c": 2.0, "exponent": -1.5}"#, "mem").unwrap();
    let v = power.resolve(&ctx).unwrap().value(0.25).unwrap();
    assert!((v - 2.0 * 0.25f64.powf(-1.5)).abs() < 1e-12);

    let exp = net_from_json(r#"{"kind": "exponential", "c": 1.0, "rate": -1.0, "power": 1.0}"#, "mem").unwrap();
    let v = exp.resolve(&ctx).unwrap().value(0.5).unwrap();
    assert!((v - (-2.0f64).exp()).abs() < 1e-15);

    let table = r#"{"kind": "table", "eps": [0.01, 0.1, 1.0], "values": [4.0, 2.0, 0.0]}"#;
    let net = net_from_json(table, "mem").unwrap().resolve(&ctx).unwrap();
    assert_eq!(net.value(1e-4).unwrap(), 4.0);
    assert_eq!(net.value(2.0).unwrap(), 0.0);
    // Linear in log(eps): the geometric midpoint of 0.01 and 0.1 gets the mean.
    assert!((net.value(0.1f64.powf(1.5)).unwrap() - 3.0).abs() < 1e-12);

    let spike = r#"{"kind": "spike", "variant": "root-damped", "q": 2.0, "squared": true}"#;
    let net = net_from_json(spike, "mem").unwrap().resolve(&ctx).unwrap();
    assert_eq!(net.label(), "spike[remark2, q=2]^2");
}

#[test]
fn embed_net_needs_a_function() {
    let file = net_from_json(r#"{"kind": "embed"}"#, "mem").unwrap();
    assert_eq!(file, NetFile::Embed { input: None, sigma: None });
    let torus = Torus::unit(8);
    assert!(file.resolve(&NetContext { torus, target: None, sigma: 16.0 }).is_err());
    let t = SpectralFunction::constant(torus, 3.0);
    let net = file.resolve(&NetContext { torus, target: Some(&t), sigma: 16.0 }).unwrap();
    let f = net.evaluate(0.1).unwrap();
    assert!(f.synthesize().iter().all(|v| (v - 3.0).abs() < 1e-12));
}

#[test]
fn malformed_net_files_report_a_location() {
    let err = net_from_json("{\n  \"kind\": \"power\",\n  \"c\": 1.0\n}", "net.json").unwrap_err();
    assert_eq!(location(err), "net.json");
    let err = net_from_json(r#"{"kind": "power", "c": 1.0, "exponent": 2.0, "extra": 1}"#, "n").unwrap_err();
    match err {
        Error::Format { location, message } => {
            assert_eq!(location, "n");
            assert!(message.contains("extra"), "{message}");
        }
        other => panic!("{other:?}"),
    }
    let err = net_from_json("{\"kind\": \"power\",\n \"c\": }", "m").unwrap_err();
    assert_eq!(location(err), "m:2:7");
    let bad_table = r#"{"kind": "table", "eps": [1.0, 0.1], "values": [0.0, 1.0]}"#;
    let ctx = NetContext { torus: Torus::unit(6), target: None, sigma: 16.0 };
    assert!(net_from_json(bad_table, "mem").unwrap().resolve(&ctx).is_err());
}
