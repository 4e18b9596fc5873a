use qcrank_core::scan::{self, read_records, Isotope, Mesh, ScanConfig, ScanRecord};
use qcrank_core::Species;

fn small_config() -> ScanConfig {
    let mut c = ScanConfig::default();
    c.isotopes = vec![Isotope::new("80Zr", 40, 40), Isotope::new("82Zr", 40, 42)];
    c.m = 3;
    c.delta_mesh = Mesh { count: 5, min: -0.3, max: 0.3 };
    c.omega_mesh = Mesh { count: 4, min: 0.0, max: 0.9 };
    c.methods.oracle = true;
    c.multistart.enabled = false;
    c
}

fn quiet(_: &str) {}

fn find<'a>(records: &'a [ScanRecord], r: &ScanRecord) -> &'a ScanRecord {
    records
        .iter()
        .find(|x| {
            x.isotope == r.isotope
                && x.species == r.species
                && x.method == r.method
                && (x.delta - r.delta).abs() < 1e-12
                && (x.omega - r.omega).abs() < 1e-12
        })
        .expect("matching row")
}

#[test]
fn scan_is_deterministic_and_round_trips() {
    let config = small_config();
    let a = scan::run_scan(&config, &quiet).unwrap();
    let b = scan::run_scan(&config, &quiet).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.failures(), 0);

    let dir = tempfile::tempdir().unwrap();
    a.write(dir.path()).unwrap();
    let back = read_records(&dir.path().join("records.csv")).unwrap();
    assert_eq!(back.len(), a.records.len());
    for (x, y) in back.iter().zip(&a.records) {
        assert_eq!((&x.isotope, &x.species, &x.method, x.is_minimum), (&y.isotope, &y.species, &y.method, y.is_minimum));
        if let (Some(p), Some(q)) = (x.routhian, y.routhian) {
            assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0));
        }
    }
    for f in ["surfaces.csv", "path.csv", "pairing.csv", "summary.csv", "summary.md", "diagnostics.json", "scaling.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn species_runs_are_independent() {
    let config = small_config();
    let full = scan::run_scan(&config, &quiet).unwrap();
    let mut single = config.clone();
    single.species = vec![Species::Neutron];
    let part = scan::run_scan(&single, &quiet).unwrap();
    for r in part.records.iter().filter(|r| r.species == "neutron") {
        let f = find(&full.records, r);
        assert_eq!((r.routhian, r.jx, r.delta_kappa, r.delta_coh, r.n_fev), (f.routhian, f.jx, f.delta_kappa, f.delta_coh, f.n_fev));
    }
}

fn vqe_against_oracle(config: &ScanConfig) -> Vec<(ScanRecord, f64)> {
    let out = scan::run_scan(config, &quiet).unwrap();
    out.records
        .iter()
        .filter(|r| r.method == "vqe" && r.species != "total")
        .map(|r| {
            let exact = find(&out.records, &ScanRecord { method: "oracle".into(), ..r.clone() });
            (r.clone(), exact.routhian.unwrap())
        })
        .collect()
}

#[test]
fn vqe_stays_above_the_oracle() {
    let pairs = vqe_against_oracle(&small_config());
    assert_eq!(pairs.len(), 2 * 2 * 5 * 4);
    for (r, exact) in pairs {
        let e = r.routhian.unwrap();
        assert!(e >= exact - 1e-9, "{} {} {} {}: {e} < {exact}", r.isotope, r.species, r.delta, r.omega);
    }
}

#[test]
fn vqe_is_exact_for_two_level_windows_at_rest() {
    let mut config = small_config();
    config.m = 2;
    for (r, exact) in vqe_against_oracle(&config).into_iter().filter(|(r, _)| r.omega == 0.0) {
        let e = r.routhian.unwrap();
        assert!((e - exact).abs() < 1e-8, "{} {} {}: {e} vs {exact}", r.isotope, r.species, r.delta);
    }
}

#[test]
fn minima_follow_from_the_surfaces() {
    let out = scan::run_scan(&small_config(), &quiet).unwrap();
    let dir = tempfile::tempdir().unwrap();
    out.write(dir.path()).unwrap();
    let surfaces = read_records(&dir.path().join("surfaces.csv")).unwrap();
    assert!(surfaces.iter().all(|r| r.method != "oracle"));
    for method in ["vqe", "bcs"] {
        for iso in ["80Zr", "82Zr"] {
            for omega in small_config().omega_mesh.points() {
                let pts: Vec<(f64, f64)> = surfaces
                    .iter()
                    .filter(|r| r.method == method && r.isotope == iso && r.species == "total" && (r.omega - omega).abs() < 1e-12)
                    .map(|r| (r.delta, r.routhian.unwrap()))
                    .collect();
                let best = scan::select_minimum(&pts).unwrap();
                for r in surfaces.iter().filter(|r| r.method == method && r.isotope == iso && (r.omega - omega).abs() < 1e-12) {
                    assert_eq!(r.is_minimum, (r.delta - best).abs() < 1e-12);
                }
                let min_rows: Vec<_> = surfaces
                    .iter()
                    .filter(|r| r.method == method && r.isotope == iso && r.is_minimum && (r.omega - omega).abs() < 1e-12)
                    .collect();
                assert_eq!(min_rows.len(), 3);
            }
        }
    }
}

#[test]
fn path_endpoints_are_one_sided() {
    let out = scan::run_scan(&small_config(), &quiet).unwrap();
    let omegas = small_config().omega_mesh.points();
    for r in out.records.iter().filter(|r| r.is_minimum && r.method == "vqe") {
        let edge = r.omega == omegas[0] || r.omega == *omegas.last().unwrap();
        assert_eq!(r.one_sided, Some(edge));
        assert!(r.j2.unwrap().is_finite());
    }
    for r in out.records.iter().filter(|r| !r.is_minimum) {
        assert_eq!(r.j2, None);
    }
}

#[test]
fn ground_states_at_rest_carry_no_alignment() {
    let out = scan::run_scan(&small_config(), &quiet).unwrap();
    for r in out.records.iter().filter(|r| r.omega == 0.0 && r.method != "bcs") {
        assert!(r.jx.unwrap().abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn report_tables_rebuild_from_records() {
    let out = scan::run_scan(&small_config(), &quiet).unwrap();
    let dir = tempfile::tempdir().unwrap();
    out.write(dir.path()).unwrap();
    let records = read_records(&dir.path().join("records.csv")).unwrap();
    let names = vec!["80Zr".to_string(), "82Zr".to_string()];
    let summary = scan::derive_summary(&records, &names);
    assert_eq!(
        scan::render_summary_markdown(&summary),
        std::fs::read_to_string(dir.path().join("summary.md")).unwrap()
    );
    assert_eq!(scan::derive_paths(&records, &names).len(), out.paths.len());
}

#[test]
fn minimal_config_file_loads_and_runs() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/minimal.toml");
    let config = ScanConfig::load(&path).unwrap();
    let out = scan::run_scan(&config, &quiet).unwrap();
    assert_eq!(out.failures(), 0);
    assert!(out.records.iter().any(|r| r.method == "oracle"));
}
