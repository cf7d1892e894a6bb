macro_rules! example {
    ($module:ident, $test:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $test() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(pca_basics, pca_basics_runs, "pca_basics.rs");
example!(power_method, power_method_runs, "power_method.rs");
example!(sparse_components, sparse_components_runs, "sparse_components.rs");
example!(selection_methods, selection_methods_runs, "selection_methods.rs");
example!(spiked_recovery, spiked_recovery_runs, "spiked_recovery.rs");
example!(high_dimensional, high_dimensional_runs, "high_dimensional.rs");
example!(json_report, json_report_runs, "json_report.rs");
example!(bench_harness, bench_harness_runs, "bench_harness.rs");
