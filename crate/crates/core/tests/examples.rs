mod t_sampling_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/t_sampling.rs"));
}

#[test]
fn t_sampling_runs() {
    t_sampling_example::run_example().expect("t_sampling example");
}

mod fold_plan_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fold_plan.rs"));
}

#[test]
fn fold_plan_runs() {
    fold_plan_example::run_example().expect("fold_plan example");
}

mod bols_posterior_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bols_posterior.rs"));
}

#[test]
fn bols_posterior_runs() {
    bols_posterior_example::run_example().expect("bols_posterior example");
}

mod bridge_posterior_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bridge_posterior.rs"));
}

#[test]
fn bridge_posterior_runs() {
    bridge_posterior_example::run_example().expect("bridge_posterior example");
}

mod spike_slab_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/spike_slab.rs"));
}

#[test]
fn spike_slab_runs() {
    spike_slab_example::run_example().expect("spike_slab example");
}

mod bdmi_estimate_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bdmi_estimate.rs"));
}

#[test]
fn bdmi_estimate_runs() {
    bdmi_estimate_example::run_example().expect("bdmi_estimate example");
}

mod hbdmi_estimate_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/hbdmi_estimate.rs"));
}

#[test]
fn hbdmi_estimate_runs() {
    hbdmi_estimate_example::run_example().expect("hbdmi_estimate example");
}

mod imputation_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/imputation.rs"));
}

#[test]
fn imputation_runs() {
    imputation_example::run_example().expect("imputation example");
}

mod simulation_table_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/simulation_table.rs"));
}

#[test]
fn simulation_table_runs() {
    simulation_table_example::run_example().expect("simulation_table example");
}

mod misspecified_oracle_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/misspecified_oracle.rs"));
}

#[test]
fn misspecified_oracle_runs() {
    misspecified_oracle_example::run_example().expect("misspecified_oracle example");
}

mod density_output_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/density_output.rs"));
}

#[test]
fn density_output_runs() {
    density_output_example::run_example().expect("density_output example");
}

mod ks_check_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ks_check.rs"));
}

#[test]
fn ks_check_runs() {
    ks_check_example::run_example().expect("ks_check example");
}

mod csv_estimate_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/csv_estimate.rs"));
}

#[test]
fn csv_estimate_runs() {
    csv_estimate_example::run_example().expect("csv_estimate example");
}

mod config_file_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/config_file.rs"));
}

#[test]
fn config_file_runs() {
    config_file_example::run_example().expect("config_file example");
}
