#[allow(dead_code)]
mod parse_smiles_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/parse_smiles.rs"
    ));
}

#[allow(dead_code)]
mod wl_expansion_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/wl_expansion.rs"
    ));
}

#[allow(dead_code)]
mod embeddings_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/embeddings.rs"
    ));
}

#[allow(dead_code)]
mod synthetic_data_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/synthetic_data.rs"
    ));
}

#[allow(dead_code)]
mod train_gcn_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/train_gcn.rs"
    ));
}

#[allow(dead_code)]
mod verify_theorem_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/verify_theorem.rs"
    ));
}

#[allow(dead_code)]
mod shuffle_importance_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/shuffle_importance.rs"
    ));
}

#[allow(dead_code)]
mod checkpoints_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/checkpoints.rs"
    ));
}

#[allow(dead_code)]
mod figure3_smoke_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/figure3_smoke.rs"
    ));
}

#[test]
fn parse_smiles_example_runs() {
    parse_smiles_example::run_example().expect("parse smiles example should run");
}

#[test]
fn wl_expansion_example_runs() {
    wl_expansion_example::run_example().expect("wl expansion example should run");
}

#[test]
fn embeddings_example_runs() {
    embeddings_example::run_example().expect("embeddings example should run");
}

#[test]
fn synthetic_data_example_runs() {
    synthetic_data_example::run_example().expect("synthetic data example should run");
}

#[test]
fn train_gcn_example_runs() {
    train_gcn_example::run_example().expect("train gcn example should run");
}

#[test]
fn verify_theorem_example_runs() {
    verify_theorem_example::run_example().expect("verify theorem example should run");
}

#[test]
fn shuffle_importance_example_runs() {
    shuffle_importance_example::run_example().expect("shuffle importance example should run");
}

#[test]
fn checkpoints_example_runs() {
    checkpoints_example::run_example().expect("checkpoints example should run");
}

#[test]
fn figure3_smoke_example_runs() {
    figure3_smoke_example::run_example().expect("figure3 smoke example should run");
}
