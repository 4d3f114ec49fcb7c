//! Training behaviour on the small built-in patterns, over many seeds.

use boltzkit::rbm::train_rbm;
use boltzkit::{builtin, Dbn, Objective, RngState, TrainOptions};

#[test]
fn unsupervised_pattern_objective_decreases() {
    let data = builtin("unsup-pattern").unwrap().inputs;
    let opts = TrainOptions { max_iter: 50, batch_size: 1, step_ratio: 2.5, ..Default::default() };
    let mut improved = 0;
    for seed in 0..20 {
        let mut rng = RngState::new(seed);
        let dbn = Dbn::random(&[6, 8], &mut rng).unwrap();
        let before = dbn.layers()[0].reconstruction_objective(&data, Objective::CrossEntropy).unwrap();
        let (_, trace) = train_rbm(&dbn.layers()[0], &data, &opts, &mut rng).unwrap();
        if *trace.objective.last().unwrap() < before {
            improved += 1;
        }
    }
    assert!(improved >= 19, "{improved}/20 seeds improved");
}

#[test]
fn xor_is_learned() {
    let ds = builtin("xor").unwrap();
    let labels = ds.labels.unwrap();
    let opts = TrainOptions { max_iter: 100, batch_size: 4, step_ratio: 2.5, ..Default::default() };
    let mut solved = 0;
    for seed in 0..20 {
        let mut rng = RngState::new(seed);
        let dbn = Dbn::random(&[2, 12, 1], &mut rng).unwrap();
        let (net, trace) = dbn.fit_supervised(&ds.inputs, &labels, &opts, &opts, &mut rng).unwrap();
        assert_eq!(trace.pretrain.len(), 1);
        assert_eq!(trace.finetune.epochs(), 100);
        let out = net.v2h(&ds.inputs).unwrap();
        if out.map(f64::round) == labels {
            solved += 1;
        }
    }
    assert!(solved >= 18, "{solved}/20 seeds solved XOR");
}

#[test]
fn supervised_run_is_reproducible() {
    let ds = builtin("pattern1").unwrap();
    let labels = ds.labels.unwrap();
    let opts = TrainOptions { max_iter: 20, batch_size: 6, ..Default::default() };
    let run = || {
        let mut rng = RngState::new(42);
        let dbn = Dbn::random(&[6, 20, 2], &mut rng).unwrap();
        dbn.fit_supervised(&ds.inputs, &labels, &opts, &opts, &mut rng).unwrap()
    };
    let (a, ta) = run();
    let (b, tb) = run();
    assert_eq!(a, b);
    assert_eq!(ta.finetune.objective, tb.finetune.objective);
}
