#![allow(dead_code)]

use fixline_lang::{generate_corpus, FunctionTriple, SynthSpec};
use fixline_model::train::{build_vocab, make_example, Example};
use fixline_model::{Model, ModelConfig};
use fixline_tensor::{ParamId, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn tiny_config() -> ModelConfig {
    ModelConfig {
        d_model: 8,
        encoder_layers: 2,
        decoder_layers: 2,
        heads: 2,
        d_ff: 12,
        max_len: 128,
        max_decode_len: 128,
        ntn_slices: 3,
        fused_dim: 6,
        dropout: 0.0,
        init_range: 0.3,
    }
}

pub fn corpus() -> Vec<FunctionTriple> {
    generate_corpus(&SynthSpec::default()).expect("default corpus")
}

pub fn model_for(config: ModelConfig, triples: &[FunctionTriple], seed: u64) -> Model {
    let vocab = build_vocab(triples, 1).unwrap();
    Model::new(config, vocab, seed).unwrap()
}

pub fn examples(model: &Model, triples: &[FunctionTriple]) -> Vec<Example> {
    triples.iter().map(|t| make_example(model, t).unwrap()).collect()
}

pub fn set(model: &mut Model, id: ParamId, data: &[f64]) {
    let shape = model.params.get(id).shape.clone();
    model.params.set(id, Tensor::new(shape, data.to_vec()).unwrap()).unwrap();
}

pub fn random_tensor(rows: usize, cols: usize, seed: u64) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Tensor::matrix(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub const BOOL_CLEAN: &str = "boolean isReady(int count) {\n    boolean done = false;\n    if (count > 3) {\n        done = true;\n    }\n    return done;\n}\n";
pub const BOOL_BUGGY: &str = "boolean isReady(int count) {\n    boolean done = false;\n    if (count > 3) {\n        done = false;\n    }\n    return done;\n}\n";
