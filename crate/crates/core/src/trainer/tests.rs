use super::*;
use crate::corpus::{TrainingWindow, VocabConfig};
use crate::model::{GradSink, Matrix, ParamMatrix};
use crate::subword::{LemmaTable, Pos};
use approx::assert_relative_eq;
use rand::Rng;

fn vocab(n: usize) -> Vocabulary {
    let counts = (0..n).map(|i| (format!("w{i:03}"), (n - i) as u64));
    let cfg = VocabConfig {
        min_count: 1,
        neg_table_size: 1000,
        ..Default::default()
    };
    Vocabulary::from_counts(counts, &cfg).unwrap()
}

fn randomize(p: &mut ModelParams<f64>, rng: &mut impl Rng) {
    for m in [ParamMatrix::U, ParamMatrix::V, ParamMatrix::K, ParamMatrix::Q] {
        if let Some(x) = p.matrix_mut(m) {
            for v in x.as_mut_slice() {
                *v = rng.random_range(-0.5..0.5);
            }
        }
    }
}

fn random_lemmas(n: usize, rng: &mut impl Rng) -> LemmaTable {
    let mut t = LemmaTable::new();
    for i in 0..n {
        for pos in [Pos::Noun, Pos::Verb, Pos::Adj] {
            match rng.random_range(0..4) {
                0 => {
                    t.insert(&format!("w{i:03}"), pos, &format!("w{:03}", rng.random_range(0..n)));
                }
                1 => {
                    t.insert(&format!("w{i:03}"), pos, &format!("lemma{}", rng.random_range(0..3)));
                }
                _ => {}
            }
        }
    }
    t
}

struct Instance {
    params: ModelParams<f64>,
    subwords: Option<SubwordMap>,
    window: TrainingWindow,
    negatives: Vec<u32>,
}

fn instance(mode: Mode, normalized: bool, rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(4..9);
    let d = rng.random_range(1..=8);
    let dk = rng.random_range(1..=4);
    let subwords = (mode == Mode::AweS).then(|| SubwordMap::build(&vocab(n), &random_lemmas(n, rng)));
    let mut params = ModelParams::zeros(mode, n, subwords.as_ref().map(SubwordMap::num_units), d, dk).unwrap();
    params.options.normalize_attention = normalized;
    randomize(&mut params, rng);
    let ctx_len = rng.random_range(1..=4);
    let window = TrainingWindow {
        center: rng.random_range(0..n as u32),
        context: (0..ctx_len).map(|_| rng.random_range(0..n as u32)).collect(),
    };
    let negatives = (0..rng.random_range(0..=3))
        .map(|_| rng.random_range(0..n as u32))
        .collect();
    Instance {
        params,
        subwords,
        window,
        negatives,
    }
}

fn loss_at(inst: &Instance, params: &ModelParams<f64>) -> f64 {
    model::window_loss(&inst.window, &inst.negatives, params, inst.subwords.as_ref())
        .unwrap()
        .loss
}

/// Compares every coordinate of every matrix against central differences.
fn check_gradients(inst: &Instance) -> Result<(), String> {
    let (_, grads) = gradients(&inst.window, &inst.negatives, &inst.params, inst.subwords.as_ref()).unwrap();
    let h = 1e-5;
    let mut p = inst.params.clone();
    for m in [ParamMatrix::U, ParamMatrix::V, ParamMatrix::K, ParamMatrix::Q] {
        let Some(x) = inst.params.matrix(m) else { continue };
        for r in 0..x.rows() {
            for c in 0..x.cols() {
                let orig = x.row(r)[c];
                p.matrix_mut(m).unwrap().row_mut(r)[c] = orig + h;
                let up = loss_at(inst, &p);
                p.matrix_mut(m).unwrap().row_mut(r)[c] = orig - h;
                let down = loss_at(inst, &p);
                p.matrix_mut(m).unwrap().row_mut(r)[c] = orig;
                let numeric = (up - down) / (2.0 * h);
                let analytic = grads.get(m, r as u32).map_or(0.0, |g| g[c]);
                let scale = numeric.abs().max(analytic.abs()).max(1e-6);
                let rel = (numeric - analytic).abs() / scale;
                if rel >= 1e-4 {
                    return Err(format!(
                        "{m:?}[{r}][{c}]: analytic {analytic} numeric {numeric} (rel {rel:e})"
                    ));
                }
            }
        }
    }
    Ok(())
}

#[test]
fn gradients_match_finite_differences() {
    let variants = [
        (Mode::Cbow, false),
        (Mode::Awe, false),
        (Mode::Awe, true),
        (Mode::AweS, false),
        (Mode::AweS, true),
    ];
    for (mode, normalized) in variants {
        let mut rng = ChaCha8Rng::seed_from_u64(17 + mode.tag() as u64 * 2 + normalized as u64);
        for i in 0..100 {
            let inst = instance(mode, normalized, &mut rng);
            if let Err(e) = check_gradients(&inst) {
                panic!("{mode} (normalized {normalized}) instance {i}: {e}");
            }
        }
    }
}

#[test]
fn clamped_logits_get_no_attention_gradient() {
    let mut p = ModelParams::<f64>::zeros(Mode::Awe, 3, None, 2, 1).unwrap();
    p.u.row_mut(1).copy_from_slice(&[0.3, -0.2]);
    p.u.row_mut(0).copy_from_slice(&[0.1, 0.4]);
    p.k.as_mut().unwrap().row_mut(0)[0] = 5.0;
    p.q.as_mut().unwrap().row_mut(1)[0] = 3.0;
    let w = TrainingWindow {
        center: 0,
        context: vec![1],
    };
    let (score, grads) = gradients(&w, &[2], &p, None).unwrap();
    assert_relative_eq!(score.attn[0], 10f64.exp());
    assert!(grads.get(ParamMatrix::K, 0).unwrap().iter().all(|&x| x == 0.0));
    assert!(grads.get(ParamMatrix::Q, 1).unwrap().iter().all(|&x| x == 0.0));
}

#[test]
fn zero_parameters_give_zero_gradients() {
    for mode in [Mode::Cbow, Mode::Awe] {
        let p = ModelParams::<f64>::zeros(mode, 4, None, 3, 2).unwrap();
        let w = TrainingWindow {
            center: 0,
            context: vec![1, 2],
        };
        let (score, grads) = gradients(&w, &[3], &p, None).unwrap();
        assert_relative_eq!(score.loss, 2.0 * std::f64::consts::LN_2, epsilon = 1e-15);
        assert!(!grads.is_empty());
        for (_, _, g) in grads.iter() {
            assert!(g.iter().all(|&x| x == 0.0), "{mode}: {g:?}");
        }
    }
}

#[test]
fn cbow_two_dimensional_gradient() {
    let mut p = ModelParams::<f64>::zeros(Mode::Cbow, 3, None, 2, 1).unwrap();
    p.u.row_mut(0).copy_from_slice(&[1.0, 0.0]);
    p.u.row_mut(1).copy_from_slice(&[0.0, 1.0]);
    p.v.as_mut().unwrap().row_mut(2).copy_from_slice(&[0.5, 0.5]);
    let w = TrainingWindow {
        center: 2,
        context: vec![0, 1],
    };
    let (score, grads) = gradients(&w, &[], &p, None).unwrap();
    // c = (1, 1), s = 1, g = σ(1) - 1.
    let g = 1.0 / (1.0 + 1f64.exp());
    let g = -g;
    assert_relative_eq!(score.pos_score, 1.0);
    assert_eq!(grads.len(), 3);
    let v = grads.get(ParamMatrix::V, 2).unwrap();
    assert_relative_eq!(v[0], g, epsilon = 1e-15);
    assert_relative_eq!(v[1], g, epsilon = 1e-15);
    for r in [0, 1] {
        let u = grads.get(ParamMatrix::U, r).unwrap();
        assert_relative_eq!(u[0], g / 2.0, epsilon = 1e-15);
        assert_relative_eq!(u[1], g / 2.0, epsilon = 1e-15);
    }
}

#[test]
fn apply_update_touches_only_listed_rows() {
    let mut p = ModelParams::<f64>::zeros(Mode::Awe, 3, None, 2, 1).unwrap();
    p.u.fill(1.0);
    let before = p.clone();
    let mut g = Gradients::default();
    g.add(ParamMatrix::U, 1, 1.0, &[2.0, -4.0], 0.0);
    g.add(ParamMatrix::K, 2, 1.0, &[1.0], 0.0);
    apply_update(&mut p, &g, StepSize::uniform(0.5));
    assert_eq!(p.u.row(1), &[0.0, 3.0]);
    assert_eq!(p.k.as_ref().unwrap().row(2), &[-0.5]);
    assert_eq!(p.u.row(0), before.u.row(0));
    assert_eq!(p.u.row(2), before.u.row(2));
    assert_eq!(p.q, before.q);

    // A gradient for a matrix the mode lacks is ignored.
    let mut g = Gradients::default();
    g.add(ParamMatrix::V, 0, 1.0, &[1.0, 1.0], 0.0);
    let snapshot = p.clone();
    apply_update(&mut p, &g, StepSize::uniform(1.0));
    assert_eq!(p, snapshot);
}

#[test]
fn long_row_gradients_are_clipped() {
    let mut p = ModelParams::<f64>::zeros(Mode::Awe, 2, None, 2, 1).unwrap();
    let mut g = Gradients::default();
    g.add(ParamMatrix::U, 0, 1.0, &[30.0, 40.0], 0.0);
    g.add(ParamMatrix::U, 1, 1.0, &[0.3, 0.4], 0.0);
    g.add(ParamMatrix::Q, 1, 1.0, &[-20.0], 0.0);
    let step = StepSize {
        lr: 0.1,
        lr_kq: 0.5,
        max_grad_norm: Some(5.0),
    };
    apply_update(&mut p, &g, step);
    assert_relative_eq!(p.u.row(0)[0], -0.3, epsilon = 1e-15);
    assert_relative_eq!(p.u.row(0)[1], -0.4, epsilon = 1e-15);
    assert_eq!(p.u.row(1), &[-0.1 * 0.3, -0.1 * 0.4]);
    assert_eq!(p.q.as_ref().unwrap().row(1), &[2.5]);
}

#[test]
fn apply_update_zero_and_linearity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut p = ModelParams::<f64>::zeros(Mode::Awe, 4, None, 3, 2).unwrap();
    randomize(&mut p, &mut rng);
    let before = p.clone();
    let mut zero = Gradients::default();
    zero.add(ParamMatrix::U, 2, 0.0, &[1.0, 2.0, 3.0], 0.0);
    apply_update(&mut p, &zero, StepSize::uniform(0.7));
    assert_eq!(p, before);

    let mut g1 = Gradients::default();
    g1.add(ParamMatrix::U, 1, 1.0, &[0.25, -0.5, 1.0], 0.0);
    g1.add(ParamMatrix::Q, 3, 1.0, &[0.5, 0.125], 0.0);
    let mut g2 = Gradients::default();
    g2.add(ParamMatrix::U, 1, 1.0, &[0.5, 0.25, -0.75], 0.0);
    let mut sum = g1.clone();
    sum.merge(&g2);
    let mut twice = before.clone();
    apply_update(&mut twice, &g1, StepSize::uniform(0.5));
    apply_update(&mut twice, &g2, StepSize::uniform(0.5));
    let mut once = before.clone();
    apply_update(&mut once, &sum, StepSize::uniform(0.5));
    for (a, b) in twice.u.as_slice().iter().zip(once.u.as_slice()) {
        assert_relative_eq!(a, b, epsilon = 1e-15);
    }
    assert_eq!(twice.q, once.q);
}

#[test]
fn sgd_step_equals_gradients_then_update() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for mode in [Mode::Cbow, Mode::Awe, Mode::AweS] {
        let inst = instance(mode, false, &mut rng);
        let (_, g) = gradients(&inst.window, &inst.negatives, &inst.params, inst.subwords.as_ref()).unwrap();
        let mut a = inst.params.clone();
        apply_update(&mut a, &g, StepSize::uniform(0.1));
        let mut b = inst.params.clone();
        sgd_step(
            &mut b,
            inst.subwords.as_ref(),
            &inst.window,
            &inst.negatives,
            StepSize::uniform(0.1),
            &mut Scratch::new(),
        )
        .unwrap();
        for m in [ParamMatrix::U, ParamMatrix::V, ParamMatrix::K, ParamMatrix::Q] {
            let (Some(x), Some(y)) = (a.matrix(m), b.matrix(m)) else {
                continue;
            };
            for (p, q) in x.as_slice().iter().zip(y.as_slice()) {
                assert_relative_eq!(p, q, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn repeated_window_loss_decreases() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for mode in [Mode::Cbow, Mode::Awe, Mode::AweS] {
        let inst = instance(mode, false, &mut rng);
        let mut p = inst.params.clone();
        let mut s = Scratch::new();
        let first = loss_at(&inst, &p);
        for _ in 0..10 {
            sgd_step(
                &mut p,
                inst.subwords.as_ref(),
                &inst.window,
                &inst.negatives,
                StepSize::uniform(0.1),
                &mut s,
            )
            .unwrap();
        }
        let last = loss_at(&inst, &p);
        assert!(last < first, "{mode}: {first} -> {last}");
    }
}

#[test]
fn untouched_rows_stay_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut p = ModelParams::<f64>::zeros(Mode::Awe, 10, None, 4, 2).unwrap();
    randomize(&mut p, &mut rng);
    let before = p.clone();
    let w = TrainingWindow {
        center: 1,
        context: vec![2, 3],
    };
    sgd_step(&mut p, None, &w, &[4], StepSize::uniform(0.05), &mut Scratch::new()).unwrap();
    for r in 5..10 {
        assert_eq!(p.u.row(r), before.u.row(r));
        assert_eq!(p.k.as_ref().unwrap().row(r), before.k.as_ref().unwrap().row(r));
        assert_eq!(p.q.as_ref().unwrap().row(r), before.q.as_ref().unwrap().row(r));
    }
    // Only the center's key moves; only the context queries move.
    assert_eq!(p.k.as_ref().unwrap().row(2), before.k.as_ref().unwrap().row(2));
    assert_ne!(p.k.as_ref().unwrap().row(1), before.k.as_ref().unwrap().row(1));
    assert_eq!(p.q.as_ref().unwrap().row(1), before.q.as_ref().unwrap().row(1));
    assert_ne!(p.q.as_ref().unwrap().row(2), before.q.as_ref().unwrap().row(2));
}

/// Plain-loop SGD for CBOW whose target matrix is the embedding matrix.
fn shared_cbow_step(u: &mut [Vec<f64>], w: &TrainingWindow, negatives: &[u32], lr: f64) {
    let d = u[0].len();
    let mut c = vec![0.0; d];
    for &i in &w.context {
        for j in 0..d {
            c[j] += u[i as usize][j];
        }
    }
    let mut g_c = vec![0.0; d];
    let targets: Vec<(u32, f64)> = std::iter::once((w.center, 1.0))
        .chain(negatives.iter().map(|&n| (n, 0.0)))
        .collect();
    let mut target_updates = Vec::new();
    for &(t, label) in &targets {
        let s: f64 = (0..d).map(|j| u[t as usize][j] * c[j]).sum();
        let g = 1.0 / (1.0 + (-s).exp()) - label;
        for j in 0..d {
            g_c[j] += g * u[t as usize][j];
        }
        target_updates.push((t, g));
    }
    for (t, g) in target_updates {
        for j in 0..d {
            u[t as usize][j] -= lr * g * c[j];
        }
    }
    for &i in &w.context {
        for j in 0..d {
            u[i as usize][j] -= lr * g_c[j];
        }
    }
}

#[test]
fn awe_with_zero_keys_and_queries_follows_shared_cbow() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (n, d) = (8, 5);
    let mut p = ModelParams::<f64>::zeros(Mode::Awe, n, None, d, 3).unwrap();
    for x in p.u.as_mut_slice() {
        *x = rng.random_range(-0.5..0.5);
    }
    let mut u: Vec<Vec<f64>> = (0..n).map(|r| p.u.row(r).to_vec()).collect();
    let mut s = Scratch::new();
    for _ in 0..200 {
        let w = TrainingWindow {
            center: rng.random_range(0..n as u32),
            context: (0..rng.random_range(1..5))
                .map(|_| rng.random_range(0..n as u32))
                .collect(),
        };
        let negs: Vec<u32> = (0..3).map(|_| rng.random_range(0..n as u32)).collect();
        sgd_step(&mut p, None, &w, &negs, StepSize::uniform(0.05), &mut s).unwrap();
        shared_cbow_step(&mut u, &w, &negs, 0.05);
    }
    for (r, want) in u.iter().enumerate() {
        for (got, want) in p.u.row(r).iter().zip(want) {
            assert_relative_eq!(got, want, epsilon = 1e-12);
        }
    }
    assert!(p.k.as_ref().unwrap().as_slice().iter().all(|&x| x == 0.0));
    assert!(p.q.as_ref().unwrap().as_slice().iter().all(|&x| x == 0.0));
}

#[test]
fn fresh_initialization_loss_is_near_log_two() {
    let v = vocab(50);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for mode in [Mode::Awe, Mode::Cbow] {
        let p = ModelParams::<f32>::init(mode, 50, None, 100, 10, ModelOptions::default(), &mut rng).unwrap();
        let w = TrainingWindow {
            center: 3,
            context: vec![1, 7, 9, 12],
        };
        let negs: Vec<u32> = (0..5).map(|_| v.sample_negative(&mut rng)).collect();
        let loss = model::window_loss(&w, &negs, &p, None).unwrap().loss;
        assert!((loss - 6.0 * std::f64::consts::LN_2).abs() < 0.01, "{mode}: {loss}");
    }
}

/// Sentences where `a_k` always sits next to `b_k`.
fn toy_corpus(lines: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for _ in 0..lines {
        let k = rng.random_range(0..8);
        let filler = rng.random_range(0..6);
        out.push_str(&format!(
            "x{filler} a{k} b{k} y{} the a{k} b{k}\n",
            rng.random_range(0..6)
        ));
    }
    out
}

fn toy_config(mode: Mode) -> TrainConfig {
    TrainConfig {
        mode,
        dim: 16,
        dim_kq: 4,
        window: 3,
        negatives: 3,
        epochs: 3,
        vocab: VocabConfig {
            min_count: 1,
            subsample: 0.0,
            neg_table_size: 10_000,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn toy_setup(mode: Mode) -> (TrainConfig, Vocabulary, EncodedCorpus, Option<SubwordMap>) {
    let text = toy_corpus(400, 1);
    let cfg = toy_config(mode);
    let vocab = Vocabulary::build(crate::corpus::tokenize(&text), &cfg.vocab).unwrap();
    let corpus = EncodedCorpus::from_text(&text, &vocab);
    let sw = (mode == Mode::AweS).then(|| SubwordMap::singletons(&vocab));
    (cfg, vocab, corpus, sw)
}

#[test]
fn training_is_deterministic_per_seed() {
    for mode in [Mode::Cbow, Mode::Awe, Mode::AweS] {
        let (cfg, vocab, corpus, sw) = toy_setup(mode);
        let run = |seed| {
            let cfg = TrainConfig { seed, ..cfg.clone() };
            Trainer::<f32>::new(cfg, &vocab, sw.as_ref(), &corpus)
                .unwrap()
                .run()
                .unwrap()
                .0
        };
        let a = run(7);
        assert_eq!(a, run(7), "{mode}");
        assert_ne!(a, run(8), "{mode}");
    }
}

#[test]
fn mean_loss_falls_across_epochs() {
    for mode in [Mode::Cbow, Mode::Awe, Mode::AweS] {
        let (cfg, vocab, corpus, sw) = toy_setup(mode);
        let cfg = TrainConfig {
            epochs: 4,
            initial_lr: 0.1,
            ..cfg
        };
        let (_, report) = Trainer::<f32>::new(cfg, &vocab, sw.as_ref(), &corpus)
            .unwrap()
            .run()
            .unwrap();
        let losses: Vec<f64> = report.epochs.iter().map(|e| e.mean_loss).collect();
        assert!(losses[3] < losses[0], "{mode}: {losses:?}");
        assert!(report
            .epochs
            .iter()
            .all(|e| e.windows > 0 && e.words == corpus.len() as u64));
    }
}

#[test]
fn resume_at_epoch_boundary_matches_uninterrupted_run() {
    let (cfg, vocab, corpus, _) = toy_setup(Mode::Awe);
    let straight = Trainer::<f64>::new(cfg.clone(), &vocab, None, &corpus)
        .unwrap()
        .run()
        .unwrap()
        .0;

    let mut t = Trainer::<f64>::new(cfg.clone(), &vocab, None, &corpus).unwrap();
    t.train_epoch().unwrap();
    let (params, state, _) = t.into_parts();
    assert_eq!(
        state,
        TrainState {
            epochs_completed: 1,
            words_processed: corpus.len() as u64
        }
    );
    let resumed = Trainer::resume(cfg, &vocab, None, &corpus, params, state)
        .unwrap()
        .run()
        .unwrap()
        .0;
    assert_eq!(straight, resumed);
}

#[test]
fn learning_rate_decays_linearly_to_floor() {
    let cfg = TrainConfig {
        initial_lr: 0.05,
        ..Default::default()
    };
    let (words, abort) = (AtomicU64::new(0), AtomicBool::new(false));
    let corpus = EncodedCorpus::from_sentences([vec![0u32; 10]]);
    let vocab = vocab(2);
    let ctx = EpochContext {
        config: &cfg,
        vocab: &vocab,
        subwords: None,
        corpus: &corpus,
        epoch: 0,
        total_words: 1000,
        words: &words,
        abort: &abort,
        started: Instant::now(),
    };
    assert_relative_eq!(ctx.lr(0), 0.05);
    assert_relative_eq!(ctx.lr(500), 0.05 - (0.05 - 5e-6) / 2.0);
    assert_relative_eq!(ctx.lr(1000), 5e-6);
    assert_relative_eq!(ctx.lr(5000), 5e-6);
}

#[test]
fn multiple_workers_train() {
    let (cfg, vocab, corpus, _) = toy_setup(Mode::Awe);
    let cfg = TrainConfig {
        workers: 4,
        epochs: 4,
        initial_lr: 0.1,
        ..cfg
    };
    let (params, report) = Trainer::<f32>::new(cfg, &vocab, None, &corpus).unwrap().run().unwrap();
    assert!(params.find_non_finite().is_none());
    assert!(report.epochs[3].mean_loss < report.epochs[0].mean_loss);
    let windows: u64 = report.epochs.iter().map(|e| e.windows).sum();
    assert!(windows > 0);
}

#[test]
fn non_finite_loss_aborts() {
    let (cfg, vocab, corpus, _) = toy_setup(Mode::Cbow);
    let mut p = ModelParams::<f32>::zeros(Mode::Cbow, vocab.len(), None, cfg.dim, cfg.dim_kq).unwrap();
    p.u = Matrix::from_vec(vocab.len(), cfg.dim, vec![f32::NAN; vocab.len() * cfg.dim]);
    let err = Trainer::resume(cfg, &vocab, None, &corpus, p, TrainState::default())
        .unwrap()
        .train_epoch()
        .unwrap_err();
    assert!(matches!(err, Error::NonFinite(_)), "{err}");
}

#[test]
fn config_validation() {
    assert!(TrainConfig::default().validate().is_ok());
    let bad = [
        TrainConfig {
            dim: 0,
            ..Default::default()
        },
        TrainConfig {
            window: 0,
            ..Default::default()
        },
        TrainConfig {
            workers: 0,
            ..Default::default()
        },
        TrainConfig {
            initial_lr: -1.0,
            ..Default::default()
        },
        TrainConfig {
            min_lr: Some(1.0),
            ..Default::default()
        },
        TrainConfig {
            dim_kq: 0,
            ..Default::default()
        },
    ];
    for c in bad {
        assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
    }
    assert!(TrainConfig {
        mode: Mode::Cbow,
        dim_kq: 0,
        ..Default::default()
    }
    .validate()
    .is_ok());
}

#[test]
fn config_round_trips_through_json() {
    let c = toy_config(Mode::AweS);
    let json = serde_json::to_string(&c).unwrap();
    assert_eq!(serde_json::from_str::<TrainConfig>(&json).unwrap(), c);
    let partial: TrainConfig = serde_json::from_str(r#"{"mode":"cbow","dim":20}"#).unwrap();
    assert_eq!(partial.mode, Mode::Cbow);
    assert_eq!(partial.window, 5);
}

#[test]
fn awe_s_without_subwords_is_rejected() {
    let (cfg, vocab, corpus, _) = toy_setup(Mode::AweS);
    assert!(matches!(
        Trainer::<f32>::new(cfg, &vocab, None, &corpus),
        Err(Error::MissingSubwords)
    ));
}
