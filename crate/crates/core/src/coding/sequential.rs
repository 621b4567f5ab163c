use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{block_dim, check_permutation, CqMacChannel, Prior};
use crate::error::{Error, Result};
use crate::index::MixedRadix;
use crate::limits::Limits;
use crate::operator::{ComplexMatrix, HermitianOperator};
use crate::scalar::Real;

use super::codebook::{codebook_seed, sample_codebook, trial_seed};
use super::measure::{pgm_decoder, TenderInstrument};
use super::word::{check_codebooks, word_state, AveragingMode, Role};
use super::{Codebook, Outcome};

/// Decodes the senders one after another, each stage a PGM over the word
/// states of the current sender given the words already decoded.
pub struct SequentialDecoder<'a, T: Real> {
    channel: &'a CqMacChannel<T>,
    prior: &'a Prior<T>,
    codebooks: &'a [Codebook],
    order: Vec<usize>,
    mode: AveragingMode,
    n: usize,
    cache: Mutex<StageCache<T>>,
}

/// Stage instruments keyed by (stage, decoded prefix words).
type StageCache<T> = HashMap<(usize, Vec<usize>), Arc<TenderInstrument<T>>>;

impl<'a, T: Real> SequentialDecoder<'a, T> {
    /// `order[0]` is decoded first.
    pub fn new(
        channel: &'a CqMacChannel<T>,
        prior: &'a Prior<T>,
        codebooks: &'a [Codebook],
        order: Vec<usize>,
        mode: AveragingMode,
        limits: &Limits,
    ) -> Result<Self> {
        prior.check_matches(channel.alphabet_sizes())?;
        let n = check_codebooks(channel, codebooks)?;
        check_permutation(&order, channel.num_senders())?;
        block_dim(channel.output_dim(), n, limits)?;
        Ok(Self {
            channel,
            prior,
            codebooks,
            order,
            mode,
            n,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn codebooks(&self) -> &[Codebook] {
        self.codebooks
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.codebooks.iter().map(Codebook::len).collect()
    }

    fn check_messages(&self, messages: &[usize]) -> Result<()> {
        if messages.len() != self.codebooks.len() {
            return Err(Error::DimensionMismatch {
                expected: self.codebooks.len(),
                found: messages.len(),
            });
        }
        for (i, (&m, c)) in messages.iter().zip(self.codebooks).enumerate() {
            if m >= c.len() {
                return Err(Error::InvalidArgument(format!(
                    "message {m} out of range for sender {} with {} codewords",
                    i + 1,
                    c.len()
                )));
            }
        }
        Ok(())
    }

    /// Stage `stage` decoder given the messages of the senders decoded before it.
    ///
    /// Decoders are built once per distinct prefix of decoded words and shared.
    pub fn stage_instrument(
        &self,
        stage: usize,
        messages: &[usize],
    ) -> Result<Arc<TenderInstrument<T>>> {
        self.check_messages(messages)?;
        let decoded = &self.order[..stage];
        let key_words: Vec<usize> = decoded
            .iter()
            .flat_map(|&j| self.codebooks[j].words[messages[j]].iter().copied())
            .collect();
        let key = (stage, key_words);
        if let Some(inst) = self.cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(inst));
        }
        let target = self.order[stage];
        let mut roles = vec![Role::Averaged; self.codebooks.len()];
        for &j in decoded {
            roles[j] = Role::Known(&self.codebooks[j].words[messages[j]]);
        }
        let states: Vec<_> = self.codebooks[target]
            .words
            .iter()
            .map(|w| {
                roles[target] = Role::Known(w);
                word_state(
                    self.channel,
                    self.prior,
                    self.codebooks,
                    &roles,
                    self.n,
                    self.mode,
                )
            })
            .collect();
        let labeled: Vec<_> = states.iter().enumerate().collect();
        let inst = Arc::new(TenderInstrument::new(pgm_decoder(&labeled, None)?)?);
        Ok(Arc::clone(
            self.cache.lock().unwrap().entry(key).or_insert(inst),
        ))
    }

    /// The channel output `W^n` for the codewords of `messages`.
    pub fn output_state(&self, messages: &[usize]) -> Result<ComplexMatrix<T>> {
        self.check_messages(messages)?;
        let roles: Vec<Role<'_>> = messages
            .iter()
            .zip(self.codebooks)
            .map(|(&m, c)| Role::Known(&c.words[m]))
            .collect();
        Ok(word_state(
            self.channel,
            self.prior,
            self.codebooks,
            &roles,
            self.n,
            self.mode,
        )
        .matrix()
        .clone())
    }
}

/// The correct-branch chain for one message tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutcome<T: Real> {
    /// `Tr σ_s`: probability that every stage decodes correctly.
    pub success: T,
    /// `Tr σ_t` after each stage.
    pub stage_traces: Vec<T>,
    /// `1 − Tr(σ̂ D_correct)` for the normalized state entering each stage.
    pub stage_errors: Vec<T>,
    /// `‖σ̂ − √Dσ̂√D‖₁ + Σ_{b≠correct} Tr(σ̂ D_b)` per stage.
    pub stage_disturbances: Vec<T>,
}

impl<T: Real> ChainOutcome<T> {
    pub fn error(&self) -> T {
        T::one() - self.success
    }
}

/// Exact probability that every sender's message is decoded correctly:
/// `σ_t = √D_t σ_{t−1} √D_t` along the correct outcomes, starting from `W^n`.
pub fn sequential_decode_exact<T: Real>(
    dec: &SequentialDecoder<'_, T>,
    messages: &[usize],
) -> Result<ChainOutcome<T>> {
    let mut sigma = dec.output_state(messages)?;
    let stages = dec.order.len();
    let mut stage_traces = Vec::with_capacity(stages);
    let mut stage_errors = Vec::with_capacity(stages);
    let mut stage_disturbances = Vec::with_capacity(stages);
    for stage in 0..stages {
        let inst = dec.stage_instrument(stage, messages)?;
        let outcome = Outcome::Index(messages[dec.order[stage]]);
        let before = sigma.trace().re;
        let next = inst.branch(outcome, &sigma)?;
        let after = next.trace().re.max(T::zero());
        if before > T::tol(1e-300) {
            let eps = (T::one() - after / before).max(T::zero());
            let diff = (&sigma - &next).scale(T::one() / before);
            let moved = HermitianOperator::from_matrix_unchecked(diff).trace_norm();
            stage_errors.push(eps);
            stage_disturbances.push(moved + eps);
        } else {
            stage_errors.push(T::one());
            stage_disturbances.push(T::zero());
        }
        stage_traces.push(after);
        sigma = next;
    }
    Ok(ChainOutcome {
        success: stage_traces.last().copied().unwrap_or_else(T::one),
        stage_traces,
        stage_errors,
        stage_disturbances,
    })
}

/// Which message tuples the average runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Evaluation {
    Exhaustive,
    /// `trials` tuples drawn uniformly with the given seed.
    MonteCarlo {
        trials: usize,
        seed: u64,
    },
}

/// Per-stage summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    /// One-based sender index decoded at this stage.
    pub sender: usize,
    /// Mean probability mass lost at this stage; these sum to the overall error.
    pub error: f64,
    /// `ε̄`: mean conditional error of this stage's measurement.
    pub mean_epsilon: f64,
    /// Mean disturbance of the tender measurement on its incoming state.
    pub mean_disturbance: f64,
    /// `√(8ε̄) + ε̄`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub master: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub draw: Option<u64>,
    pub codebooks: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<u64>,
}

/// Result of one simulated code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub sizes: Vec<usize>,
    /// `log₂ L_i / n`.
    pub rates: Vec<f64>,
    /// One-based decoding order.
    pub order: Vec<usize>,
    pub averaging: AveragingMode,
    pub evaluation: Evaluation,
    pub tuples_evaluated: usize,
    pub seeds: SeedRecord,
    pub avg_error: f64,
    pub stages: Vec<StageReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_ms: Option<f64>,
}

impl SimReport {
    pub fn stage_errors(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.error).collect()
    }
}

/// Mean error over all message tuples or a uniform sample of them.
pub fn average_error<T: Real>(
    dec: &SequentialDecoder<'_, T>,
    evaluation: Evaluation,
    limits: &Limits,
) -> Result<SimReport> {
    let start = Instant::now();
    let sizes = dec.sizes();
    let radix = MixedRadix::new(&sizes);
    let tuples: Vec<Vec<usize>> = match evaluation {
        Evaluation::Exhaustive => {
            let total = radix.checked_len().unwrap_or(usize::MAX);
            if total > limits.max_exhaustive_tuples {
                return Err(Error::CapExceeded {
                    what: "message tuples for exhaustive evaluation",
                    required: total,
                    cap: limits.max_exhaustive_tuples,
                });
            }
            radix.iter().collect()
        }
        Evaluation::MonteCarlo { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..trials)
                .map(|_| sizes.iter().map(|&l| rng.random_range(0..l)).collect())
                .collect()
        }
    };
    let outcomes = tuples
        .par_iter()
        .map(|m| sequential_decode_exact(dec, m))
        .collect::<Result<Vec<_>>>()?;

    let stages = dec.order.len();
    let count = outcomes.len().max(1) as f64;
    let mut lost = vec![0.0; stages];
    let mut eps = vec![0.0; stages];
    let mut moved = vec![0.0; stages];
    let mut avg_error = 0.0;
    for o in &outcomes {
        avg_error += o.error().as_f64();
        let mut before = 1.0;
        for t in 0..stages {
            let after = o.stage_traces[t].as_f64();
            lost[t] += before - after;
            before = after;
            eps[t] += o.stage_errors[t].as_f64();
            moved[t] += o.stage_disturbances[t].as_f64();
        }
    }
    let stage_reports = (0..stages)
        .map(|t| {
            let e = eps[t] / count;
            StageReport {
                sender: dec.order[t] + 1,
                error: lost[t] / count,
                mean_epsilon: e,
                mean_disturbance: moved[t] / count,
                bound: (8.0 * e).sqrt() + e,
            }
        })
        .collect();
    let n = dec.block_length();
    Ok(SimReport {
        n,
        rates: sizes
            .iter()
            .map(|&l| (l as f64).log2() / n as f64)
            .collect(),
        sizes,
        order: dec.order.iter().map(|i| i + 1).collect(),
        averaging: dec.mode,
        evaluation,
        tuples_evaluated: outcomes.len(),
        seeds: SeedRecord {
            master: None,
            draw: None,
            codebooks: dec.codebooks.iter().map(|c| c.seed).collect(),
            trials: match evaluation {
                Evaluation::MonteCarlo { seed, .. } => Some(seed),
                Evaluation::Exhaustive => None,
            },
        },
        avg_error: avg_error / count,
        stages: stage_reports,
        wall_clock_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Everything needed to draw and evaluate random codes.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub n: usize,
    pub sizes: Vec<usize>,
    /// Zero-based decoding order; identity when empty.
    pub order: Vec<usize>,
    pub averaging: AveragingMode,
    pub master_seed: u64,
    /// Monte Carlo trials per draw; exhaustive when `None`.
    pub trials: Option<usize>,
}

/// Samples the codebooks of draw `draw` and evaluates the resulting code.
pub fn simulate_draw<T: Real>(
    ch: &CqMacChannel<T>,
    prior: &Prior<T>,
    spec: &SimulationSpec,
    draw: u64,
    limits: &Limits,
) -> Result<(Vec<Codebook>, SimReport)> {
    let s = ch.num_senders();
    if spec.sizes.len() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: spec.sizes.len(),
        });
    }
    prior.check_matches(ch.alphabet_sizes())?;
    block_dim(ch.output_dim(), spec.n.max(1), limits)?;
    let codebooks = (0..s)
        .map(|i| {
            sample_codebook(
                i,
                prior.sender(i),
                spec.n,
                spec.sizes[i],
                codebook_seed(spec.master_seed, draw, i),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let order = if spec.order.is_empty() {
        (0..s).collect()
    } else {
        spec.order.clone()
    };
    let evaluation = match spec.trials {
        None => Evaluation::Exhaustive,
        Some(trials) => Evaluation::MonteCarlo {
            trials,
            seed: trial_seed(spec.master_seed, draw),
        },
    };
    let report = {
        let dec = SequentialDecoder::new(ch, prior, &codebooks, order, spec.averaging, limits)?;
        let mut r = average_error(&dec, evaluation, limits)?;
        r.seeds.master = Some(spec.master_seed);
        r.seeds.draw = Some(draw);
        r
    };
    Ok((codebooks, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::DensityMatrix;

    fn orthogonal() -> CqMacChannel<f64> {
        CqMacChannel::from_fn(&[2, 2], 4, |t| DensityMatrix::basis(4, 2 * t[0] + t[1])).unwrap()
    }

    fn full_books(n: usize) -> Vec<Codebook> {
        vec![
            Codebook::full(0, 2, n).unwrap(),
            Codebook::full(1, 2, n).unwrap(),
        ]
    }

    #[test]
    fn noiseless_decodes_perfectly() {
        let ch = orthogonal();
        let p = Prior::uniform(&[2, 2]);
        let books = full_books(1);
        let lim = Limits::default();
        for mode in [AveragingMode::Ensemble, AveragingMode::Empirical] {
            let dec = SequentialDecoder::new(&ch, &p, &books, vec![0, 1], mode, &lim).unwrap();
            let r = average_error(&dec, Evaluation::Exhaustive, &lim).unwrap();
            assert!(r.avg_error.abs() < 1e-12);
            assert_eq!(r.tuples_evaluated, 4);
            for m in MixedRadix::new(&[2, 2]).iter() {
                assert!((sequential_decode_exact(&dec, &m).unwrap().success - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_channel_is_guessing() {
        let rho = DensityMatrix::pure_real(&[0.6f64, 0.8]).unwrap();
        let ch = CqMacChannel::from_fn(&[2, 2], 2, |_| rho.clone()).unwrap();
        let p = Prior::uniform(&[2, 2]);
        let books = full_books(1);
        let lim = Limits::default();
        let dec =
            SequentialDecoder::new(&ch, &p, &books, vec![0, 1], AveragingMode::Ensemble, &lim)
                .unwrap();
        for m in MixedRadix::new(&[2, 2]).iter() {
            let o = sequential_decode_exact(&dec, &m).unwrap();
            assert!(o.success <= 0.25 + 1e-9, "{o:?}");
            assert!(o.stage_traces.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
    }

    #[test]
    fn stage_errors_sum_to_total() {
        let ch = CqMacChannel::from_fn(&[2, 2], 2, |t| {
            let a = (2 * t[0] + t[1]) as f64 * std::f64::consts::FRAC_PI_4;
            DensityMatrix::pure_real(&[a.cos(), a.sin()]).unwrap()
        })
        .unwrap();
        let p = Prior::uniform(&[2, 2]);
        let books = full_books(2);
        let lim = Limits::default();
        let dec =
            SequentialDecoder::new(&ch, &p, &books, vec![1, 0], AveragingMode::Ensemble, &lim)
                .unwrap();
        let r = average_error(&dec, Evaluation::Exhaustive, &lim).unwrap();
        let sum: f64 = r.stage_errors().iter().sum();
        assert!((sum - r.avg_error).abs() < 1e-12);
        assert_eq!(r.order, vec![2, 1]);
        for s in &r.stages {
            assert!(s.mean_disturbance <= s.bound + 1e-9, "{s:?}");
        }
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let ch = orthogonal();
        let p = Prior::uniform(&[2, 2]);
        let spec = SimulationSpec {
            n: 2,
            sizes: vec![3, 2],
            order: vec![],
            averaging: AveragingMode::Ensemble,
            master_seed: 11,
            trials: Some(5),
        };
        let lim = Limits::default();
        let (b1, mut r1) = simulate_draw(&ch, &p, &spec, 0, &lim).unwrap();
        let (b2, mut r2) = simulate_draw(&ch, &p, &spec, 0, &lim).unwrap();
        assert_eq!(b1, b2);
        r1.wall_clock_ms = None;
        r2.wall_clock_ms = None;
        assert_eq!(r1, r2);
        assert_eq!(r1.tuples_evaluated, 5);
    }

    #[test]
    fn caps_and_mismatches() {
        let ch = orthogonal();
        let p = Prior::uniform(&[2, 2]);
        let books = full_books(2);
        let lim = Limits {
            max_exhaustive_tuples: 15,
            ..Limits::default()
        };
        let dec =
            SequentialDecoder::new(&ch, &p, &books, vec![0, 1], AveragingMode::Ensemble, &lim)
                .unwrap();
        assert!(matches!(
            average_error(&dec, Evaluation::Exhaustive, &lim),
            Err(Error::CapExceeded { required: 16, .. })
        ));
        assert!(sequential_decode_exact(&dec, &[4, 0]).is_err());
        assert!(SequentialDecoder::new(
            &ch,
            &p,
            &books[..1],
            vec![0, 1],
            AveragingMode::Ensemble,
            &lim
        )
        .is_err());
        assert!(
            SequentialDecoder::new(&ch, &p, &books, vec![0, 0], AveragingMode::Ensemble, &lim)
                .is_err()
        );
        let small = Limits::default().with_max_block_dim(15);
        assert!(SequentialDecoder::new(
            &ch,
            &p,
            &books,
            vec![0, 1],
            AveragingMode::Ensemble,
            &small
        )
        .is_err());
    }
}
