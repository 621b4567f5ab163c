use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::channel::format::to_channel_file;
use crate::channel::{channel_state, CqEnsemble, CqMacChannel, Prior, SenderSubset};
use crate::coding::{
    disturbance_check, identification_check, pgm_decoder, split_seed, TenderInstrument,
};
use crate::entropy::{
    check_subadditivity, dense_subsystem_entropy, fano_bound_check, mutual_information_detail,
    subsystem_entropy, SubsystemSelector,
};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::operator::DensityMatrix;
use crate::region::{
    corners_from_table, dominant_vertices, is_member, mixture_constraints, permutations,
    EntropyTable, MixtureSpec, RateConstraintSet,
};

use super::random::*;

/// Default slack allowed on every checked inequality.
pub const CHECK_TOL: f64 = 1e-9;

/// Which randomized suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Entropy,
    Lemmas,
    Region,
    /// Checks on a user-supplied channel rather than random ones.
    Channel,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Entropy, Suite::Lemmas, Suite::Region];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Entropy => "entropy",
            Suite::Lemmas => "lemmas",
            Suite::Region => "region",
            Suite::Channel => "channel",
        }
    }
}

/// Counts for one inequality across a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub check: String,
    pub instances: usize,
    pub failures: usize,
    pub skipped: usize,
    /// Smallest `limit − value` seen; `None` when nothing was checked.
    pub worst_slack: Option<f64>,
}

/// A failed inequality with what is needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub trial: usize,
    pub trial_seed: u64,
    pub value: f64,
    pub limit: f64,
    pub instance: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub tallies: Vec<Tally>,
    pub violations: Vec<Violation>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn tally(&self, check: &str) -> Option<&Tally> {
        self.tallies.iter().find(|t| t.check == check)
    }
}

#[derive(Debug)]
enum Obs {
    /// Requires `value ≤ limit`.
    Le {
        check: &'static str,
        value: f64,
        limit: f64,
    },
    Skipped(&'static str),
}

struct Trial {
    tol: f64,
    obs: Vec<Obs>,
    instance: Vec<(&'static str, Value)>,
}

impl Trial {
    fn le(&mut self, check: &'static str, value: f64, limit: f64) {
        self.obs.push(Obs::Le {
            check,
            value,
            limit,
        });
    }

    fn close(&mut self, check: &'static str, a: f64, b: f64) {
        self.le(check, (a - b).abs(), self.tol);
    }

    fn note(&mut self, key: &'static str, v: Value) {
        self.instance.push((key, v));
    }
}

fn channel_json(ch: &CqMacChannel<f64>) -> Value {
    serde_json::to_value(to_channel_file(ch)).unwrap_or(Value::Null)
}

fn state_json(rho: &DensityMatrix<f64>) -> Value {
    let d = rho.dim();
    let m = rho.matrix();
    Value::Array(
        (0..d)
            .map(|i| {
                json!((0..d)
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect::<Vec<_>>())
            })
            .collect(),
    )
}

fn run(
    suite: Suite,
    trials: usize,
    seed: u64,
    tol: f64,
    body: impl Fn(&mut ChaCha8Rng, &mut Trial) + Sync,
) -> SuiteSummary {
    let results: Vec<(u64, Trial)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = split_seed(seed, t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            let mut trial = Trial {
                tol,
                obs: Vec::new(),
                instance: Vec::new(),
            };
            body(&mut rng, &mut trial);
            (trial_seed, trial)
        })
        .collect();

    let mut tallies: Vec<Tally> = Vec::new();
    let mut violations = Vec::new();
    for (t, (trial_seed, trial)) in results.into_iter().enumerate() {
        let mut instance: Option<Value> = None;
        for o in &trial.obs {
            let name = match o {
                Obs::Le { check, .. } | Obs::Skipped(check) => *check,
            };
            let k = match tallies.iter().position(|x| x.check == name) {
                Some(k) => k,
                None => {
                    tallies.push(Tally {
                        check: name.to_string(),
                        instances: 0,
                        failures: 0,
                        skipped: 0,
                        worst_slack: None,
                    });
                    tallies.len() - 1
                }
            };
            let tally = &mut tallies[k];
            match *o {
                Obs::Skipped(_) => tally.skipped += 1,
                Obs::Le {
                    check,
                    value,
                    limit,
                } => {
                    tally.instances += 1;
                    let slack = limit - value;
                    tally.worst_slack = Some(tally.worst_slack.map_or(slack, |w| w.min(slack)));
                    if value.is_nan() || value > limit {
                        tally.failures += 1;
                        let inst = instance.get_or_insert_with(|| {
                            Value::Object(
                                trial
                                    .instance
                                    .iter()
                                    .map(|(k, v)| (k.to_string(), v.clone()))
                                    .collect(),
                            )
                        });
                        violations.push(Violation {
                            check: check.to_string(),
                            trial: t,
                            trial_seed,
                            value,
                            limit,
                            instance: inst.clone(),
                        });
                    }
                }
            }
        }
    }
    SuiteSummary {
        suite,
        seed,
        trials,
        tallies,
        violations,
    }
}

fn random_shape(rng: &mut ChaCha8Rng) -> (Vec<usize>, usize) {
    let s = rng.random_range(1..=3);
    let alphabets = (0..s).map(|_| rng.random_range(1..=3)).collect();
    (alphabets, rng.random_range(1..=4))
}

/// Block versus dense entropies, both forms of the conditional mutual
/// information, and its nonnegativity.
pub fn entropy_suite(trials: usize, seed: u64, tol: f64, limits: &Limits) -> SuiteSummary {
    run(Suite::Entropy, trials, seed, tol, |rng, t| {
        let (alphabets, d) = random_shape(rng);
        let ch = random_channel(rng, &alphabets, d);
        let p = random_prior(rng, &alphabets);
        t.note("channel", channel_json(&ch));
        t.note("prior", json!(p.per_sender()));
        entropy_checks(t, &channel_state(&ch, &p).expect("shapes match"), limits);
    })
}

fn entropy_checks(t: &mut Trial, e: &CqEnsemble<f64>, limits: &Limits) {
    let s = e.arity();
    for mask in 1..(1u32 << (s + 1)) {
        let sel = SubsystemSelector::from_mask(mask, s);
        let block = subsystem_entropy(e, sel).expect("valid selector");
        match dense_subsystem_entropy(e, sel, limits) {
            Ok(dense) => t.close("dual_path_entropy", block, dense),
            Err(Error::CapExceeded { .. }) => t.obs.push(Obs::Skipped("dual_path_entropy")),
            Err(err) => panic!("dense entropy failed: {err}"),
        }
    }
    for j in SenderSubset::nonempty_subsets(s) {
        let mi = mutual_information_detail(e, j).expect("valid subset");
        t.le("mutual_information_forms", mi.dual_path_gap(), t.tol);
        t.le("strong_subadditivity", -mi.raw, t.tol);
    }
}

fn corner_checks(t: &mut Trial, table: &EntropyTable<f64>, cs: &RateConstraintSet<f64>) {
    let s = table.num_senders();
    let full = SenderSubset::full(s);
    for order in permutations(s) {
        let c = table.corner(&order).expect("valid order");
        t.close("corner_telescoping", c.sum_over(full), cs.full_bound());
        let worst = cs
            .iter()
            .map(|(j, b)| c.sum_over(j) - b)
            .fold(f64::MIN, f64::max);
        t.le("corner_feasibility", worst, t.tol);
        if !is_member(&c, cs, t.tol).expect("same shape") {
            t.le("corner_membership", 1.0, 0.0);
        }
    }
}

/// The entropy identities and corner laws on one given channel and prior.
pub fn channel_suite(
    ch: &CqMacChannel<f64>,
    p: &Prior<f64>,
    tol: f64,
    limits: &Limits,
) -> Result<SuiteSummary> {
    let e = channel_state(ch, p)?;
    let table = EntropyTable::new(&e)?;
    if ch.num_senders() > limits.max_corner_senders {
        return Err(Error::CapExceeded {
            what: "senders for corner enumeration",
            required: ch.num_senders(),
            cap: limits.max_corner_senders,
        });
    }
    Ok(run(Suite::Channel, 1, 0, tol, |_, t| {
        t.note("prior", json!(p.per_sender()));
        entropy_checks(t, &e, limits);
        corner_checks(t, &table, &table.constraint_set());
    }))
}

/// Subadditivity, the Fano-type bound, and the three measurement-disturbance bounds.
pub fn lemma_suite(trials: usize, seed: u64, tol: f64) -> SuiteSummary {
    run(Suite::Lemmas, trials, seed, tol, |rng, t| {
        // subadditivity
        let (n1, n2) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let (d1, d2) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let v1: Vec<_> = (0..n1).map(|_| random_state(rng, d1)).collect();
        let v2: Vec<_> = (0..n2).map(|_| random_state(rng, d2)).collect();
        let flat = match rng.random_range(0..3) {
            0 => {
                let a = random_probability_vector(rng, n1, false);
                let b = random_probability_vector(rng, n2, false);
                a.iter()
                    .flat_map(|x| b.iter().map(move |y| x * y))
                    .collect()
            }
            1 => {
                let mut q = vec![0.0; n1 * n2];
                let k = n1.min(n2);
                for i in 0..k {
                    q[i * n2 + i] = 1.0 / k as f64;
                }
                q
            }
            _ => random_probability_vector(rng, n1 * n2, true),
        };
        let q: Vec<Vec<f64>> = flat.chunks(n2).map(<[f64]>::to_vec).collect();
        t.note(
            "subadditivity",
            json!({
                "v1": v1.iter().map(state_json).collect::<Vec<_>>(),
                "v2": v2.iter().map(state_json).collect::<Vec<_>>(),
                "q": q,
            }),
        );
        let c = check_subadditivity(&v1, &v2, &q).expect("valid inputs");
        t.le("subadditivity", c.slack, t.tol);

        // Fano
        let nx = rng.random_range(1..=4);
        let d = rng.random_range(1..=4);
        let ch = random_channel(rng, &[nx], d);
        let p = random_prior(rng, &[nx]);
        let e = channel_state(&ch, &p).expect("shapes match");
        let k = rng.random_range(nx..=nx + 1);
        let y = random_povm(rng, d, k);
        // convex mix of two injective label-to-outcome assignments
        let lambda: f64 = rng.random();
        let mut x = vec![vec![0.0; nx]; k];
        for weight in [lambda, 1.0 - lambda] {
            let mut outcomes: Vec<usize> = (0..k).collect();
            outcomes.shuffle(rng);
            for (label, &j) in outcomes.iter().take(nx).enumerate() {
                x[j][label] += weight;
            }
        }
        t.note(
            "fano",
            json!({ "channel": channel_json(&ch), "prior": p.per_sender(), "x_povm": x }),
        );
        let f = fano_bound_check(&e, &x, &y).expect("valid inputs");
        t.le("fano", f.lhs - f.rhs, t.tol);

        // disturbance of a single effect
        let d = rng.random_range(2..=8);
        let rho = random_state(rng, d);
        let eff = random_effect(rng, d);
        t.note("disturbance_state", state_json(&rho));
        let c = disturbance_check(&rho, &eff).expect("effect in [0, 1]");
        t.le("gentle_measurement", c.lhs - c.bound, t.tol);

        // identification with a tender instrument, worst case and average
        let d = rng.random_range(2..=8);
        let k = rng.random_range(2..=4);
        let states: Vec<_> = (0..k)
            .map(|_| {
                let rank = if rng.random_bool(0.6) {
                    1
                } else {
                    rng.random_range(1..=d)
                };
                random_density(rng, d, rank)
            })
            .collect();
        let povm = if rng.random_bool(0.6) {
            let refs: Vec<_> = states.iter().enumerate().collect();
            pgm_decoder(&refs, None).expect("valid states")
        } else {
            random_povm(rng, d, k)
        };
        t.note(
            "identification_states",
            json!(states.iter().map(state_json).collect::<Vec<_>>()),
        );
        let inst = TenderInstrument::new(povm).expect("valid POVM");
        let weights = random_probability_vector(rng, k, false);
        let c = identification_check(&states, &inst, Some(&weights)).expect("outcomes present");
        for &dist in &c.disturbances {
            t.le("tender_worst_case", dist - c.worst_case_bound(), t.tol);
        }
        t.le(
            "tender_average",
            c.mean_disturbance - c.average_bound(),
            t.tol,
        );
    })
}

/// Shannon entropy of a finite distribution given as `(key, p)` pairs with repeated keys.
fn shannon_marginal(pairs: impl Iterator<Item = (Vec<usize>, f64)>) -> f64 {
    let mut acc = std::collections::BTreeMap::<Vec<usize>, f64>::new();
    for (k, p) in pairs {
        *acc.entry(k).or_default() += p;
    }
    acc.values()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// `I(X(J)∧Y|X(J^c))` of a diagonal channel from the joint letter distribution alone.
pub fn classical_bounds(ch: &CqMacChannel<f64>, p: &Prior<f64>) -> Vec<f64> {
    let s = ch.num_senders();
    let d = ch.output_dim();
    let joint: Vec<(Vec<usize>, usize, f64)> = ch
        .tuples()
        .flat_map(|x| {
            let px = p.joint_probability(&x);
            let w: Vec<f64> = (0..d).map(|y| ch.state(&x).matrix()[(y, y)].re).collect();
            (0..d)
                .map(move |y| (x.clone(), y, px * w[y]))
                .collect::<Vec<_>>()
        })
        .collect();
    let h = |k: SenderSubset, with_y: bool| {
        shannon_marginal(joint.iter().map(|(x, y, q)| {
            let mut key: Vec<usize> = k.members().into_iter().map(|i| x[i]).collect();
            if with_y {
                key.push(*y);
            }
            (key, *q)
        }))
    };
    let full = SenderSubset::full(s);
    let h_y_given = |k: SenderSubset| h(k, true) - h(k, false);
    SenderSubset::nonempty_subsets(s)
        .map(|j| h_y_given(j.complement(s)) - h_y_given(full))
        .collect()
}

/// Corner feasibility and telescoping, relabeling symmetry, the classical
/// reduction, the vertex cross-check and mixture linearity.
pub fn region_suite(trials: usize, seed: u64, tol: f64, limits: &Limits) -> SuiteSummary {
    run(Suite::Region, trials, seed, tol, |rng, t| {
        let (alphabets, d) = random_shape(rng);
        let s = alphabets.len();
        let ch = random_channel(rng, &alphabets, d);
        let p = random_prior(rng, &alphabets);
        t.note("channel", channel_json(&ch));
        t.note("prior", json!(p.per_sender()));
        let table = EntropyTable::new(&channel_state(&ch, &p).expect("shapes match"))
            .expect("valid ensemble");
        let cs = table.constraint_set();
        corner_checks(t, &table, &cs);

        // relabeling
        let mut order: Vec<usize> = (0..s).collect();
        order.shuffle(rng);
        let relabeled = ch.relabel_senders(&order).expect("valid permutation");
        let q = Prior::new(order.iter().map(|&i| p.sender(i).to_vec()).collect())
            .expect("permuted prior");
        let rs = crate::region::constraint_set(&relabeled, &q).expect("valid");
        for (j, b) in rs.iter() {
            let original = SenderSubset::from_members(j.members().into_iter().map(|k| order[k]));
            t.close("relabel_symmetry", b, cs.bound(original));
        }

        // classical reduction
        let diag = random_diagonal_channel(rng, &alphabets, d);
        let dp = random_prior(rng, &alphabets);
        let quantum = crate::region::constraint_set(&diag, &dp).expect("valid");
        for (a, b) in quantum.bounds().iter().zip(classical_bounds(&diag, &dp)) {
            t.close("classical_reduction", *a, b);
        }

        // vertex enumeration agrees with the corners
        let corners = corners_from_table(&table, limits).expect("within cap");
        let vertices = dominant_vertices(&cs, 1e-9).expect("s ≤ 3");
        let near = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        for c in &corners {
            let gap = vertices
                .iter()
                .map(|v| near(v.rates(), c.point.rates()))
                .fold(f64::INFINITY, f64::min);
            t.le("vertex_cross_check", gap, 1e-7);
        }
        for v in &vertices {
            let gap = corners
                .iter()
                .map(|c| near(v.rates(), c.point.rates()))
                .fold(f64::INFINITY, f64::min);
            t.le("vertex_cross_check", gap, 1e-7);
        }

        // mixture linearity
        let p2 = random_prior(rng, &alphabets);
        let b1 = cs.bounds().to_vec();
        let b2 = crate::region::constraint_set(&ch, &p2)
            .expect("valid")
            .bounds()
            .to_vec();
        for w in [0.25, 0.5, 0.8] {
            let mix = MixtureSpec::new(vec![(w, p.clone()), (1.0 - w, p2.clone())], Some(2))
                .expect("valid mixture");
            let m = mixture_constraints(&ch, &mix).expect("valid");
            for (k, b) in m.bounds().iter().enumerate() {
                t.close("mixture_linearity", *b, w * b1[k] + (1.0 - w) * b2[k]);
            }
        }
    })
}

/// Runs one suite with its own seed stream derived from `seed`.
pub fn run_suite(
    suite: Suite,
    trials: usize,
    seed: u64,
    tol: f64,
    limits: &Limits,
) -> SuiteSummary {
    match suite {
        Suite::Entropy => entropy_suite(trials, split_seed(seed, 1 << 40), tol, limits),
        Suite::Lemmas => lemma_suite(trials, split_seed(seed, 2 << 40), tol),
        Suite::Region => region_suite(trials, split_seed(seed, 3 << 40), tol, limits),
        Suite::Channel => run(Suite::Channel, 0, seed, tol, |_, _| {}),
    }
}
