//! Hadamard-test estimation of ⟨0|V†GU|0⟩ and shot-allocation rules.
//!
//! One test circuit measures one part (real or imaginary) of one term's
//! matrix element: prepare the test ancilla in |+⟩ (real) or |−i⟩
//! (imaginary), run controlled-V†GU, close with a Hadamard, and read the
//! probability of zero, which lands at ½(1 + Re⟨·⟩) or ½(1 + Im⟨·⟩).
//! Sampling draws the M-shot outcome from a binomial at that exact
//! probability instead of re-running the circuit per shot — statistically
//! identical and far faster; the oracle-query path is still exercised
//! whenever the faithful application mode is selected.

use num_complex::Complex64;
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulator::{
    apply_circuit, apply_term_direct, apply_term_oracle_faithful, AnsatzCircuit, RegisterLayout,
    StateVector,
};
use crate::sparse::{QueryCounter, SelfInverseTerm, WeightedTermList};

/// Which part of ⟨0|V†GU|0⟩ a Hadamard test targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Part {
    Re,
    Im,
}

/// How terms act on the statevector during estimation: multiplied in
/// directly, or run through the oracle-query register sequence (which
/// charges query counters).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApplyMode {
    Direct,
    OracleFaithful,
}

/// Outcome of M repetitions of one Hadamard test.
#[derive(Clone, Debug, Serialize)]
pub struct HadamardTestRecord {
    pub term_id: usize,
    pub part: Part,
    pub shots: u64,
    pub zeros: u64,
    pub ones: u64,
    /// (zeros − ones) / shots.
    pub estimate: f64,
    /// √((1 − estimate²) / shots).
    pub std_error: f64,
}

/// Shots assigned to one (term, part) test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotAllocation {
    pub term_id: usize,
    pub part: Part,
    pub shots: u64,
}

/// Shot budget for a full observable estimate.
#[derive(Clone, Debug)]
pub struct ShotPlan {
    pub total_epsilon: f64,
    pub per_term: Vec<ShotAllocation>,
}

impl ShotPlan {
    pub fn total_shots(&self) -> u64 {
        self.per_term.iter().map(|a| a.shots).sum()
    }
}

/// Which parts a plan provisions: expectation values (bra = ket) need only
/// real parts; general matrix elements need both, doubling the circuit
/// count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartSelection {
    ReOnly,
    ReIm,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream id for one (seed, term, part) sampling job, so jobs
/// are reproducible regardless of evaluation order.
fn stream_id(seed: u64, term_id: usize, part: Part) -> u64 {
    let part_tag = match part {
        Part::Re => 0u64,
        Part::Im => 1u64,
    };
    splitmix64(splitmix64(splitmix64(seed) ^ term_id as u64) ^ part_tag)
}

/// Derive an evaluation-specific seed from a base seed and an index (used
/// by the optimizer and the shot-noise study so every evaluation samples
/// fresh, reproducible noise).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base) ^ index)
}

/// Probability of reading zero on the test ancilla of the Hadamard-test
/// circuit: ½(1 + Re⟨0ⁿ|V†GU|0ⁿ⟩) for [`Part::Re`], the imaginary
/// counterpart for [`Part::Im`] (test ancilla started in |−i⟩ instead of
/// |+⟩). The controlled block runs U, then G, then V backwards, all hung
/// off the test qubit.
pub fn hadamard_probability(
    u: &AnsatzCircuit,
    theta_u: &[f64],
    v: &AnsatzCircuit,
    theta_v: &[f64],
    g: &SelfInverseTerm,
    part: Part,
    mode: ApplyMode,
    counter: &QueryCounter,
) -> Result<f64> {
    if u.num_qubits() != v.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "bra circuit on {} qubits, ket circuit on {}",
            v.num_qubits(),
            u.num_qubits()
        )));
    }
    if u.num_qubits() != g.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "term on {} qubits, circuits on {}",
            g.num_qubits(),
            u.num_qubits()
        )));
    }
    let n = u.num_qubits();
    let layout = match mode {
        ApplyMode::Direct => RegisterLayout::with_test(n),
        ApplyMode::OracleFaithful => RegisterLayout::oracle_with_test(n),
    };
    let test = layout.test_qubit().expect("layout carries a test qubit");
    let mut state = StateVector::zero_state(layout);
    state.hadamard(test);
    if part == Part::Im {
        state.s_dagger(test);
    }
    apply_circuit(u, theta_u, &mut state, false, Some(test))?;
    match mode {
        ApplyMode::Direct => apply_term_direct(g, &mut state, Some(test))?,
        ApplyMode::OracleFaithful => {
            apply_term_oracle_faithful(g, &mut state, counter, Some(test))?
        }
    }
    apply_circuit(v, theta_v, &mut state, true, Some(test))?;
    state.hadamard(test);
    // Clamp the last few ulps of circuit arithmetic so the result is a
    // probability even when the exact value sits on 0 or 1.
    Ok(state.probability_zero(test).clamp(0.0, 1.0))
}

/// Draw the M-shot outcome for a test whose zero-probability is already
/// known. The stream is derived from (seed, term_id, part) alone.
pub fn sample_from_probability(
    p_zero: f64,
    term_id: usize,
    part: Part,
    shots: u64,
    seed: u64,
) -> Result<HadamardTestRecord> {
    if shots == 0 {
        return Err(Error::BadInput("a test needs at least one shot".into()));
    }
    if !(0.0..=1.0).contains(&p_zero) {
        return Err(Error::BadInput(format!(
            "zero-probability {p_zero} is outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_id(seed, term_id, part));
    let zeros = Binomial::new(shots, p_zero)
        .expect("probability is clamped to [0, 1]")
        .sample(&mut rng);
    let ones = shots - zeros;
    let estimate = (zeros as f64 - ones as f64) / shots as f64;
    let std_error = ((1.0 - estimate * estimate) / shots as f64).sqrt();
    Ok(HadamardTestRecord {
        term_id,
        part,
        shots,
        zeros,
        ones,
        estimate,
        std_error,
    })
}

/// Run one (term, part) Hadamard test for M shots: compute the exact
/// zero-probability, then draw the binomial outcome deterministically from
/// the seed.
#[allow(clippy::too_many_arguments)]
pub fn sample_term(
    u: &AnsatzCircuit,
    theta_u: &[f64],
    v: &AnsatzCircuit,
    theta_v: &[f64],
    g: &SelfInverseTerm,
    term_id: usize,
    part: Part,
    shots: u64,
    seed: u64,
    mode: ApplyMode,
    counter: &QueryCounter,
) -> Result<HadamardTestRecord> {
    let p_zero = hadamard_probability(u, theta_u, v, theta_v, g, part, mode, counter)?;
    sample_from_probability(p_zero, term_id, part, shots, seed)
}

/// True when the bra and ket preparations are literally the same circuit
/// at the same parameters (bitwise), which makes every term's matrix
/// element an expectation value of a Hermitian operator — real, so
/// imaginary-part tests are skipped.
pub fn same_preparation(
    u: &AnsatzCircuit,
    theta_u: &[f64],
    v: &AnsatzCircuit,
    theta_v: &[f64],
) -> bool {
    u == v
        && theta_u.len() == theta_v.len()
        && theta_u
            .iter()
            .zip(theta_v)
            .all(|(a, b)| a.to_bits() == b.to_bits())
}

/// Shot plan for estimating Σⱼ αⱼ⟨Gⱼ⟩ to precision `epsilon`: the total
/// The trivial plan: the same shot count for every term (and, with
/// [`PartSelection::ReIm`], for each part of every term). `total_epsilon`
/// is 0 to mark that no precision target produced the plan.
pub fn uniform_plan(num_terms: usize, shots: u64, parts: PartSelection) -> ShotPlan {
    let mut per_term = Vec::new();
    for term_id in 0..num_terms {
        per_term.push(ShotAllocation {
            term_id,
            part: Part::Re,
            shots,
        });
        if parts == PartSelection::ReIm {
            per_term.push(ShotAllocation {
                term_id,
                part: Part::Im,
                shots,
            });
        }
    }
    ShotPlan {
        total_epsilon: 0.0,
        per_term,
    }
}

/// (Σ|αⱼ|)²/ε², rounded up, is split across terms proportionally to |αⱼ|
/// by largest remainder, and every test keeps at least one shot. With
/// [`PartSelection::ReIm`] each term's count is provisioned for both
/// parts, doubling the grand total — matrix elements cost twice the
/// preparations of expectation values.
pub fn allocate_shots(
    coefficients: &[f64],
    epsilon: f64,
    parts: PartSelection,
) -> Result<ShotPlan> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidTolerance(epsilon));
    }
    if coefficients.is_empty() {
        return Err(Error::BadInput("no terms to allocate shots for".into()));
    }
    if coefficients.iter().any(|a| !a.is_finite()) {
        return Err(Error::BadInput("non-finite term coefficient".into()));
    }
    let weights: Vec<f64> = coefficients.iter().map(|a| a.abs()).collect();
    let weight_sum: f64 = weights.iter().sum();
    let total = ((weight_sum * weight_sum) / (epsilon * epsilon)).ceil() as u64;

    let mut shots = vec![0u64; weights.len()];
    if weight_sum > 0.0 {
        let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(weights.len());
        let mut assigned = 0u64;
        for (j, w) in weights.iter().enumerate() {
            let quota = total as f64 * (w / weight_sum);
            let floor = quota.floor() as u64;
            shots[j] = floor;
            assigned += floor;
            remainders.push((j, quota - floor as f64));
        }
        // Largest remainder first; ties go to the earlier term.
        remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let mut leftover = total.saturating_sub(assigned);
        for (j, _) in remainders {
            if leftover == 0 {
                break;
            }
            shots[j] += 1;
            leftover -= 1;
        }
    }
    // Every test runs at least once; pay for forced bumps out of the
    // largest allocation when it can spare them, so the total moves only
    // when the minimum-one rule leaves no room.
    for j in 0..shots.len() {
        if shots[j] == 0 {
            shots[j] = 1;
            if let Some(k) = (0..shots.len()).max_by_key(|&k| shots[k]) {
                if shots[k] > 1 && k != j {
                    shots[k] -= 1;
                }
            }
        }
    }

    let mut per_term = Vec::new();
    for (j, &m) in shots.iter().enumerate() {
        per_term.push(ShotAllocation {
            term_id: j,
            part: Part::Re,
            shots: m,
        });
        if parts == PartSelection::ReIm {
            per_term.push(ShotAllocation {
                term_id: j,
                part: Part::Im,
                shots: m,
            });
        }
    }
    Ok(ShotPlan {
        total_epsilon: epsilon,
        per_term,
    })
}

fn plan_lookup(plan: &ShotPlan, count: usize) -> Result<Vec<[Option<u64>; 2]>> {
    let mut table: Vec<[Option<u64>; 2]> = vec![[None, None]; count];
    for alloc in &plan.per_term {
        if alloc.term_id >= count {
            return Err(Error::IncompletePlan(format!(
                "plan names term {} but only {count} exist",
                alloc.term_id
            )));
        }
        let slot = match alloc.part {
            Part::Re => 0,
            Part::Im => 1,
        };
        let cell = &mut table[alloc.term_id][slot];
        if cell.is_some() {
            return Err(Error::BadInput(format!(
                "plan lists term {} part {:?} twice",
                alloc.term_id, alloc.part
            )));
        }
        *cell = Some(alloc.shots);
    }
    Ok(table)
}

/// Sampled estimate of ⟨0|V†ÔU|0⟩ for Ô = Σⱼ αⱼGⱼ: one Hadamard test per
/// term and part in the plan, combined as Σⱼ αⱼ(re_j + i·im_j), with the
/// standard error combining per-test binomial variances weighted by αⱼ².
/// When bra and ket preparations coincide, only real parts are sampled and
/// the imaginary part is exactly zero.
#[allow(clippy::too_many_arguments)]
pub fn estimate_observable(
    terms: &WeightedTermList<SelfInverseTerm>,
    u: &AnsatzCircuit,
    theta_u: &[f64],
    v: &AnsatzCircuit,
    theta_v: &[f64],
    plan: &ShotPlan,
    seed: u64,
    mode: ApplyMode,
    counter: &QueryCounter,
) -> Result<(Complex64, f64, Vec<HadamardTestRecord>)> {
    let expectation = same_preparation(u, theta_u, v, theta_v);
    let table = plan_lookup(plan, terms.terms.len())?;
    let mut estimate = Complex64::new(0.0, 0.0);
    let mut variance = 0.0f64;
    let mut records = Vec::new();
    for (j, weighted) in terms.terms.iter().enumerate() {
        let alpha = weighted.coefficient;
        let g = &weighted.term;
        let shots_re = table[j][0].ok_or_else(|| {
            Error::IncompletePlan(format!("plan has no real-part shots for term {j}"))
        })?;
        let re = sample_term(
            u,
            theta_u,
            v,
            theta_v,
            g,
            j,
            Part::Re,
            shots_re,
            seed,
            mode,
            counter,
        )?;
        let mut term_value = Complex64::new(re.estimate, 0.0);
        variance += alpha * alpha * re.std_error * re.std_error;
        records.push(re);
        if !expectation {
            let shots_im = table[j][1].ok_or_else(|| {
                Error::IncompletePlan(format!("plan has no imaginary-part shots for term {j}"))
            })?;
            let im = sample_term(
                u,
                theta_u,
                v,
                theta_v,
                g,
                j,
                Part::Im,
                shots_im,
                seed,
                mode,
                counter,
            )?;
            term_value.im = im.estimate;
            variance += alpha * alpha * im.std_error * im.std_error;
            records.push(im);
        }
        estimate += alpha * term_value;
    }
    Ok((estimate, variance.sqrt(), records))
}

/// Infinite-shot limit of [`estimate_observable`]: the exact
/// ⟨0|V†ÔU|0⟩ = Σⱼ αⱼ⟨0|V†GⱼU|0⟩, evaluated by direct state arithmetic
/// with no sampling and no test ancilla.
pub fn estimate_observable_exact(
    terms: &WeightedTermList<SelfInverseTerm>,
    u: &AnsatzCircuit,
    theta_u: &[f64],
    v: &AnsatzCircuit,
    theta_v: &[f64],
) -> Result<Complex64> {
    if u.num_qubits() != v.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "bra circuit on {} qubits, ket circuit on {}",
            v.num_qubits(),
            u.num_qubits()
        )));
    }
    let layout = RegisterLayout::system_only(u.num_qubits());
    let mut ket = StateVector::zero_state(layout);
    apply_circuit(u, theta_u, &mut ket, false, None)?;
    let mut bra = StateVector::zero_state(layout);
    apply_circuit(v, theta_v, &mut bra, false, None)?;
    let mut total = Complex64::new(0.0, 0.0);
    for weighted in &terms.terms {
        let mut moved = ket.clone();
        apply_term_direct(&weighted.term, &mut moved, None)?;
        total += weighted.coefficient * bra.overlap(&moved)?;
    }
    Ok(total)
}

/// One point of the shot-noise scaling study.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShotNoisePoint {
    pub shots: u64,
    pub std_dev: f64,
}

/// Empirical shot-noise scaling: spread of the sampled energy across seeds
/// at each shot count, and the log-log slope (−½ for binomial noise).
#[derive(Clone, Debug, Serialize)]
pub struct ShotNoiseStudy {
    pub points: Vec<ShotNoisePoint>,
    pub slope: f64,
    pub seeds_per_point: u64,
}

/// Measure how the sampled-energy spread shrinks with shots: for each M in
/// `shot_grid`, estimate Σⱼ αⱼ⟨Gⱼ⟩ on the state u(θ) for `num_seeds`
/// different seeds at M shots per term, record the sample standard
/// deviation, and fit a least-squares line through (log₁₀ M, log₁₀ σ).
/// Each term's zero-probability is computed once and reused across every
/// seed and shot count.
pub fn shot_noise_study(
    terms: &WeightedTermList<SelfInverseTerm>,
    u: &AnsatzCircuit,
    theta: &[f64],
    shot_grid: &[u64],
    num_seeds: u64,
    base_seed: u64,
) -> Result<ShotNoiseStudy> {
    if shot_grid.len() < 2 {
        return Err(Error::BadInput(
            "shot-noise study needs at least two shot counts".into(),
        ));
    }
    if num_seeds < 2 {
        return Err(Error::BadInput(
            "shot-noise study needs at least two seeds".into(),
        ));
    }
    let counter = QueryCounter::new();
    let mut probabilities = Vec::with_capacity(terms.terms.len());
    for weighted in &terms.terms {
        probabilities.push(hadamard_probability(
            u,
            theta,
            u,
            theta,
            &weighted.term,
            Part::Re,
            ApplyMode::Direct,
            &counter,
        )?);
    }
    let mut points = Vec::with_capacity(shot_grid.len());
    for (grid_index, &shots) in shot_grid.iter().enumerate() {
        if shots == 0 {
            return Err(Error::BadInput("shot counts must be positive".into()));
        }
        let mut energies = Vec::with_capacity(num_seeds as usize);
        for s in 0..num_seeds {
            let seed = derive_seed(base_seed, (grid_index as u64) << 32 | s);
            let mut energy = 0.0;
            for (j, weighted) in terms.terms.iter().enumerate() {
                let record = sample_from_probability(probabilities[j], j, Part::Re, shots, seed)?;
                energy += weighted.coefficient * record.estimate;
            }
            energies.push(energy);
        }
        let mean = energies.iter().sum::<f64>() / energies.len() as f64;
        let var = energies
            .iter()
            .map(|e| (e - mean) * (e - mean))
            .sum::<f64>()
            / (energies.len() - 1) as f64;
        points.push(ShotNoisePoint {
            shots,
            std_dev: var.sqrt(),
        });
    }
    if points.iter().any(|p| p.std_dev <= 0.0) {
        return Err(Error::BadInput(
            "a shot count produced zero spread; the state gives deterministic outcomes".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.shots as f64).log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.std_dev.log10()).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    Ok(ShotNoiseStudy {
        points,
        slope: sxy / sxx,
        seeds_per_point: num_seeds,
    })
}
