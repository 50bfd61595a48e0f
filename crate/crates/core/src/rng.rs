//! Counter-based seeding: every trial owns a generator derived from
//! `(master_seed, experiment_id, trial_index)`, so results do not depend on
//! how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit identifier for a named random stream (FNV-1a).
pub fn stream_id(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn trial_seed(master_seed: u64, experiment_id: u64, trial: u64) -> u64 {
    let a = splitmix64(master_seed ^ 0x5851_F42D_4C95_7F2D);
    let b = splitmix64(a ^ experiment_id);
    splitmix64(b ^ trial.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn trial_rng(master_seed: u64, experiment_id: u64, trial: u64) -> TrialRng {
    TrialRng::seed_from_u64(trial_seed(master_seed, experiment_id, trial))
}

/// Runs `f` once per trial with its own generator and returns the results in
/// trial order. Runs on the current rayon pool when the `parallel` feature is on.
pub fn map_trials<T, F>(master_seed: u64, experiment_id: u64, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut TrialRng) -> T + Sync + Send,
{
    let run = |k: usize| {
        let mut rng = trial_rng(master_seed, experiment_id, k as u64);
        f(k, &mut rng)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(run).collect()
    }
}
