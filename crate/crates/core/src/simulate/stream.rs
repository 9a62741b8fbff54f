use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random stream for a single trial.
///
/// The ChaCha key comes from the run seed and the 64-bit stream id is the trial
/// index, so trial `i` sees the same numbers however trials are partitioned
/// across workers.
#[derive(Debug, Clone)]
pub struct TrialStream(ChaCha8Rng);

impl TrialStream {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        TrialStream(rng)
    }

    /// Re-targets an existing stream at another trial without re-keying.
    pub fn reset(&mut self, trial: u64) {
        self.0.set_stream(trial);
        self.0.set_word_pos(0);
    }
}

impl RngCore for TrialStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}
