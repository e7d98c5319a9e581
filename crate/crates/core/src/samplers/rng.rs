use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent sub-sequences of one stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lane {
    /// Draws that decide first coordinates.
    First = 0,
    /// Draws that decide transverse coordinates.
    Transverse = 1,
}

const LANES: usize = 2;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn lane_key(master_seed: u64, lane: usize) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = master_seed ^ (lane as u64).wrapping_mul(0xd1b5_4a32_d192_ed03);
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// Counter-based random stream addressed by `(master_seed, stream_id)`.
///
/// Each lane is a ChaCha8 keystream keyed by the master seed and lane, with the
/// stream id selecting the ChaCha stream, so any stream can be opened directly
/// without generating its predecessors. First-coordinate and transverse draws
/// come from separate lanes, which keeps the first-coordinate sequence
/// independent of the dimension and of the execution mode.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    lanes: [ChaCha8Rng; LANES],
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let lanes = [0, 1].map(|lane| {
            let mut rng = ChaCha8Rng::from_seed(lane_key(master_seed, lane));
            rng.set_stream(stream_id);
            rng
        });
        Self { master_seed, stream_id, lanes }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Position of `lane` in its keystream, in 32-bit words.
    pub fn counter(&self, lane: Lane) -> u128 {
        self.lanes[lane as usize].get_word_pos()
    }

    /// Jumps `lane` to a keystream position.
    pub fn seek(&mut self, lane: Lane, word_pos: u128) {
        self.lanes[lane as usize].set_word_pos(word_pos);
    }

    pub fn lane(&mut self, lane: Lane) -> &mut ChaCha8Rng {
        &mut self.lanes[lane as usize]
    }

    pub fn first(&mut self) -> &mut ChaCha8Rng {
        self.lane(Lane::First)
    }

    pub fn transverse(&mut self) -> &mut ChaCha8Rng {
        self.lane(Lane::Transverse)
    }
}

/// Draws from the first-coordinate lane.
impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.first().next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.first().next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.first().fill_bytes(dst)
    }
}
