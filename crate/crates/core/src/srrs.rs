//! Synchronised random reality selection.
//!
//! Once a conflict has been open for `D_start`, every epoch boundary hands
//! all nodes the same coin value `x` in `[0.5, 0.66]`. A node votes for a
//! member whose approval weight exceeds `x`; if none does, it votes for the
//! member minimizing `SHA-256(y)` with `y = o + c * x`, where `o` is the
//! member's color id. The hash rule depends only on membership and `x`, so
//! nodes with diverging weight views still land on the same color.
//!
//! `y` is encoded as a fixed-point decimal string with six fractional
//! digits (`"1660.123456"`), which keeps the digest bit-exact.

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::engine::rng::{stream, RngStream, StreamLabel};
use crate::engine::SimTime;
use crate::ids::ColorId;
use crate::scalar::Scalar;

const MICROS: u64 = 1_000_000;
const X_LOW_MICROS: u64 = 500_000;
const X_SPAN_MICROS: u64 = 160_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CoinDraw {
    pub epoch: u64,
    /// `x` in millionths.
    pub x_micros: u64,
}

impl CoinDraw {
    /// Maps a uniform `u` in `[0, 1]` to `x = 0.5 + 0.16 u`, rounded to six decimals.
    pub fn from_uniform(epoch: u64, u: f64) -> Self {
        let u = u.clamp(0.0, 1.0);
        let x_micros = X_LOW_MICROS + (u * X_SPAN_MICROS as f64).round() as u64;
        Self { epoch, x_micros }
    }

    pub fn x(&self) -> f64 {
        self.x_micros as f64 / MICROS as f64
    }
}

/// The shared coin: one draw per epoch from the coin-labeled stream.
#[derive(Clone, Debug)]
pub struct CommonCoin {
    rng: RngStream,
    draws: Vec<CoinDraw>,
}

impl CommonCoin {
    pub fn new(master_seed: u64) -> Self {
        Self {
            rng: stream(master_seed, StreamLabel::Coin),
            draws: Vec::new(),
        }
    }

    pub fn draw(&mut self, epoch: u64) -> CoinDraw {
        while self.draws.len() as u64 <= epoch {
            let e = self.draws.len() as u64;
            let u: f64 = self.rng.random();
            self.draws.push(CoinDraw::from_uniform(e, u));
        }
        self.draws[epoch as usize]
    }
}

/// The coin value of `epoch` for a run seeded with `master_seed`.
pub fn draw_coin(epoch: u64, master_seed: u64) -> CoinDraw {
    CommonCoin::new(master_seed).draw(epoch)
}

/// Canonical text of `y = o + c * x` with six fractional digits.
pub fn encode_y(color: ColorId, coin: CoinDraw, c: u64) -> String {
    let y_micros =
        u128::from(color.0) * u128::from(MICROS) + u128::from(c) * u128::from(coin.x_micros);
    let micros = u128::from(MICROS);
    format!("{}.{:06}", y_micros / micros, y_micros % micros)
}

pub fn hash_score(color: ColorId, coin: CoinDraw, c: u64) -> [u8; 32] {
    Sha256::digest(encode_y(color, coin, c).as_bytes()).into()
}

/// Member with the lexicographically smallest digest; equal digests go to the lower id.
pub fn min_hash_color(members: &[ColorId], coin: CoinDraw, c: u64) -> Option<ColorId> {
    members
        .iter()
        .map(|&color| (hash_score(color, coin, c), color))
        .min()
        .map(|(_, color)| color)
}

/// The color a node adopts at an epoch boundary.
pub fn srrs_vote<S: Scalar>(
    members: &[ColorId],
    weight: impl Fn(ColorId) -> S,
    coin: CoinDraw,
    c: u64,
) -> Option<ColorId> {
    let x = S::from_real(coin.x());
    let mut above: Option<(S, ColorId)> = None;
    for &color in members {
        let w = weight(color);
        if w > x && above.is_none_or(|(bw, bc)| w > bw || (w == bw && color < bc)) {
            above = Some((w, color));
        }
    }
    match above {
        Some((_, color)) => Some(color),
        None => min_hash_color(members, coin, c),
    }
}

/// Boundary `n` of a conflict created at `created_at`.
pub fn epoch_boundary(created_at: SimTime, d_start: u64, epoch_len: u64, n: u64) -> SimTime {
    created_at + d_start + n * epoch_len
}

/// Boundaries from the first evaluation up to and including `until`.
pub fn epoch_boundaries(
    created_at: SimTime,
    d_start: u64,
    epoch_len: u64,
    until: SimTime,
) -> impl Iterator<Item = SimTime> {
    (0u64..)
        .map(move |n| epoch_boundary(created_at, d_start, epoch_len, n))
        .take_while(move |&t| t <= until)
}
