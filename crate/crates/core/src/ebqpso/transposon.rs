//! Transposon breeding over a pool of normalized chromosomes.
//!
//! Each chromosome is one particle position in `[0, 1]^d`; each gene is one
//! coordinate. A transposon is a block of `size` consecutive genes.

use rand::Rng;

/// Moves the block at `src` to position `dst` inside one chromosome.
/// `dst` indexes the chromosome after the block has been removed.
pub fn cut_and_paste_within(chrom: &mut Vec<f64>, src: usize, dst: usize, size: usize) {
    let block: Vec<f64> = chrom.drain(src..src + size).collect();
    let tail = chrom.split_off(dst);
    chrom.extend(block);
    chrom.extend(tail);
}

/// Overwrites the block at `dst` with a copy of the block at `src`.
pub fn copy_and_paste_within(chrom: &mut [f64], src: usize, dst: usize, size: usize) {
    chrom.copy_within(src..src + size, dst);
}

/// Exchanges the block at `src` in `first` with the block at `dst` in `second`.
pub fn cut_and_paste_between(
    first: &mut [f64],
    second: &mut [f64],
    src: usize,
    dst: usize,
    size: usize,
) {
    first[src..src + size].swap_with_slice(&mut second[dst..dst + size]);
}

/// Copies the block at `src` in `source` over the block at `dst` in `target`.
pub fn copy_and_paste_between(
    source: &[f64],
    target: &mut [f64],
    src: usize,
    dst: usize,
    size: usize,
) {
    target[dst..dst + size].copy_from_slice(&source[src..src + size]);
}

/// Breeds a pool of chromosomes (personal bests followed by the global best).
///
/// For every chromosome, with probability `jumping_rate` a partner is drawn
/// uniformly from the whole pool (itself included). A fair coin picks
/// cut-and-paste or copy-and-paste; the operation is applied `count` times
/// with fresh loci. Random draws per firing chromosome, in order: partner,
/// coin, then `(src, dst)` per transposon.
pub fn transposon_operator<R: Rng + ?Sized>(
    pool: &[Vec<f64>],
    jumping_rate: f64,
    count: usize,
    size: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut bred: Vec<Vec<f64>> = pool.to_vec();
    let slots = bred.len();
    for i in 0..slots {
        if rng.gen::<f64>() >= jumping_rate {
            continue;
        }
        let partner = partner_index(rng.gen::<f64>(), slots);
        let cut = rng.gen::<f64>() > 0.5;
        let d = bred[i].len();
        if size == 0 || size > d {
            continue;
        }
        for _ in 0..count {
            let src = rng.gen_range(0..=d - size);
            let dst = rng.gen_range(0..=d - size);
            if partner == i {
                if cut {
                    cut_and_paste_within(&mut bred[i], src, dst, size);
                } else {
                    copy_and_paste_within(&mut bred[i], src, dst, size);
                }
            } else {
                let (a, b) = pair_mut(&mut bred, i, partner);
                if cut {
                    cut_and_paste_between(a, b, src, dst, size);
                } else {
                    copy_and_paste_between(a, b, src, dst, size);
                }
            }
        }
    }
    bred
}

/// `ceil(r · slots)` as a zero-based index; `r = 0` maps to the first slot.
fn partner_index(r: f64, slots: usize) -> usize {
    ((r * slots as f64).ceil() as usize).clamp(1, slots) - 1
}

fn pair_mut<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    debug_assert_ne!(i, j);
    if i < j {
        let (a, b) = v.split_at_mut(j);
        (&mut a[i], &mut b[0])
    } else {
        let (a, b) = v.split_at_mut(i);
        (&mut b[0], &mut a[j])
    }
}
