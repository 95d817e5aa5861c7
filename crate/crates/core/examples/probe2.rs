use dgfsim::campaign::mutate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn stats(len: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut seed1: Vec<u8> = vec![0xDE, 0xAD, 0xBE, 0xEF, 0x40, 0x40, 0x00];
    let mut seed0: Vec<u8> = vec![0x00, 0x00, 0x00, 0x00, 0x40, 0x40, 0x48];
    while seed1.len() < len {
        seed1.push(0xAA);
        seed0.push(0xAA);
    }
    let n = 100_000;
    let (mut keep, mut g_wide, mut g_narrow, mut reenter, mut gate) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for _ in 0..n {
        let m = mutate(&seed1, &mut rng, 1024);
        let b = |i: usize| m.get(i).copied().unwrap_or(0);
        if b(0) == 0xDE && b(1) == 0xAD && b(2) == 0xBE && b(3) == 0xEF {
            keep += 1;
        }
        if b(4) != 0x00 {
            g_wide += 1;
        }
        if (0x40..=0x4F).contains(&b(6)) {
            reenter += 1;
        }
        if (0x90..=0x9F).contains(&b(3)) {
            gate += 1;
        }
        let m0 = mutate(&seed0, &mut rng, 1024);
        let c = |i: usize| m0.get(i).copied().unwrap_or(0);
        if (0x40..=0x4F).contains(&c(6)) {
            g_narrow += 1;
        }
    }
    let f = |x: u64| x as f64 / n as f64;
    println!(
        "len {len:2}: keep={:.3} g_wide(b4!=0)={:.3} g_narrow(40..4F|48)={:.3} reenter(00->40..4F)={:.4} gate(EF->90..9F)={:.4}",
        f(keep), f(g_wide), f(g_narrow), f(reenter), f(gate)
    );
}

fn main() {
    for len in [7usize, 12, 16, 24, 32] {
        stats(len);
    }
}
