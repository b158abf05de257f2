use alloc::vec;
use alloc::vec::Vec;

/// All primes `<= n` (sieve of Eratosthenes).
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// All primes in `[lo, hi]`, by a segmented sieve.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    let lo = lo.max(2);
    if hi < lo {
        return Vec::new();
    }
    let base = primes_up_to(hi.isqrt());
    let mut out = Vec::new();
    const SEG: u64 = 1 << 16;
    let mut start = lo;
    loop {
        let end = start.saturating_add(SEG - 1).min(hi);
        let mut composite = vec![false; (end - start + 1) as usize];
        for &q in &base {
            let first = (start.div_ceil(q) * q).max(q * q);
            let mut j = first;
            while j <= end {
                composite[(j - start) as usize] = true;
                j += q;
            }
        }
        out.extend(composite.iter().enumerate().filter(|(_, &c)| !c).map(|(i, _)| start + i as u64));
        if end == hi {
            break;
        }
        start = end + 1;
    }
    out
}
