//! Free-group words over the generators of a window's fundamental group.
//!
//! Letters are nonzero `i32`: `k + 1` is generator `k`, `-(k + 1)` its inverse.

pub type Letter = i32;

pub fn gen_of(l: Letter) -> usize {
    (l.unsigned_abs() - 1) as usize
}

pub fn letter(gen: usize, positive: bool) -> Letter {
    let l = gen as i32 + 1;
    if positive {
        l
    } else {
        -l
    }
}

pub fn inverse(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|l| -l).collect()
}

/// Free reduction (cancels adjacent inverse pairs).
pub fn free_reduce(w: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Free and cyclic reduction.
pub fn cyclic_reduce(w: &[Letter]) -> Vec<Letter> {
    let r = free_reduce(w);
    let mut a = 0;
    let mut b = r.len();
    while b - a >= 2 && r[a] == -r[b - 1] {
        a += 1;
        b -= 1;
    }
    r[a..b].to_vec()
}

pub fn rotate(w: &[Letter], s: usize) -> Vec<Letter> {
    if w.is_empty() {
        return Vec::new();
    }
    let s = s % w.len();
    let mut out = w[s..].to_vec();
    out.extend_from_slice(&w[..s]);
    out
}

/// Least rotation of `w` or of its inverse; the canonical form of an unoriented cyclic word.
pub fn canonical(w: &[Letter]) -> Vec<Letter> {
    let w = cyclic_reduce(w);
    let inv = inverse(&w);
    let mut best = w.clone();
    for cand in [&w, &inv] {
        for s in 0..cand.len() {
            let r = rotate(cand, s);
            if r < best {
                best = r;
            }
        }
    }
    best
}

/// Cheap test used during enumeration: is `w` its own canonical form?
pub fn is_canonical(w: &[Letter]) -> bool {
    let m = w.len();
    let inv = inverse(w);
    for s in 0..m {
        if s > 0 && lex_less_rot(w, s, w) {
            return false;
        }
        if lex_less_rot(&inv, s, w) {
            return false;
        }
    }
    true
}

fn lex_less_rot(a: &[Letter], s: usize, b: &[Letter]) -> bool {
    let m = a.len();
    for t in 0..m {
        let x = a[(s + t) % m];
        let y = b[t];
        if x != y {
            return x < y;
        }
    }
    false
}

/// True unless `w` is a proper power of a shorter cyclic word.
pub fn is_primitive(w: &[Letter]) -> bool {
    let m = w.len();
    (1..m).filter(|d| m % d == 0).all(|d| (0..m).any(|t| w[t] != w[(t + d) % m]))
}

pub fn power(w: &[Letter], n: i64) -> Vec<Letter> {
    let base = if n >= 0 { w.to_vec() } else { inverse(w) };
    let mut out = Vec::with_capacity(base.len() * n.unsigned_abs() as usize);
    for _ in 0..n.unsigned_abs() {
        out.extend_from_slice(&base);
    }
    out
}

/// Applies a substitution given on positive generators.
pub fn substitute(w: &[Letter], image: &dyn Fn(usize) -> Vec<Letter>) -> Vec<Letter> {
    let mut out = Vec::new();
    for &l in w {
        let img = image(gen_of(l));
        if l > 0 {
            out.extend(img);
        } else {
            out.extend(inverse(&img));
        }
    }
    free_reduce(&out)
}

/// Exponent sum of every generator.
pub fn exponent_sums(w: &[Letter], n_gen: usize) -> Vec<i64> {
    let mut e = vec![0i64; n_gen];
    for &l in w {
        e[gen_of(l)] += l.signum() as i64;
    }
    e
}
