//! Classic routines and their near-identical variants.

use super::OracleError;

const COLLATZ_STEP_CAP: u64 = 10_000_000;

fn overflow() -> OracleError {
    OracleError::Overflow
}

pub fn fibonacci(n: i64) -> Result<i64, OracleError> {
    let (mut a, mut b) = (0i64, 1i64);
    if n <= 1 {
        return Ok(n);
    }
    for _ in 1..n {
        let c = a.checked_add(b).ok_or_else(overflow)?;
        a = b;
        b = c;
    }
    Ok(b)
}

pub fn padovan(n: i64) -> Result<i64, OracleError> {
    let (mut a, mut b) = (1i64, 1i64);
    let (mut c, mut d) = (1i64, 1i64);
    for _ in 3..n + 1 {
        d = a.checked_add(b).ok_or_else(overflow)?;
        a = b;
        b = c;
        c = d;
    }
    Ok(d)
}

pub fn bubble_ascending(mut v: Vec<i64>) -> Vec<i64> {
    let n = v.len();
    for i in 0..n {
        for j in 0..n - i - 1 {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
            }
        }
    }
    v
}

pub fn bubble_descending(mut v: Vec<i64>) -> Vec<i64> {
    let n = v.len();
    for i in 0..n {
        for j in 0..n - i - 1 {
            if 0 > v[j] - v[j + 1] {
                v.swap(j, j + 1);
            }
        }
    }
    v
}

pub fn gauss_sum(n: i64) -> Result<i64, OracleError> {
    let mut tot = 0i64;
    for i in 0..n.max(0) {
        tot = tot.checked_add(i).ok_or_else(overflow)?;
    }
    Ok(tot)
}

/// Adds even and subtracts odd numbers below `n`.
pub fn gauss_alternating(n: i64) -> Result<i64, OracleError> {
    let mut tot = 0i64;
    for i in 0..n.max(0) {
        let term = if i % 2 == 0 { i } else { -i };
        tot = tot.checked_add(term).ok_or_else(overflow)?;
    }
    Ok(tot)
}

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    // int(n**0.5)
    let bound = (n as f64).powf(0.5) as i64;
    !(2..bound + 1).any(|x| n % x == 0)
}

pub fn is_prime_successor(n: i64) -> bool {
    is_prime(n + 1)
}

fn collatz(mut n: i64, count_odd_steps: bool) -> Result<i64, OracleError> {
    if n < 1 {
        return Err(OracleError::NonTerminating);
    }
    let mut s = n;
    let mut steps = 0u64;
    while n != 1 {
        steps += 1;
        if steps > COLLATZ_STEP_CAP {
            return Err(OracleError::NonTerminating);
        }
        if n % 2 == 0 {
            n /= 2;
            s = s.checked_add(n).ok_or_else(overflow)?;
        } else {
            n = n.checked_mul(3).and_then(|x| x.checked_add(1)).ok_or_else(overflow)?;
            if count_odd_steps {
                s = s.checked_add(n).ok_or_else(overflow)?;
            }
        }
    }
    Ok(s)
}

/// Sum of every value in the Collatz sequence starting at `n`, inclusive.
pub fn collatz_sum(n: i64) -> Result<i64, OracleError> {
    collatz(n, true)
}

/// `n` plus every value reached by a halving step.
pub fn collatz_even_sum(n: i64) -> Result<i64, OracleError> {
    collatz(n, false)
}
