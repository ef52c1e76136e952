//! Arbitrary-precision reference values. Nothing here calls into the crate's
//! formulas: the linear bounds are evaluated in exact rationals and the two
//! square-root bounds are found as roots of their defining quadratics in
//! scaled integer arithmetic.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Bits of precision for quadratic roots.
const ROOT_BITS: u32 = 120;

pub fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

pub fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("representable")
}

pub fn rel_err(got: f64, want: &BigRational) -> f64 {
    let diff = (rat(got) - want).abs();
    if want.is_zero() {
        return to_f64(&diff);
    }
    to_f64(&(diff / want.abs()))
}

/// Exact inputs of one evaluation point.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub n: u64,
    pub mu: f64,
    pub bandwidth: f64,
    pub value_size: f64,
    pub storage: f64,
}

impl Point {
    pub fn gigabit(n: u64, mu: f64) -> Self {
        Self {
            n,
            mu,
            bandwidth: 125_000_000.0,
            value_size: 16.0,
            storage: 1e12,
        }
    }

    fn capacity(&self) -> BigRational {
        rat(self.bandwidth) / rat(self.value_size)
    }
}

/// Positive root of `a·x² + b·x - c` for positive integers `a, b, c`, to
/// `ROOT_BITS` bits: `m/2^k` with `p(m/2^k) <= 0 < p((m+1)/2^k)`, found from
/// an exact integer square root and confirmed by the sign test.
fn positive_root(a: &BigInt, b: &BigInt, c: &BigInt) -> BigRational {
    let scale = BigInt::one() << ROOT_BITS;
    let scale2 = &scale * &scale;
    // Sign of p(m / 2^k) · 4^k.
    let nonpositive = |m: &BigInt| a * m * m + b * m * &scale - c * &scale2 <= BigInt::zero();
    let disc: BigInt = (b * b + a * c * 4u32) * &scale2;
    let mut m: BigInt = (disc.sqrt() - b * &scale) / (a * 2);
    while !nonpositive(&m) {
        m -= 1;
    }
    while nonpositive(&(&m + 1)) {
        m += 1;
    }
    BigRational::new(m * 2 + 1, scale * 2)
}

pub fn storage_increasing(p: &Point) -> BigRational {
    let n = int(p.n);
    (BigRational::one() - &n / (&n + BigRational::one()) * rat(p.mu)) * p.capacity()
}

pub fn bandwidth_increasing(p: &Point) -> BigRational {
    p.capacity() / int(p.n + 1)
}

/// The per-node fraction `α = vλ/b` at the clear-stabilization limit under
/// increasing writes solves `N·α² + α - 1 = 0`.
pub fn time_increasing(p: &Point) -> BigRational {
    let n = BigInt::from(p.n);
    positive_root(&n, &BigInt::one(), &BigInt::one()) * p.capacity()
}

pub fn storage_stable(p: &Point) -> BigRational {
    let n = int(p.n);
    (BigRational::one() + BigRational::one() / n - rat(p.mu)) * p.capacity()
}

pub fn bandwidth_stable(p: &Point) -> BigRational {
    p.capacity() / int(p.n)
}

/// Under stable writes the limit solves `N³·α² + N(N+1)·α - (N+1)² = 0`.
pub fn time_stable(p: &Point) -> BigRational {
    let n = BigInt::from(p.n);
    let n1 = &n + 1;
    positive_root(&(&n * &n * &n), &(&n * &n1), &(&n1 * &n1)) * p.capacity()
}

/// Bytes handed to the joining node.
pub fn migration_volume(p: &Point) -> BigRational {
    rat(p.mu) * rat(p.storage) * int(p.n) / int(p.n + 1)
}

/// Concurrent join duration: migration volume over the joiner's spare
/// inbound bandwidth once its own write share is served.
pub fn concurrent_join_time(p: &Point, lambda: f64, stable: bool) -> BigRational {
    let n = int(p.n);
    let write_share = if stable {
        // The cluster-wide rate N·λ is spread over N+1 nodes.
        &n * rat(lambda) / int(p.n + 1)
    } else {
        rat(lambda)
    };
    migration_volume(p) / (rat(p.bandwidth) - write_share * rat(p.value_size))
}

pub fn clear_join_time(p: &Point) -> BigRational {
    migration_volume(p) / rat(p.bandwidth)
}

/// Writes parked during a clear join, all nodes together.
pub fn backlog(p: &Point, lambda: f64, stable: bool) -> BigRational {
    let total_rate = if stable {
        int(p.n) * rat(lambda)
    } else {
        int(p.n + 1) * rat(lambda)
    };
    total_rate * rat(p.value_size) * clear_join_time(p)
}

/// Time for `N+1` nodes to drain `backlog` while serving new writes.
pub fn catchup_time(p: &Point, lambda: f64, stable: bool) -> BigRational {
    let per_node_write = if stable {
        int(p.n) * rat(lambda) / int(p.n + 1)
    } else {
        rat(lambda)
    } * rat(p.value_size);
    let drain = int(p.n + 1) * (rat(p.bandwidth) - per_node_write);
    backlog(p, lambda, stable) / drain
}

/// After a join each node holds `μS·N/(N+1)` and fills back to `μS` at its
/// post-join write share.
pub fn inter_expansion_time(p: &Point, lambda: f64, stable: bool) -> BigRational {
    let per_node_write = if stable {
        int(p.n) * rat(lambda) / int(p.n + 1)
    } else {
        rat(lambda)
    } * rat(p.value_size);
    rat(p.mu) * rat(p.storage) / int(p.n + 1) / per_node_write
}

pub mod ringcheck {
    use dht_rebalance::ring::{MembershipChange, NodeId, RebalanceReport, RingState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Movement locality for an equal-part ring: only the changed node gains
    /// (join) or loses (leave) partitions, the report lists exactly the
    /// partitions whose owner changed, and the partition set is unchanged.
    pub fn locality(
        before: &RingState,
        after: &RingState,
        report: &RebalanceReport,
    ) -> Result<(), String> {
        if before.token_owner.len() != after.token_owner.len() {
            return Err("partition count changed".into());
        }
        let mut changed = Vec::new();
        for (old, new) in before.token_owner.iter().zip(&after.token_owner) {
            if old.partition != new.partition {
                return Err(format!(
                    "partition {} replaced by {}",
                    old.partition, new.partition
                ));
            }
            if old.owner != new.owner {
                changed.push((old.partition, old.owner, new.owner));
            }
        }
        let reported: Vec<_> = report
            .moved_partitions
            .iter()
            .map(|m| (m.partition, m.from, m.to))
            .collect();
        if changed != reported {
            return Err(format!(
                "{} partitions changed owner, {} reported",
                changed.len(),
                reported.len()
            ));
        }
        let who = report.joined_or_left;
        for (p, from, to) in &changed {
            let ok = match report.change {
                MembershipChange::Join => *to == who,
                MembershipChange::Leave => *from == who,
            };
            if !ok {
                return Err(format!(
                    "partition {p} moved {from} -> {to} on {:?} of {who}",
                    report.change
                ));
            }
        }
        if report.change == MembershipChange::Leave
            && before.token_owner.iter().filter(|t| t.owner == who).count() != changed.len()
        {
            return Err(format!("{who} left but not all of its partitions moved"));
        }
        Ok(())
    }

    /// Every node holds `⌊Q/N⌋` or `⌈Q/N⌉` partitions.
    pub fn balanced(ring: &RingState) -> Result<(), String> {
        let q = ring.partition_count();
        let n = ring.node_count() as u64;
        let (lo, hi) = (q / n, q.div_ceil(n));
        for (node, count) in ring.token_counts() {
            if count < lo || count > hi {
                return Err(format!("{node} holds {count}, outside [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    pub struct OpStats {
        pub ops: usize,
        pub local: usize,
        pub balanced: usize,
        pub deterministic: usize,
        pub failures: Vec<String>,
    }

    /// Runs `ops` seeded joins and leaves, keeping between 2 and `max_nodes`
    /// members, and checks every step.
    pub fn random_walk(start: RingState, ops: usize, max_nodes: usize, seed: u64) -> OpStats {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ring = start;
        let mut next_id = ring.nodes.iter().map(|n| n.0 + 1).max().unwrap_or(0);
        let mut stats = OpStats {
            ops: 0,
            local: 0,
            balanced: 0,
            deterministic: 0,
            failures: Vec::new(),
        };
        for i in 0..ops {
            let op_seed: u64 = rng.random();
            let join =
                ring.node_count() < 2 || (ring.node_count() < max_nodes && rng.random_bool(0.5));
            let result = if join {
                let id = NodeId(next_id);
                next_id += 1;
                ring.join(id, op_seed)
                    .map(|r| (r, ring.join(id, op_seed).unwrap()))
            } else {
                let victim = ring.nodes[rng.random_range(0..ring.node_count())];
                ring.leave(victim, op_seed)
                    .map(|r| (r, ring.leave(victim, op_seed).unwrap()))
            };
            let ((after, report), again) = match result {
                Ok(x) => x,
                Err(e) => {
                    stats.failures.push(format!("op {i}: {e}"));
                    continue;
                }
            };
            stats.ops += 1;
            match locality(&ring, &after, &report).and_then(|_| after.check_invariants()) {
                Ok(()) => stats.local += 1,
                Err(e) => stats.failures.push(format!("op {i}: {e}")),
            }
            match balanced(&after) {
                Ok(()) => stats.balanced += 1,
                Err(e) => stats.failures.push(format!("op {i}: {e}")),
            }
            if again == (after.clone(), report) {
                stats.deterministic += 1;
            } else {
                stats.failures.push(format!("op {i}: rerun differs"));
            }
            ring = after;
        }
        stats
    }
}
