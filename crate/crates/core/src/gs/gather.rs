use super::plan::{Contributor, GsMode, GsPlan};
use crate::arith::ArithmeticContext;
use crate::eft::{expansion2_combine, Expansion2};
use crate::error::{contract, Result};
use crate::scalar::{cast, Precision, Real};

/// Flops of one `expansion2_combine` (two two_sums, two fast_two_sums, two adds).
pub(crate) const COMBINE_FLOPS: u64 = 20;

/// Direct-stiffness summation in place: every local copy of a global dof
/// receives the sum of all copies.
///
/// Contributions are cast to the plan's accumulate precision, summed in the
/// plan mode's order through `ctx`, and cast back. In sequential mode each
/// rank keeps the total it computed itself, so copies on different ranks can
/// disagree in the last bits when the accumulation rounds.
pub fn gather_scatter<T: Real>(
    f: &mut [T],
    plan: &GsPlan,
    ctx: &mut ArithmeticContext,
) -> Result<()> {
    contract(f.len() == plan.local_len(), || {
        format!(
            "field length {} does not match gather-scatter plan ({})",
            f.len(),
            plan.local_len()
        )
    })?;
    match plan.accumulate() {
        Precision::Fp32 => run::<T, f32>(f, plan, ctx),
        Precision::Fp64 => run::<T, f64>(f, plan, ctx),
    }
    Ok(())
}

fn run<T: Real, A: Real>(f: &mut [T], plan: &GsPlan, ctx: &mut ArithmeticContext) {
    let mut vals: Vec<A> = Vec::with_capacity(16);
    for g in 0..plan.n_global() {
        let list = plan.contributors(g);
        if list.len() == 1 {
            let l = list[0].local as usize;
            f[l] = cast(cast::<T, A>(f[l]));
            continue;
        }
        vals.clear();
        vals.extend(list.iter().map(|c| cast::<T, A>(f[c.local as usize])));
        match plan.mode() {
            GsMode::Sequential => pairwise(f, list, &vals, ctx),
            GsMode::Staged => {
                let mut total: Option<A> = None;
                for (s, e) in rank_groups(list) {
                    let sub = chain(&vals[s..e], ctx);
                    total = Some(match total {
                        None => sub,
                        Some(t) => ctx.add(t, sub),
                    });
                }
                scatter(f, list, cast(total.expect("nonempty list")));
            }
            GsMode::Tree => scatter(f, list, cast(tree(&vals, ctx))),
            GsMode::Compensated => {
                let mut acc = Expansion2::from_scalar(vals[0]);
                for &v in &vals[1..] {
                    acc = expansion2_combine(acc, Expansion2::from_scalar(v));
                }
                ctx.tally(COMBINE_FLOPS * (vals.len() as u64 - 1) + 1);
                scatter(f, list, cast(acc.value()));
            }
        }
    }
}

fn scatter<T: Real>(f: &mut [T], list: &[Contributor], v: T) {
    for c in list {
        f[c.local as usize] = v;
    }
}

/// Half-open index ranges of equal-rank runs in a sorted contributor list.
fn rank_groups(list: &[Contributor]) -> impl Iterator<Item = (usize, usize)> + '_ {
    let mut start = 0;
    std::iter::from_fn(move || {
        if start >= list.len() {
            return None;
        }
        let r = list[start].rank;
        let end = start + list[start..].iter().take_while(|c| c.rank == r).count();
        let out = (start, end);
        start = end;
        Some(out)
    })
}

pub(crate) fn chain<A: Real>(vals: &[A], ctx: &mut ArithmeticContext) -> A {
    let mut acc = vals[0];
    for &v in &vals[1..] {
        acc = ctx.add(acc, v);
    }
    acc
}

pub(crate) fn tree<A: Real>(vals: &[A], ctx: &mut ArithmeticContext) -> A {
    match vals.len() {
        1 => vals[0],
        n => {
            let mid = n.div_ceil(2);
            let a = tree(&vals[..mid], ctx);
            let b = tree(&vals[mid..], ctx);
            ctx.add(a, b)
        }
    }
}

fn pairwise<T: Real, A: Real>(
    f: &mut [T],
    list: &[Contributor],
    vals: &[A],
    ctx: &mut ArithmeticContext,
) {
    for (s, e) in rank_groups(list) {
        let mut acc = chain(&vals[s..e], ctx);
        for (i, &v) in vals.iter().enumerate() {
            if i < s || i >= e {
                acc = ctx.add(acc, v);
            }
        }
        scatter(f, &list[s..e], cast(acc));
    }
}
