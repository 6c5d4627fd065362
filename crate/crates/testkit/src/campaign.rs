//! A differential fuzz campaign: generated programs run in every mode on
//! 1 to 4 interleaved workers with full checks, compared to the oracle,
//! and their traces validated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use taskframe::frontend::check_source;
use taskframe::lowering::{compile_program, CompileMode, CompileOptions};
use taskframe::machine::RunOptions;
use taskframe::scheduler::run_parallel;

use crate::{check_trace, generate, run_oracle, GenConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CampaignStats {
    pub programs: usize,
    /// Programs the oracle rejected (runtime error or budget).
    pub skipped: usize,
    pub runs: usize,
    /// Frames executed in runs with more than one worker.
    pub parallel_steps: usize,
    pub steals: usize,
}

const MODES: [CompileMode; 4] = [CompileMode::Task, CompileMode::Activation, CompileMode::Mixed, CompileMode::Direct];

/// Runs the campaign over `seeds`; the first failure is returned with the
/// program text.
pub fn run_campaign(seeds: std::ops::Range<u64>) -> Result<CampaignStats, String> {
    let mut stats = CampaignStats::default();
    for seed in seeds {
        let cfg = GenConfig { routines: 2 + (seed % 5) as usize, stmts: 3 + (seed % 6) as usize, ..GenConfig::default() };
        let g = generate(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
        let fail = |what: String| format!("seed {seed}: {what}\n{}", g.source);
        let checked = check_source(&g.source).map_err(|e| fail(format!("invalid program: {e}")))?;
        stats.programs += 1;
        let Ok(want) = run_oracle(&checked, &g.entry, 20_000) else {
            stats.skipped += 1;
            continue;
        };
        let workers = 1 + (seed % 4) as usize;
        for mode in MODES {
            let m = compile_program(&checked, &CompileOptions::new(mode)).map_err(|e| fail(format!("{mode:?}: {e}")))?;
            let opts = RunOptions { full_checks: true, trace: true, interleave: true, ..RunOptions::default() };
            let r = run_parallel(&m, &g.entry, workers, seed, &opts).map_err(|e| fail(format!("{mode:?} x{workers}: {e}")))?;
            stats.runs += 1;
            let trace = r.trace.as_ref().expect("traced run");
            if r.outs != want.outs || r.output != want.output || trace.effects() != want.effects {
                return Err(fail(format!("{mode:?} x{workers}: got {:?}, oracle {:?}", r.outs, want.outs)));
            }
            if workers > 1 {
                let t = check_trace(trace, workers, opts.stack_bytes).map_err(|e| fail(format!("{mode:?} x{workers}: {e}")))?;
                stats.parallel_steps += t.execs;
                stats.steals += t.steals;
            }
        }
    }
    Ok(stats)
}
