use super::affinity::{EvaluationConfig, Evaluator};
use super::bone_marrow::{conform, generate_plan, mutate};
use super::SearchBudget;
use crate::plan::{Plan, PlanError, ResourcePool};
use crate::situation::Situation;
use rand::Rng;
use rayon::prelude::*;
use rayon::ThreadPool;

/// Result of one clonal-selection search.
#[derive(Debug, Clone, PartialEq)]
pub struct ClonalOutcome {
    pub plan: Plan,
    pub successfulness: f64,
    /// Best-ever successfulness after each generation.
    pub trajectory: Vec<f64>,
    pub evaluations: usize,
}

impl ClonalOutcome {
    pub fn generations(&self) -> usize {
        self.trajectory.len()
    }
}

/// Clonal-selection search over plans for one starting situation.
pub struct ClonalSearch<'a> {
    pub pool: &'a ResourcePool,
    pub budget: SearchBudget,
    pub horizon: u32,
    evaluator: Evaluator,
    threads: Option<&'a ThreadPool>,
}

impl<'a> ClonalSearch<'a> {
    pub fn new(
        initial: Situation,
        pool: &'a ResourcePool,
        budget: SearchBudget,
        config: EvaluationConfig,
    ) -> Result<Self, PlanError> {
        if pool.is_empty() {
            return Err(PlanError::EmptyPool);
        }
        Ok(ClonalSearch {
            pool,
            budget,
            horizon: config.horizon,
            evaluator: Evaluator::new(initial, config)?,
            threads: None,
        })
    }

    /// Evaluates generations on `threads`. Results are reduced in index order,
    /// so the outcome is the same as a sequential search.
    pub fn with_threads(mut self, threads: &'a ThreadPool) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    fn score_all(&self, plans: &[Plan]) -> Result<Vec<f64>, PlanError> {
        match self.threads {
            Some(pool) => {
                pool.install(|| plans.par_iter().map(|p| self.evaluator.score(p)).collect())
            }
            None => plans.iter().map(|p| self.evaluator.score(p)).collect(),
        }
    }

    /// Runs the search. `seeds` (e.g. the nearest remembered plan) are fitted
    /// to the pool and placed first in the initial population.
    pub fn run<R: Rng + ?Sized>(
        &self,
        seeds: &[Plan],
        rng: &mut R,
    ) -> Result<ClonalOutcome, PlanError> {
        let n = self.budget.population_size.max(2);
        let mut next_id = 0u64;
        let mut tag = |mut plan: Plan| {
            plan.id = next_id;
            next_id += 1;
            plan
        };

        let mut fresh: Vec<Plan> = seeds
            .iter()
            .map(|p| conform(p, self.pool, self.horizon))
            .filter(|p| !p.tasks.is_empty())
            .take(n)
            .map(&mut tag)
            .collect();
        while fresh.len() < n {
            let plan = generate_plan(self.pool, self.horizon, rng)?;
            fresh.push(tag(plan));
        }
        let scores = self.score_all(&fresh)?;
        let mut evaluations = fresh.len();
        let mut population: Vec<(Plan, f64)> = fresh.into_iter().zip(scores).collect();

        let mut best = best_of(&population);
        let mut trajectory = vec![best.1];

        for _ in 1..self.budget.generations {
            if best.1 >= self.budget.acceptable_successfulness {
                break;
            }
            // stable sort keeps index order among equal scores
            population.sort_by(|a, b| b.1.total_cmp(&a.1));
            let elite_count = n.div_ceil(2);
            population.truncate(elite_count);

            let mut clones = Vec::with_capacity(elite_count * self.budget.clones_per_elite);
            for (elite, score) in &population {
                let intensity = 1.0 - score;
                for _ in 0..self.budget.clones_per_elite {
                    clones.push(tag(mutate(elite, self.pool, self.horizon, intensity, rng)));
                }
            }
            let clone_scores = self.score_all(&clones)?;
            evaluations += clones.len();

            // each elite is replaced by its best clone if that clone is strictly better
            let per = self.budget.clones_per_elite;
            let mut clone_iter = clones.into_iter().zip(clone_scores);
            for slot in population.iter_mut() {
                for _ in 0..per {
                    let (plan, score) = clone_iter.next().expect("clone per elite");
                    if score > slot.1 {
                        *slot = (plan, score);
                    }
                }
            }

            let mut newcomers = Vec::with_capacity(n - elite_count);
            for _ in elite_count..n {
                let plan = generate_plan(self.pool, self.horizon, rng)?;
                newcomers.push(tag(plan));
            }
            let newcomer_scores = self.score_all(&newcomers)?;
            evaluations += newcomers.len();
            population.extend(newcomers.into_iter().zip(newcomer_scores));

            let generation_best = best_of(&population);
            if generation_best.1 > best.1 {
                best = generation_best;
            }
            trajectory.push(best.1);
        }

        Ok(ClonalOutcome {
            plan: best.0,
            successfulness: best.1,
            trajectory,
            evaluations,
        })
    }
}

fn best_of(population: &[(Plan, f64)]) -> (Plan, f64) {
    let mut best = &population[0];
    for candidate in &population[1..] {
        if candidate.1 > best.1 {
            best = candidate;
        }
    }
    best.clone()
}

/// Number of plan evaluations a search with `budget` performs when it runs
/// every generation.
pub fn evaluation_budget(budget: &SearchBudget) -> usize {
    let n = budget.population_size.max(2);
    let elites = n.div_ceil(2);
    n + budget.generations.saturating_sub(1) * (elites * budget.clones_per_elite + (n - elites))
}

/// Convenience wrapper: sequential search from `initial` with no seed plans.
pub fn clonal_select<R: Rng + ?Sized>(
    initial: &Situation,
    pool: &ResourcePool,
    budget: &SearchBudget,
    config: &EvaluationConfig,
    rng: &mut R,
) -> Result<ClonalOutcome, PlanError> {
    ClonalSearch::new(*initial, pool, *budget, *config)?.run(&[], rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epidemic::DiseaseParams;
    use crate::plan::{ActionTemplate, ActionType};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pool() -> ResourcePool {
        ResourcePool::new(
            ActionType::ALL
                .iter()
                .map(|&action| ActionTemplate {
                    action,
                    available: 400,
                    unit_cost: 0.2,
                    efficacy: 0.75,
                    max_tasks: 2,
                })
                .collect(),
        )
        .unwrap()
    }

    fn config() -> EvaluationConfig {
        EvaluationConfig {
            disease: DiseaseParams::default(),
            horizon: 50,
            seed: 5,
            replicates: 1,
            cost_scale: 5000.0,
        }
    }

    fn initial() -> Situation {
        Situation::from_counts([997, 0, 3, 0, 0, 0, 0])
    }

    #[test]
    fn degenerate_budget_picks_better_of_two() {
        let budget = SearchBudget {
            generations: 1,
            population_size: 2,
            clones_per_elite: 1,
            acceptable_successfulness: 1.0,
        };
        let pool = pool();
        let out = clonal_select(
            &initial(),
            &pool,
            &budget,
            &config(),
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        assert_eq!(out.evaluations, 2);

        // replay the two generated plans independently
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = generate_plan(&pool, 50, &mut rng).unwrap();
        let b = generate_plan(&pool, 50, &mut rng).unwrap();
        let sa = super::super::evaluate(&a, &initial(), &config()).unwrap();
        let sb = super::super::evaluate(&b, &initial(), &config()).unwrap();
        assert_eq!(out.successfulness, sa.max(sb));
        let expected = if sb > sa { &b } else { &a };
        assert_eq!(out.plan.tasks, expected.tasks);
    }

    #[test]
    fn best_ever_never_drops() {
        let budget = SearchBudget {
            acceptable_successfulness: 2.0,
            ..SearchBudget::default()
        };
        let out = clonal_select(
            &initial(),
            &pool(),
            &budget,
            &config(),
            &mut ChaCha8Rng::seed_from_u64(8),
        )
        .unwrap();
        assert_eq!(out.generations(), 20);
        assert_eq!(out.evaluations, evaluation_budget(&budget));
        for w in out.trajectory.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert_eq!(*out.trajectory.last().unwrap(), out.successfulness);
        out.plan.validate(50).unwrap();
        assert!(pool().admits(&out.plan));
    }

    #[test]
    fn stops_once_acceptable() {
        let budget = SearchBudget {
            acceptable_successfulness: 0.0,
            ..SearchBudget::default()
        };
        let out = clonal_select(
            &initial(),
            &pool(),
            &budget,
            &config(),
            &mut ChaCha8Rng::seed_from_u64(8),
        )
        .unwrap();
        assert_eq!(out.generations(), 1);
        assert_eq!(out.evaluations, budget.population_size);
    }

    #[test]
    fn threads_do_not_change_the_outcome() {
        let budget = SearchBudget {
            generations: 6,
            acceptable_successfulness: 2.0,
            ..SearchBudget::default()
        };
        let pool = pool();
        let sequential = clonal_select(
            &initial(),
            &pool,
            &budget,
            &config(),
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        let threads = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let parallel = ClonalSearch::new(initial(), &pool, budget, config())
            .unwrap()
            .with_threads(&threads)
            .run(&[], &mut ChaCha8Rng::seed_from_u64(3))
            .unwrap();
        assert_eq!(sequential, parallel);
    }

    #[test]
    fn empty_pool_is_rejected() {
        let err = clonal_select(
            &initial(),
            &ResourcePool::default(),
            &SearchBudget::default(),
            &config(),
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap_err();
        assert_eq!(err, PlanError::EmptyPool);
    }

    #[test]
    fn budget_arithmetic() {
        assert_eq!(evaluation_budget(&SearchBudget::default()), 10 + 19 * 20);
        let small = SearchBudget {
            generations: 10,
            ..SearchBudget::default()
        };
        assert_eq!(evaluation_budget(&small), 190);
    }
}
