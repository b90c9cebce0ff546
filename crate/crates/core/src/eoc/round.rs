use super::control::{control_step, ControlEvent, ControlState, IllegalTransition};
use super::message::{LogEntry, Message, RoundLog, Status};
use super::roles::{AgentRole, EocConfig, RoleCountError};
use super::schedule::{
    later, schedule, Activity, ClockError, Due, EventQueue, ALLOCATION_DELAY_HOURS, TICK_HOURS,
};
use crate::epidemic::{effects_for_day, simulate, DiseaseParams, EpidemicTrace, ParamError, World};
use crate::memory::{MemoryError, MemoryStore};
use crate::plan::{task_cost, Action, Plan, PlanError, ResourcePool};
use crate::planner::{
    conform, plan_certainty, successfulness, ClonalSearch, EvaluationConfig, SearchBudget,
};
use crate::seed;
use crate::situation::{is_nonself, SelfPolicy, Situation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPool;
use thiserror::Error;

/// Everything one EOC round needs besides the memory store.
#[derive(Debug, Clone, PartialEq)]
pub struct EocRoundConfig {
    pub population: u32,
    pub initial_infected: u32,
    pub duration_days: u32,
    pub seed: u64,
    pub disease: DiseaseParams,
    pub eoc: EocConfig,
    pub budget: SearchBudget,
    pub policy: SelfPolicy,
    pub pool: ResourcePool,
    pub evaluation_replicates: u32,
    pub cost_scale: f64,
}

#[derive(Debug, Error)]
pub enum RoundError {
    #[error(transparent)]
    Roles(#[from] RoleCountError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("planner.{0}")]
    Budget(&'static str),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error(transparent)]
    Control(#[from] IllegalTransition),
}

/// Result of one EOC round.
#[derive(Debug, Clone)]
pub struct EocOutcome {
    pub trace: EpidemicTrace,
    pub log: RoundLog,
    /// Everything deployed during the round, in absolute days.
    pub plan: Plan,
    /// Certainty of the plan issued when the outbreak was detected.
    pub certainty: f64,
    pub successfulness: f64,
    pub stored_case_id: Option<u64>,
    pub detection_day: Option<u32>,
    /// Plan evaluations spent by the clonal search.
    pub evaluations: usize,
    pub final_state: ControlState,
    pub reused_case: Option<u64>,
}

#[derive(Debug, Clone)]
struct Deployed {
    plan_id: u64,
    index: usize,
    agent: u32,
    live: bool,
}

struct Detection {
    day: u32,
    situation: Situation,
    baseline: EpidemicTrace,
}

struct Round<'a> {
    cfg: &'a EocRoundConfig,
    store: &'a mut MemoryStore,
    threads: Option<&'a ThreadPool>,
    world: World,
    trace: EpidemicTrace,
    log: RoundLog,
    queue: EventQueue,
    planner_rng: ChaCha8Rng,
    state: ControlState,
    next_report: u64,
    next_situation: u64,
    next_plan: u64,
    pending_reports: Vec<(u64, Situation)>,
    latest: Option<(u64, u64, Situation)>,
    detection: Option<Detection>,
    deployed: Plan,
    issued: Option<Plan>,
    tasks: Vec<Deployed>,
    cut: Vec<Deployed>,
    next_tactical: u32,
    certainty: f64,
    /// Certainty of the plan issued at detection.
    first_certainty: Option<f64>,
    evaluations: usize,
    final_status: Option<(Status, f64)>,
    stored_case_id: Option<u64>,
    reused_case: Option<u64>,
}

/// Runs one round of the EOC over `cfg.duration_days` days on the 2-hour
/// clock, reading and extending `store`.
///
/// The world advances one day at hour 0. Operational agents report the
/// census every six hours and the communication agent aggregates two hours
/// later. At hour 4 the decision maker reviews the latest aggregate; an
/// undesired situation is matched against memory and either answered with
/// the remembered plan (within the match radius) or with a clonal search
/// seeded by the nearest case. Tasks are allocated round-robin four hours
/// later. On the checkpoint day a plan that falls short of the acceptance
/// threshold is dropped and the remaining days are re-planned. At the end of
/// the round the realized successfulness is reported and one case is
/// stored.
pub fn run_eoc_round(
    cfg: &EocRoundConfig,
    store: &mut MemoryStore,
    threads: Option<&ThreadPool>,
) -> Result<EocOutcome, RoundError> {
    cfg.eoc.validate()?;
    cfg.disease.validate()?;
    cfg.budget.validate().map_err(RoundError::Budget)?;
    cfg.pool.validate()?;
    let world = World::new(cfg.population, cfg.initial_infected, cfg.disease, cfg.seed);
    let mut trace = EpidemicTrace::new(world.population(), 0.0);
    trace.push(world.census());
    let mut round = Round {
        cfg,
        store,
        threads,
        world,
        trace,
        log: RoundLog::new(),
        queue: EventQueue::new(),
        planner_rng: ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, seed::stream::PLANNER)),
        state: ControlState::Monitoring,
        next_report: 0,
        next_situation: 0,
        next_plan: 0,
        pending_reports: Vec::new(),
        latest: None,
        detection: None,
        deployed: Plan::empty(),
        issued: None,
        tasks: Vec::new(),
        cut: Vec::new(),
        next_tactical: 0,
        certainty: 0.0,
        first_certainty: None,
        evaluations: 0,
        final_status: None,
        stored_case_id: None,
        reused_case: None,
    };
    round.run()?;
    let Round {
        mut trace,
        log,
        deployed,
        first_certainty,
        final_status,
        stored_case_id,
        detection,
        evaluations,
        state,
        reused_case,
        ..
    } = round;
    trace.set_total_cost(deployed.total_cost());
    Ok(EocOutcome {
        trace,
        log,
        plan: deployed,
        certainty: first_certainty.unwrap_or(0.0),
        successfulness: final_status.map_or(0.0, |(_, s)| s),
        stored_case_id,
        detection_day: detection.map(|d| d.day),
        evaluations,
        final_state: state,
        reused_case,
    })
}

fn peak(days: &[Situation]) -> f64 {
    days.iter()
        .map(|s| s.active_infections())
        .max()
        .unwrap_or(0) as f64
}

impl Round<'_> {
    fn run(&mut self) -> Result<(), RoundError> {
        let duration = self.cfg.duration_days;
        for day in 0..=duration {
            for hour in (0..24).step_by(TICK_HOURS as usize) {
                if hour == 0 && day >= 1 {
                    let fx = effects_for_day(&self.deployed, day - 1)?;
                    self.world.advance(&fx);
                    self.trace.push(self.world.census());
                }
                for due in schedule(&self.cfg.eoc, day, hour)? {
                    self.queue.push(due)?;
                }
                while let Some(due) = self.queue.pop_due(day, hour) {
                    self.handle(due)?;
                }
            }
        }
        Ok(())
    }

    fn log(&mut self, due: &Due, details: Message) {
        self.log.push(LogEntry {
            agent: self.cfg.eoc.agent_name(due.role, due.agent),
            role: due.role,
            eoc: self.cfg.eoc.name.clone(),
            action_description: details.description().to_string(),
            day: due.day,
            hour: due.hour,
            details,
        });
    }

    fn transition(&mut self, due: &Due, event: ControlEvent) -> Result<(), RoundError> {
        let from = self.state;
        let to = control_step(from, event)?;
        self.state = to;
        self.log(due, Message::ControlTransition { event, from, to });
        Ok(())
    }

    fn at(
        &mut self,
        day: u32,
        hour: u32,
        role: AgentRole,
        agent: u32,
        activity: Activity,
    ) -> Result<(), RoundError> {
        self.queue.push(Due {
            day,
            hour,
            role,
            agent,
            activity,
        })?;
        Ok(())
    }

    fn handle(&mut self, due: Due) -> Result<(), RoundError> {
        match due.activity {
            Activity::Report => self.report(&due),
            Activity::Aggregate => self.aggregate(&due),
            Activity::Decide => self.decide(&due)?,
            Activity::Allocate => self.allocate(&due)?,
            Activity::CompleteTask {
                plan_id,
                task_index,
            } => self.complete(&due, plan_id, task_index),
            Activity::CheckpointStatus => self.checkpoint(&due)?,
            Activity::Replan => self.replan(&due)?,
            Activity::CancelTasks => self.cancel(&due),
            Activity::FinalStatus => self.final_status(&due),
            Activity::FinalDecision => self.final_decision(&due)?,
        }
        Ok(())
    }

    fn report(&mut self, due: &Due) {
        let report_id = self.next_report;
        self.next_report += 1;
        let situation = self.world.census();
        self.pending_reports.push((report_id, situation));
        self.log(
            due,
            Message::SituationReport {
                report_id,
                situation,
            },
        );
    }

    fn aggregate(&mut self, due: &Due) {
        let Some(&(reference_report_id, situation)) = self.pending_reports.last() else {
            return;
        };
        self.pending_reports.clear();
        let situation_id = self.next_situation;
        self.next_situation += 1;
        self.latest = Some((situation_id, reference_report_id, situation));
        self.log(
            due,
            Message::AggregatedReport {
                situation_id,
                reference_report_id,
                situation,
            },
        );
    }

    fn decide(&mut self, due: &Due) -> Result<(), RoundError> {
        if self.state != ControlState::Monitoring || self.detection.is_some() {
            return Ok(());
        }
        let Some((_, _, situation)) = self.latest else {
            return Ok(());
        };
        if !is_nonself(&situation, &self.cfg.policy) {
            return Ok(());
        }
        let duration = self.cfg.duration_days;
        let baseline = simulate(self.world.clone(), &Plan::empty(), duration - due.day)?;
        self.detection = Some(Detection {
            day: due.day,
            situation,
            baseline,
        });
        self.transition(due, ControlEvent::NonselfDetected)?;

        let radius = self.store.settings.match_radius;
        let nearest = self
            .store
            .retrieve_nearest(&situation)
            .map(|(c, d)| (c.clone(), d));
        self.certainty = plan_certainty(nearest.as_ref().map(|(c, d)| (c, *d)), radius);
        let plan = match nearest {
            Some((case, d)) if d <= radius => {
                self.transition(due, ControlEvent::MemoryMatch)?;
                self.reused_case = Some(case.id);
                let shifted = case.plan.shifted(due.day, duration, Some(&self.cfg.pool));
                conform(&shifted, &self.cfg.pool, duration)
            }
            nearest => {
                self.transition(due, ControlEvent::MemoryMiss)?;
                self.transition(due, ControlEvent::MemoryMiss)?;
                self.transition(due, ControlEvent::MemoryMiss)?;
                let seed_plan = nearest.map(|(c, _)| c.plan);
                self.search(situation, due.day, seed_plan)?
            }
        };
        self.transition(due, ControlEvent::PlanFound)?;
        self.issue(due, plan)?;

        let c = self.cfg.eoc.checkpoint_day;
        if due.day < c && c < duration {
            self.at(
                c,
                2,
                AgentRole::TacticalCommunication,
                0,
                Activity::CheckpointStatus,
            )?;
        }
        self.at(
            duration,
            20,
            AgentRole::TacticalCommunication,
            0,
            Activity::FinalStatus,
        )?;
        self.at(
            duration,
            22,
            AgentRole::DecisionMaking,
            0,
            Activity::FinalDecision,
        )?;
        Ok(())
    }

    /// Clonal search from `situation` over the rest of the round; returns
    /// the plan in absolute days. A plan no better than doing nothing is
    /// replaced by the empty plan.
    fn search(
        &mut self,
        situation: Situation,
        day: u32,
        seed_plan: Option<Plan>,
    ) -> Result<Plan, RoundError> {
        let duration = self.cfg.duration_days;
        let horizon = duration - day;
        let config = EvaluationConfig {
            disease: self.cfg.disease,
            horizon,
            seed: seed::derive(self.cfg.seed, seed::stream::EVALUATION),
            replicates: self.cfg.evaluation_replicates,
            cost_scale: self.cfg.cost_scale,
        };
        let mut search = ClonalSearch::new(situation, &self.cfg.pool, self.cfg.budget, config)?;
        if let Some(threads) = self.threads {
            search = search.with_threads(threads);
        }
        let seeds: Vec<Plan> = seed_plan.into_iter().collect();
        let outcome = search.run(&seeds, &mut self.planner_rng)?;
        self.evaluations += outcome.evaluations;
        if outcome.successfulness <= 0.0 {
            return Ok(Plan::empty());
        }
        Ok(outcome.plan.shifted(day, duration, Some(&self.cfg.pool)))
    }

    /// Distributes `plan` and schedules its allocation.
    fn issue(&mut self, due: &Due, mut plan: Plan) -> Result<(), RoundError> {
        plan.id = self.next_plan;
        self.next_plan += 1;
        plan.certainty = self.certainty;
        self.first_certainty.get_or_insert(self.certainty);
        let (situation_id, reference_report_id, _) =
            self.latest.expect("decisions follow an aggregate");
        self.log(
            due,
            Message::PlanMsg {
                plan_id: plan.id,
                situation_id,
                reference_report_id,
                certainty: plan.certainty,
                tasks: plan.tasks.clone(),
            },
        );
        self.deployed.id = plan.id;
        self.deployed.certainty = plan.certainty;
        self.deployed.tasks.extend(plan.tasks.iter().cloned());
        self.issued = Some(plan);
        let (day, hour) = later(due.day, due.hour, ALLOCATION_DELAY_HOURS);
        self.at(
            day,
            hour,
            AgentRole::TacticalCommunication,
            0,
            Activity::Allocate,
        )
    }

    fn allocate(&mut self, due: &Due) -> Result<(), RoundError> {
        let Some(plan) = self.issued.take() else {
            return Ok(());
        };
        let duration = self.cfg.duration_days;
        for (index, task) in plan.tasks.iter().enumerate() {
            let agent = self.next_tactical % self.cfg.eoc.tactical;
            self.next_tactical += 1;
            self.log(
                due,
                Message::TaskAssignment {
                    plan_id: plan.id,
                    task_index: index,
                    task: task.clone(),
                    tactical_agent: self.cfg.eoc.agent_name(AgentRole::Tactical, agent),
                },
            );
            self.tasks.push(Deployed {
                plan_id: plan.id,
                index,
                agent,
                live: true,
            });
            let done = (task.to_day + 1).min(duration).max(due.day + 1);
            self.at(
                done,
                0,
                AgentRole::Tactical,
                agent,
                Activity::CompleteTask {
                    plan_id: plan.id,
                    task_index: index,
                },
            )?;
        }
        self.transition(due, ControlEvent::PlanDeployed)
    }

    fn complete(&mut self, due: &Due, plan_id: u64, task_index: usize) {
        let Some(task) = self
            .tasks
            .iter_mut()
            .find(|t| t.live && t.plan_id == plan_id && t.index == task_index)
        else {
            return;
        };
        task.live = false;
        self.log(
            due,
            Message::TaskStatus {
                plan_id,
                task_index,
                status: Status::Ok,
            },
        );
    }

    /// Successfulness realized between detection and `day`, against the
    /// no-plan baseline simulated from the detection world.
    fn realized(&self, day: u32) -> f64 {
        let Some(det) = &self.detection else {
            return 0.0;
        };
        let realized = peak(&self.trace.days()[det.day as usize..=day as usize]);
        let base = peak(&det.baseline.days()[..=(day - det.day) as usize]);
        successfulness(
            base,
            realized,
            self.deployed.total_cost(),
            self.cfg.cost_scale,
        )
    }

    fn checkpoint(&mut self, due: &Due) -> Result<(), RoundError> {
        let score = self.realized(due.day);
        let status = if score >= self.cfg.budget.acceptable_successfulness {
            Status::Ok
        } else {
            Status::Failed
        };
        self.log(
            due,
            Message::PlanStatus {
                plan_id: self.deployed.id,
                status,
                successfulness: score,
            },
        );
        if status == Status::Failed {
            let (day, hour) = later(due.day, due.hour, 2);
            self.at(day, hour, AgentRole::DecisionMaking, 0, Activity::Replan)?;
        }
        Ok(())
    }

    /// Drops the running plan, keeps what already happened, and plans the
    /// remaining days from the current situation.
    fn replan(&mut self, due: &Due) -> Result<(), RoundError> {
        self.transition(due, ControlEvent::ResponseFailed)?;
        self.transition(due, ControlEvent::MemoryMiss)?;
        let c = due.day;
        self.truncate(c);
        let mut agents: Vec<u32> = self.cut.iter().map(|t| t.agent).collect();
        agents.sort_unstable();
        agents.dedup();
        for agent in agents {
            let (day, hour) = later(due.day, due.hour, 2);
            self.at(day, hour, AgentRole::Tactical, agent, Activity::CancelTasks)?;
        }

        let (_, _, situation) = self.latest.expect("decisions follow an aggregate");
        let radius = self.store.settings.match_radius;
        let nearest = self
            .store
            .retrieve_nearest(&situation)
            .map(|(c, d)| (c.clone(), d));
        self.certainty = plan_certainty(nearest.as_ref().map(|(c, d)| (c, *d)), radius);
        let plan = self.search(situation, c, nearest.map(|(case, _)| case.plan))?;
        self.transition(due, ControlEvent::PlanFound)?;
        self.issue(due, plan)
    }

    /// Ends every task of the deployed plan before `day`: tasks not yet
    /// started are dropped, running ones are cut to `day - 1`.
    fn truncate(&mut self, day: u32) {
        let pool = &self.cfg.pool;
        let mut kept = Vec::new();
        for task in self.deployed.tasks.drain(..) {
            if task.from_day >= day {
                continue;
            }
            if task.to_day < day {
                kept.push(task);
                continue;
            }
            kept.push(cut_task(&task, day - 1, pool));
        }
        self.deployed.tasks = kept;
        for t in self.tasks.iter_mut().filter(|t| t.live) {
            t.live = false;
            self.cut.push(t.clone());
        }
    }

    fn cancel(&mut self, due: &Due) {
        let (mine, rest): (Vec<_>, Vec<_>) = self.cut.drain(..).partition(|t| t.agent == due.agent);
        self.cut = rest;
        for t in mine {
            self.log(
                due,
                Message::TaskStatus {
                    plan_id: t.plan_id,
                    task_index: t.index,
                    status: Status::Failed,
                },
            );
        }
    }

    fn final_status(&mut self, due: &Due) {
        let score = self.realized(due.day);
        let status = if score >= self.store.settings.min_successfulness {
            Status::Ok
        } else {
            Status::Failed
        };
        self.final_status = Some((status, score));
        self.log(
            due,
            Message::PlanStatus {
                plan_id: self.deployed.id,
                status,
                successfulness: score,
            },
        );
    }

    fn final_decision(&mut self, due: &Due) -> Result<(), RoundError> {
        let Some((status, score)) = self.final_status else {
            return Ok(());
        };
        match status {
            Status::Ok => {
                self.transition(due, ControlEvent::ResponseSucceeded)?;
                self.transition(due, ControlEvent::NoChange)?;
            }
            Status::Failed => self.transition(due, ControlEvent::ResponseFailed)?,
        }
        let det = self
            .detection
            .as_ref()
            .expect("a status implies a detection");
        let plan = rebase(&self.deployed, det.day);
        let case_id = self.store.store(score, det.situation, plan)?;
        self.stored_case_id = Some(case_id);
        self.log(
            due,
            Message::CaseStored {
                case_id,
                successfulness: score,
            },
        );
        Ok(())
    }
}

/// `task` ended early on `last_day`. Vaccinations keep only the doses
/// already given.
fn cut_task(task: &Action, last_day: u32, pool: &ResourcePool) -> Action {
    let old_duration = task.duration();
    let mut t = task.clone();
    t.to_day = last_day;
    if t.action.is_one_shot() {
        t.amount = (task.amount as u64 * t.duration() as u64 / old_duration as u64) as u32;
    }
    t.cost = match pool.template(t.action) {
        Some(template) => task_cost(t.action, template.unit_cost, t.amount, t.from_day, t.to_day),
        None if t.action.is_one_shot() => task.cost * t.amount as f64 / task.amount.max(1) as f64,
        None => task.cost * t.duration() as f64 / old_duration as f64,
    };
    t
}

/// `plan` with every task moved `offset` days earlier.
fn rebase(plan: &Plan, offset: u32) -> Plan {
    let mut plan = plan.clone();
    for t in &mut plan.tasks {
        t.from_day -= offset;
        t.to_day -= offset;
    }
    plan
}
