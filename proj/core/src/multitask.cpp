#include "mtrl/multitask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtrl/e3.hpp"

namespace mtrl {

int phase1_length(double p_min, int c_bar, double delta) {
  if (!(p_min > 0.0 && p_min <= 1.0))
    throw std::invalid_argument("phase1_length: p_min must lie in (0, 1]");
  if (c_bar < 1) throw std::invalid_argument("phase1_length: c_bar must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("phase1_length: delta must lie in (0, 1)");
  const double raw = std::log(static_cast<double>(c_bar) / delta) / p_min;
  return std::max(1, static_cast<int>(std::ceil(raw)));
}

void MultiTaskConfig::validate() const {
  if (tasks < 1 || phase1_tasks < 0 || phase1_tasks > tasks)
    throw std::invalid_argument("MultiTaskConfig: need 0 <= T1 <= T (0 derives T1)");
  if (horizon < 1) throw std::invalid_argument("MultiTaskConfig: horizon must be >= 1");
  if (model_bound < 1) throw std::invalid_argument("MultiTaskConfig: model bound must be >= 1");
  if (gap < 0.0) throw std::invalid_argument("MultiTaskConfig: gap must be nonnegative");
  if (p_min < 0.0 || p_min > 1.0)
    throw std::invalid_argument("MultiTaskConfig: p_min must lie in [0, 1]");
  if (!(epsilon > 0.0)) throw std::invalid_argument("MultiTaskConfig: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("MultiTaskConfig: delta must lie in (0, 1)");
  if (m < 1) throw std::invalid_argument("MultiTaskConfig: m must be >= 1");
  if (xi < 0.0) throw std::invalid_argument("MultiTaskConfig: xi must be nonnegative");
  if (!(tol > 0.0)) throw std::invalid_argument("MultiTaskConfig: tol must be positive");
  if (!(gate_multiplier > 0.0))
    throw std::invalid_argument("MultiTaskConfig: gate multiplier must be positive");
  if (eps_known < 0.0 || phase1_threshold < 0)
    throw std::invalid_argument("MultiTaskConfig: overrides must be nonnegative");
}

ClusteringPreconditionError::ClusteringPreconditionError(int task_in, int state_in,
                                                         int action_in, double radius_in,
                                                         double bound_in)
    : std::runtime_error("clustering precondition violated: task " + std::to_string(task_in) +
                         " has confidence radius " + std::to_string(radius_in) + " > " +
                         std::to_string(bound_in) + " at (s=" + std::to_string(state_in) +
                         ", a=" + std::to_string(action_in) +
                         "); the per-task horizon is too short"),
      task(task_in),
      state(state_in),
      action(action_in),
      radius(radius_in),
      bound(bound_in) {}

GroupCountError::GroupCountError(int groups_in, int bound_in)
    : std::runtime_error("clustering produced " + std::to_string(groups_in) +
                         " groups, above the configured model bound " +
                         std::to_string(bound_in)),
      groups(groups_in),
      bound(bound_in) {}

Grouping cluster_tasks(const TaskArchive& archive, double gap,
                       const ClusterOptions& options) {
  if (archive.tables.empty())
    throw std::invalid_argument("cluster_tasks: no phase-1 tasks to cluster");
  if (!(gap > 0.0)) throw std::invalid_argument("cluster_tasks: gap must be positive");
  const int n = static_cast<int>(archive.tables.size());
  const int S = archive.tables.front().num_states();
  const int A = archive.tables.front().num_actions();
  for (const auto& t : archive.tables)
    if (!t.same_shape(archive.tables.front()))
      throw std::invalid_argument("cluster_tasks: archive tables must share a shape");

  if (options.enforce_precondition) {
    const double bound = gap / 4.0;
    for (int t = 0; t < n; ++t)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const double r =
              confidence_radius(archive.tables[t].visits(s, a), archive.radius_delta);
          if (r > bound) throw ClusteringPreconditionError(t, s, a, r, bound);
        }
  }

  // Pairwise linkage: within gap/2 at every comparable (s, a). A cell is
  // comparable when both tasks hold at least min_known_count samples there;
  // cells neither task has pinned down carry no identity signal.
  std::vector<std::vector<ThetaVector>> thetas(n);
  for (int t = 0; t < n; ++t) {
    thetas[t].reserve(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) thetas[t].push_back(estimate_theta(archive.tables[t], s, a));
  }
  auto linked = [&](int t1, int t2) {
    for (std::size_t idx = 0; idx < thetas[t1].size(); ++idx) {
      if (thetas[t1][idx].sample_size < archive.min_known_count ||
          thetas[t2][idx].sample_size < archive.min_known_count)
        continue;
      if (theta_distance(thetas[t1][idx], thetas[t2][idx]) > gap / 2.0) return false;
    }
    return true;
  };

  // Transitive closure via union-find.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (linked(i, j)) parent[find(i)] = find(j);

  Grouping grouping;
  grouping.group_of.assign(n, -1);
  std::vector<int> root_to_group;
  for (int t = 0; t < n; ++t) {
    const int root = find(t);
    int g = -1;
    for (std::size_t k = 0; k < root_to_group.size(); ++k)
      if (root_to_group[k] == root) g = static_cast<int>(k);
    if (g < 0) {
      g = static_cast<int>(root_to_group.size());
      root_to_group.push_back(root);
      grouping.merged.emplace_back(S, A);
    }
    grouping.group_of[t] = g;
    grouping.merged[g] = merge_counts(grouping.merged[g], archive.tables[t]);
  }
  return grouping;
}

std::uint64_t task_env_seed(std::uint64_t round_seed, int task) {
  return derive_seed(round_seed, static_cast<std::uint64_t>(task), 0);
}

namespace {

ThresholdSchedule phase1_schedule(const MdpFamily& family, const MultiTaskConfig& cfg,
                                  double gap) {
  if (cfg.phase1_threshold > 0) return ThresholdSchedule::fixed(cfg.phase1_threshold);
  const double v_max = 1.0 / (1.0 - family.members.front().discount());
  ThresholdSchedule schedule =
      make_schedule(std::min(gap, 2.4142135623730951), cfg.epsilon,
                    family.members.front().discount(), v_max, cfg.delta,
                    family.members.front().num_states(),
                    family.members.front().num_actions(), cfg.tasks,
                    family.next_state_bound);
  return schedule;
}

}  // namespace

MultiTaskResult run_multitask(const MdpFamily& family, const MultiTaskConfig& raw_config,
                              const TaskLogSink& sink) {
  raw_config.validate();
  family.validate();
  MultiTaskConfig config = raw_config;
  if (config.phase1_tasks == 0) {
    const double p_min = config.p_min > 0.0 ? config.p_min : family.p_min();
    config.phase1_tasks = std::min(
        config.tasks, phase1_length(p_min, config.model_bound, config.delta));
  }
  const double gap = config.gap > 0.0 ? config.gap : family.gap;
  if (!(gap > 0.0))
    throw std::invalid_argument("run_multitask: no positive model gap available");
  const double gamma = family.members.front().discount();

  MultiTaskResult result;
  result.round.tasks.reserve(config.tasks);

  // Phase 1: exploration-first single-task runs.
  TaskArchive archive;
  archive.radius_delta = config.delta;
  const ThresholdSchedule p1_schedule = phase1_schedule(family, config, gap);
  // Strict mode keeps the every-cell comparison; advisory mode compares the
  // cells both tasks explored to the phase-1 knownness bar.
  archive.min_known_count =
      config.enforce_cluster_precondition ? 0 : p1_schedule.identify_threshold;
  for (int t = 0; t < config.phase1_tasks; ++t) {
    Rng env_rng(task_env_seed(config.seed, t));
    SampledTask task = sample_task(family, env_rng);
    E3Params params;
    params.horizon = config.horizon;
    params.schedule = p1_schedule;
    params.epsilon = config.epsilon;
    params.tol = config.tol;
    E3Result res = run_e3_task(*task.simulator, params);
    if (sink) sink(t, res.log);
    result.round.tasks.push_back(summarize(t, 1, task.true_index, -1, res.log));
    archive.tables.push_back(std::move(res.counts));
  }

  // Clustering into at most model_bound groups.
  ClusterOptions cluster_options;
  cluster_options.enforce_precondition = config.enforce_cluster_precondition;
  result.grouping = cluster_tasks(archive, gap, cluster_options);
  if (result.grouping.group_count() > config.model_bound)
    throw GroupCountError(result.grouping.group_count(), config.model_bound);
  result.round.group_of_phase1_task = result.grouping.group_of;
  result.round.group_count = result.grouping.group_count();

  // Phase 2: model elimination against the evolving bank.
  GroupBank bank(result.grouping.merged, config.delta);
  FiniteModelParams fm;
  fm.horizon = config.horizon;
  fm.m = config.m;
  fm.xi = config.xi > 0.0
              ? config.xi
              : theory_elimination_threshold(bank.group_count(), config.tasks,
                                             config.horizon, config.delta);
  const double v_max = 1.0 / (1.0 - gamma);
  fm.eps_known = config.eps_known > 0.0
                     ? config.eps_known
                     : theory_eps_known(config.epsilon, gamma, v_max,
                                        family.next_state_bound);
  fm.gate_multiplier = config.gate_multiplier;
  fm.epsilon = config.epsilon;
  fm.tol = config.tol;

  for (int t = config.phase1_tasks; t < config.tasks; ++t) {
    Rng env_rng(task_env_seed(config.seed, t));
    SampledTask task = sample_task(family, env_rng);
    FiniteModelResult res = run_finite_model_task(*task.simulator, bank, fm);
    if (sink) sink(t, res.log);
    result.round.tasks.push_back(summarize(
        t, 2, task.true_index, res.identified ? *res.identified : -1, res.log));
    if (res.identified) bank.absorb(*res.identified, res.counts);
  }

  result.final_groups.reserve(bank.group_count());
  for (int g = 0; g < bank.group_count(); ++g) result.final_groups.push_back(bank.counts(g));
  return result;
}

}  // namespace mtrl
