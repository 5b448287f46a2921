#include "mtrl/task_log.hpp"

#include <ostream>

namespace mtrl {

std::int64_t TaskLog::explore_reentries() const {
  std::int64_t reentries = 0;
  bool seen_exploit = false;
  Mode last = Mode::explore;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Mode m = steps[i].mode;
    if (i > 0 && m == Mode::explore && last == Mode::exploit && seen_exploit) ++reentries;
    if (m == Mode::exploit) seen_exploit = true;
    last = m;
  }
  return reentries;
}

void TaskLog::write_csv(std::ostream& out) const {
  out << "step,state,action,reward,mode,known_pairs_count\n";
  for (const auto& s : steps) {
    out << s.step << ',' << s.state << ',' << s.action << ',' << s.reward << ','
        << (s.mode == Mode::explore ? "explore" : "exploit") << ',' << s.known_pairs
        << '\n';
  }
  if (!eliminations.empty()) {
    out << "# eliminations: step,eliminated,surviving\n";
    for (const auto& e : eliminations)
      out << "# " << e.step << ',' << e.eliminated << ',' << e.surviving << '\n';
  }
}

const char* RoundLog::csv_header() {
  return "round,task,phase,true_mdp,identified_group,cum_reward,unknown_visits,"
         "identification_step";
}

void RoundLog::write_csv(std::ostream& out) const {
  out << csv_header() << '\n';
  for (const auto& t : tasks) {
    out << round << ',' << t.task << ',' << t.phase << ',' << t.true_mdp << ','
        << t.identified_group << ',' << t.cum_reward << ',' << t.unknown_visits << ','
        << t.identification_step << '\n';
  }
}

TaskSummary summarize(int task, int phase, int true_mdp, int identified_group,
                      const TaskLog& log) {
  TaskSummary s;
  s.task = task;
  s.phase = phase;
  s.true_mdp = true_mdp;
  s.identified_group = identified_group;
  s.cum_reward = log.cum_reward;
  s.unknown_visits = log.unknown_visits;
  s.identification_step = log.identification_step;
  s.steps = log.step_count();
  return s;
}

}  // namespace mtrl
