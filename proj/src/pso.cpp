#include "optdes/pso.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace optdes {

const char* to_string(Topology::Kind kind) {
  return kind == Topology::Kind::global ? "global" : "local";
}

Topology::Kind topology_from_string(const std::string& text) {
  if (text == "global") return Topology::Kind::global;
  if (text == "local" || text == "random_local") return Topology::Kind::random_local;
  throw std::invalid_argument("unknown topology '" + text +
                              "' (expected global or local)");
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::converged_tolerance:
      return "converged_tolerance";
    case StopReason::stagnated:
      return "stagnated";
    case StopReason::max_iterations:
      return "max_iterations";
  }
  return "unknown";
}

Eigen::VectorXd vectorize(const Eigen::Ref<const DesignMatrix>& design) {
  Eigen::VectorXd flat(design.size());
  Eigen::Map<DesignMatrix>(flat.data(), design.rows(), design.cols()) = design;
  return flat;
}

DesignMatrix devectorize(const Eigen::Ref<const Eigen::VectorXd>& flat,
                         int n_points, int n_factors) {
  if (flat.size() != static_cast<Eigen::Index>(n_points) * n_factors) {
    throw std::invalid_argument("devectorize: size mismatch");
  }
  return Eigen::Map<const DesignMatrix>(flat.data(), n_points, n_factors);
}

void confine(Eigen::VectorXd& position, Eigen::VectorXd& velocity, double lower,
             double upper) {
  const Eigen::Index dim = position.size();
  for (Eigen::Index d = 0; d < dim; ++d) {
    if (position[d] < lower) {
      position[d] = lower;
      velocity[d] = 0.0;
    } else if (position[d] > upper) {
      position[d] = upper;
      velocity[d] = 0.0;
    }
  }
}

void draw_links(std::vector<std::vector<int>>& links, int swarm_size,
                int expected_links, Rng& rng) {
  links.resize(static_cast<std::size_t>(swarm_size));
  for (auto& targets : links) {
    targets.resize(static_cast<std::size_t>(expected_links));
    for (int& target : targets) {
      target = static_cast<int>(rng.below(static_cast<std::uint64_t>(swarm_size)));
    }
  }
}

PsoEngine::PsoEngine(Objective objective, int n_points, int n_factors,
                     PsoConfig config)
    : objective_(std::move(objective)),
      n_points_(n_points),
      n_factors_(n_factors),
      dim_(n_points * n_factors),
      config_(std::move(config)),
      rng_(config_.seed) {
  validate();
  if (config_.v_max.empty()) {
    v_max_ = Eigen::VectorXd::Constant(dim_, 2.0);
  } else {
    v_max_ = Eigen::Map<const Eigen::VectorXd>(
        config_.v_max.data(), static_cast<Eigen::Index>(config_.v_max.size()));
  }
}

void PsoEngine::validate() const {
  if (n_points_ < 1 || n_factors_ < 1) {
    throw std::invalid_argument("pso: points and factors must be >= 1");
  }
  if (!objective_) throw std::invalid_argument("pso: objective is empty");
  if (config_.swarm_size < 1) {
    throw std::invalid_argument("pso: swarm_size must be >= 1");
  }
  if (!(config_.inertia > 0.0) || !(config_.inertia < 1.0)) {
    throw std::invalid_argument("pso: inertia must lie in (0, 1)");
  }
  if (!(config_.cognitive_weight > 0.0) || !(config_.social_weight > 0.0)) {
    throw std::invalid_argument("pso: acceleration weights must be positive");
  }
  if (!(config_.tol > 0.0)) throw std::invalid_argument("pso: tol must be positive");
  if (config_.stagnation_limit < 1) {
    throw std::invalid_argument("pso: stagnation_limit must be >= 1");
  }
  if (config_.max_iterations < 1) {
    throw std::invalid_argument("pso: max_iterations must be >= 1");
  }
  if (config_.topology.kind == Topology::Kind::random_local &&
      (config_.topology.expected_links < 1 ||
       config_.topology.expected_links > config_.swarm_size)) {
    throw std::invalid_argument("pso: expected_links must lie in [1, swarm_size]");
  }
  if (!config_.v_max.empty()) {
    if (static_cast<int>(config_.v_max.size()) != dim_) {
      throw std::invalid_argument("pso: v_max must have N*K entries");
    }
    for (double v : config_.v_max) {
      if (!(v > 0.0)) throw std::invalid_argument("pso: v_max entries must be positive");
    }
  }
}

CriterionValue PsoEngine::evaluate(const Eigen::VectorXd& flat_position) {
  ++evaluations_;
  const Eigen::Map<const DesignMatrix> design(flat_position.data(), n_points_,
                                              n_factors_);
  return objective_(design);
}

int PsoEngine::swarm_best() const {
  int best = 0;
  for (int i = 1; i < config_.swarm_size; ++i) {
    if (state_.pbest_fitness[static_cast<std::size_t>(i)].value <
        state_.pbest_fitness[static_cast<std::size_t>(best)].value) {
      best = i;
    }
  }
  return best;
}

void PsoEngine::best_informers(std::vector<int>& best) const {
  const int s = config_.swarm_size;
  best.resize(static_cast<std::size_t>(s));
  if (config_.topology.kind == Topology::Kind::global) {
    // Full informer set: everyone's best informer is the swarm best, which is
    // already the lexicographic (fitness, index) argmin.
    std::fill(best.begin(), best.end(), state_.best_index);
    return;
  }
  for (int i = 0; i < s; ++i) best[static_cast<std::size_t>(i)] = i;
  for (int j = 0; j < s; ++j) {
    const double fj = state_.pbest_fitness[static_cast<std::size_t>(j)].value;
    for (int target : state_.links[static_cast<std::size_t>(j)]) {
      int& cur = best[static_cast<std::size_t>(target)];
      const double fc = state_.pbest_fitness[static_cast<std::size_t>(cur)].value;
      if (fj < fc || (fj == fc && j < cur)) cur = j;
    }
  }
}

void PsoEngine::regenerate_links() {
  draw_links(state_.links, config_.swarm_size, config_.topology.expected_links,
             rng_);
}

void PsoEngine::initialize() {
  const int s = config_.swarm_size;
  state_.position.assign(static_cast<std::size_t>(s), Eigen::VectorXd(dim_));
  state_.velocity.assign(static_cast<std::size_t>(s), Eigen::VectorXd(dim_));
  state_.pbest_position.assign(static_cast<std::size_t>(s), Eigen::VectorXd(dim_));
  state_.pbest_fitness.assign(static_cast<std::size_t>(s), CriterionValue{});
  state_.links.clear();
  state_.iteration = 0;

  for (int i = 0; i < s; ++i) {
    const auto gi = static_cast<std::size_t>(i);
    Eigen::VectorXd& x = state_.position[gi];
    Eigen::VectorXd& v = state_.velocity[gi];
    for (int d = 0; d < dim_; ++d) x[d] = rng_.uniform(-1.0, 1.0);
    for (int d = 0; d < dim_; ++d) {
      v[d] = rng_.uniform((-1.0 - x[d]) / 2.0, (1.0 - x[d]) / 2.0);
      if (v[d] > v_max_[d]) v[d] = v_max_[d];
      if (v[d] < -v_max_[d]) v[d] = -v_max_[d];
    }
    state_.pbest_position[gi] = x;
    state_.pbest_fitness[gi] = evaluate(x);
  }
  if (config_.topology.kind == Topology::Kind::random_local) {
    regenerate_links();
  }
  state_.best_index = swarm_best();
}

RunResult PsoEngine::run() {
  const auto start = std::chrono::steady_clock::now();
  evaluations_ = 0;
  initialize();

  double best_value = state_.pbest_fitness[static_cast<std::size_t>(state_.best_index)].value;
  std::int64_t zero_streak = 0;    // iterations in a row with no improvement
  std::int64_t subtol_streak = 0;  // iterations in a row with improvement < tol
  StopReason reason = StopReason::max_iterations;
  std::int64_t iteration = 0;
  std::vector<int> best_informer;

  while (iteration < config_.max_iterations) {
    ++iteration;
    best_informers(best_informer);
    for (int i = 0; i < config_.swarm_size; ++i) {
      const auto gi = static_cast<std::size_t>(i);
      const int b = best_informer[gi];
      const Eigen::VectorXd* social =
          (b == i) ? nullptr
                   : &state_.pbest_position[static_cast<std::size_t>(b)];
      update_velocity(state_.velocity[gi], state_.position[gi],
                      state_.pbest_position[gi], social, config_.inertia,
                      config_.cognitive_weight, config_.social_weight, v_max_,
                      [this] { return rng_.uniform01(); });
    }
    for (int i = 0; i < config_.swarm_size; ++i) {
      const auto gi = static_cast<std::size_t>(i);
      state_.position[gi] += state_.velocity[gi];
      confine(state_.position[gi], state_.velocity[gi], -1.0, 1.0);
      const CriterionValue fitness = evaluate(state_.position[gi]);
      if (fitness.value < state_.pbest_fitness[gi].value) {
        state_.pbest_fitness[gi] = fitness;
        state_.pbest_position[gi] = state_.position[gi];
      }
    }
    state_.best_index = swarm_best();
    state_.iteration = iteration;
    const double new_best =
        state_.pbest_fitness[static_cast<std::size_t>(state_.best_index)].value;

    bool stop = false;
    if (new_best < best_value) {
      zero_streak = 0;
      if (best_value - new_best < config_.tol) {
        ++subtol_streak;
      } else {
        subtol_streak = 0;
      }
    } else {
      ++zero_streak;
      ++subtol_streak;
    }
    if (zero_streak >= config_.stagnation_limit) {
      reason = StopReason::stagnated;
      stop = true;
    } else if (subtol_streak >= config_.stagnation_limit) {
      reason = StopReason::converged_tolerance;
      stop = true;
    } else if (new_best >= best_value &&
               config_.topology.kind == Topology::Kind::random_local) {
      regenerate_links();
    }
    best_value = new_best;
    if (observer_) observer_(state_);
    if (stop) break;
  }

  const auto gbest = static_cast<std::size_t>(state_.best_index);
  RunResult result;
  result.best_design = devectorize(state_.pbest_position[gbest], n_points_, n_factors_);
  result.best_fitness = state_.pbest_fitness[gbest];
  result.iterations = iteration;
  result.function_evaluations = evaluations_;
  result.stop_reason = reason;
  result.seed = config_.seed;
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

RunResult run_pso(Objective objective, int n_points, int n_factors,
                  const PsoConfig& config) {
  PsoEngine engine(std::move(objective), n_points, n_factors, config);
  return engine.run();
}

}  // namespace optdes
