#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "optdes/criteria.hpp"
#include "optdes/model.hpp"

namespace optdes {

/// Uniform source with a platform-independent mapping from generator output
/// to doubles and bounded integers. The generator identity is part of the
/// result-file contract, so the mapping must not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1) using the top 53 bits of the generator word.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased integer in [0, n) via rejection sampling.
  std::uint64_t below(std::uint64_t n) {
    if (n < 2) return 0;
    const std::uint64_t min = (~n + 1) % n;  // 2^64 mod n
    std::uint64_t r = gen_();
    while (r < min) r = gen_();
    return r % n;
  }

  static const char* name() { return "mt19937_64-top53"; }

 private:
  std::mt19937_64 gen_;
};

struct Topology {
  enum class Kind { global, random_local };
  Kind kind = Kind::random_local;
  int expected_links = 3;  // random_local only
};

const char* to_string(Topology::Kind kind);
Topology::Kind topology_from_string(const std::string& text);

inline double default_inertia() { return 1.0 / (2.0 * std::log(2.0)); }
inline double default_acceleration() { return 0.5 + std::log(2.0); }
inline double default_tolerance() {
  return std::sqrt(std::numeric_limits<double>::epsilon());
}

struct PsoConfig {
  int swarm_size = 50;
  double inertia = default_inertia();
  double cognitive_weight = default_acceleration();
  double social_weight = default_acceleration();
  /// Per-coordinate velocity limit; empty means the search-range width (2.0)
  /// in every coordinate.
  std::vector<double> v_max;
  Topology topology;
  std::int64_t max_iterations = 5000;
  /// Improvements of the swarm best below this threshold count as
  /// no-progress toward stopping.
  double tol = default_tolerance();
  /// The run stops after this many consecutive iterations whose swarm-best
  /// improvement stays below tol: `stagnated` when none of them improved at
  /// all, `converged_tolerance` when at least one sub-tol improvement landed.
  std::int64_t stagnation_limit = 100;
  std::uint64_t seed = 0;
};

enum class StopReason { converged_tolerance, stagnated, max_iterations };
const char* to_string(StopReason reason);

struct RunResult {
  DesignMatrix best_design;
  CriterionValue best_fitness;
  std::int64_t iterations = 0;
  std::int64_t function_evaluations = 0;
  double wall_time_seconds = 0.0;
  StopReason stop_reason = StopReason::max_iterations;
  std::uint64_t seed = 0;
};

using Objective = std::function<CriterionValue(const Eigen::Ref<const DesignMatrix>&)>;

/// Column-major flattening: entry (i, k) of an N x K design goes to slot
/// k*N + i. devectorize inverts it exactly.
Eigen::VectorXd vectorize(const Eigen::Ref<const DesignMatrix>& design);
DesignMatrix devectorize(const Eigen::Ref<const Eigen::VectorXd>& flat,
                         int n_points, int n_factors);

/// v <- w v + c1 U (pbest - x) + c2 U (social - x), elementwise, then clipped
/// to +/- v_max. The cognitive vector is drawn in full before the social one;
/// a null `social` drops the social term and consumes no draws for it.
template <class UniformFn>
void update_velocity(Eigen::VectorXd& velocity, const Eigen::VectorXd& position,
                     const Eigen::VectorXd& pbest, const Eigen::VectorXd* social,
                     double inertia, double cognitive_weight, double social_weight,
                     const Eigen::VectorXd& v_max, UniformFn&& unit) {
  const Eigen::Index dim = velocity.size();
  for (Eigen::Index d = 0; d < dim; ++d) {
    velocity[d] = inertia * velocity[d] +
                  cognitive_weight * unit() * (pbest[d] - position[d]);
  }
  if (social != nullptr) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      velocity[d] += social_weight * unit() * ((*social)[d] - position[d]);
    }
  }
  for (Eigen::Index d = 0; d < dim; ++d) {
    if (velocity[d] > v_max[d]) velocity[d] = v_max[d];
    if (velocity[d] < -v_max[d]) velocity[d] = -v_max[d];
  }
}

/// Absorbing-wall confinement: out-of-bounds coordinates are set on the
/// violated boundary and their velocity zeroed; in-bounds coordinates are
/// untouched. The boundary itself is feasible.
void confine(Eigen::VectorXd& position, Eigen::VectorXd& velocity, double lower,
             double upper);

/// Redraws every particle's outgoing links: `expected_links` targets drawn
/// uniformly with replacement from all `swarm_size` particles. The self-link
/// is implicit and never stored. links[j] lists who particle j informs.
void draw_links(std::vector<std::vector<int>>& links, int swarm_size,
                int expected_links, Rng& rng);

struct SwarmState {
  std::vector<Eigen::VectorXd> position;
  std::vector<Eigen::VectorXd> velocity;
  std::vector<Eigen::VectorXd> pbest_position;
  std::vector<CriterionValue> pbest_fitness;
  /// Outgoing informer draws per particle (random_local topology only).
  std::vector<std::vector<int>> links;
  /// Index of the current swarm best (lowest index wins ties).
  int best_index = -1;
  std::int64_t iteration = 0;
};

/// Synchronous-update particle swarm over vectorized designs. One topology
/// mechanism serves both variants: the global topology is the full-informer
/// special case, so a particle whose best informer is itself omits the social
/// term under either variant.
class PsoEngine {
 public:
  PsoEngine(Objective objective, int n_points, int n_factors, PsoConfig config);
  virtual ~PsoEngine() = default;

  RunResult run();

  const SwarmState& state() const { return state_; }
  const PsoConfig& config() const { return config_; }

  /// Called after every completed iteration with the current swarm state.
  void set_iteration_observer(std::function<void(const SwarmState&)> observer) {
    observer_ = std::move(observer);
  }

 protected:
  /// Redraws the informer links from the run's generator. Virtual so tests
  /// can substitute a fixed topology without touching the draw stream.
  virtual void regenerate_links();

  /// Draws positions and velocities, evaluates the initial fitnesses, and
  /// draws the initial links. run() calls this first; exposed for diagnostics.
  void initialize();

  SwarmState& swarm_state() { return state_; }

 private:
  void validate() const;
  /// Lexicographic argmin over (pbest fitness, particle index).
  int swarm_best() const;
  /// best[i] = index of the best informer of particle i under the current
  /// links (always i itself in the degenerate case).
  void best_informers(std::vector<int>& best) const;
  CriterionValue evaluate(const Eigen::VectorXd& flat_position);

  Objective objective_;
  int n_points_;
  int n_factors_;
  int dim_;
  PsoConfig config_;
  Rng rng_;
  Eigen::VectorXd v_max_;
  SwarmState state_;
  std::int64_t evaluations_ = 0;
  std::function<void(const SwarmState&)> observer_;
};

/// Runs one search and reports the devectorized swarm-best design.
RunResult run_pso(Objective objective, int n_points, int n_factors,
                  const PsoConfig& config);

}  // namespace optdes
