#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "h2h/curriculum.hpp"
#include "h2h/policy_net.hpp"

namespace h2h {

struct EnvStep {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  int wall_contacts = 0;
};

/// Single-agent episodic task driven by the trainer.
class RlEnvironment {
 public:
  virtual ~RlEnvironment() = default;
  virtual int observation_size() const = 0;
  virtual double delta_max() const = 0;
  /// Called before every rollout with the curriculum physics for the current step.
  virtual void configure(const EnvPhysicsConfig& physics) = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual EnvStep step(const Control& control) = 0;
};

/// Straight walled corridor; reward is forward progress per step.
class CorridorEnv : public RlEnvironment {
 public:
  struct Options {
    double half_width = 1.0;
    double dt = 0.05;
    int max_steps = 100;
  };

  CorridorEnv();
  explicit CorridorEnv(Options options, VehicleParams params = VehicleParams::reference());

  int observation_size() const override { return 5; }
  double delta_max() const override { return params_.delta_max; }
  void configure(const EnvPhysicsConfig& physics) override;
  std::vector<double> reset(std::uint64_t seed) override;
  EnvStep step(const Control& control) override;

 private:
  std::vector<double> observe() const;

  Options options_;
  VehicleParams params_;
  TireSet tires_;
  VehicleState state_;
  int steps_ = 0;
};

struct PpoConfig {
  int iterations = 200;
  int steps_per_iteration = 256;
  int epochs = 4;
  int minibatch = 64;
  double learning_rate = 3e-3;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  /// Exploration noise on the unscaled policy outputs, annealed linearly.
  double sigma_start = 0.3;
  double sigma_end = 0.1;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  /// Disables tire morphing: base tires throughout.
  bool curriculum = true;
  /// Disables the shield gains: lambda = 0 throughout.
  bool cbf = true;

  void validate() const;
};

struct TraceRow {
  int iteration = 0;
  double mean_reward = 0.0;  // mean per-step reward of the rollout
  double t_s = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int wall_contacts = 0;
};

struct TrainResult {
  PolicyNet net;
  std::vector<TraceRow> trace;
  std::int64_t total_steps = 0;
};

/// Physics applied to a rollout starting at training step t, honoring the ablation flags.
EnvPhysicsConfig rollout_physics(double t, const CurriculumSchedule& schedule, const PpoConfig& config);

/// Clipped-ratio objective min(r A, clip(r) A) and its derivative in r.
struct SurrogateTerm {
  double objective = 0.0;
  double d_ratio = 0.0;
};
SurrogateTerm clipped_surrogate(double ratio, double advantage, double clip);

/// Generalized advantage estimates and returns for one trajectory buffer. done[i] marks
/// (non-zero) the end of an episode after step i; bootstrap is the value after the last step.
void compute_gae(std::span<const double> rewards, std::span<const double> values, std::span<const std::uint8_t> done,
                 double bootstrap, double gamma, double lambda, std::vector<double>& advantages,
                 std::vector<double>& returns);

class Adam {
 public:
  Adam(std::size_t size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  int t_ = 0;
};

/// Proximal policy optimization with a Gaussian head of fixed, annealed spread.
/// Deterministic for a given seed. Throws DivergenceError when a rollout's mean reward
/// is not finite.
TrainResult train(RlEnvironment& env, PolicyNet net, const CurriculumSchedule& schedule, const PpoConfig& config,
                  std::uint64_t seed);

}  // namespace h2h
