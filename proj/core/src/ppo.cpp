#include "h2h/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "h2h/errors.hpp"

namespace h2h {

CorridorEnv::CorridorEnv() : CorridorEnv(Options{}) {}

CorridorEnv::CorridorEnv(Options options, VehicleParams params)
    : options_(options), params_(params), tires_(params.tires()) {
  params_.validate();
}

void CorridorEnv::configure(const EnvPhysicsConfig& physics) { tires_ = physics.tires; }

std::vector<double> CorridorEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lateral(-0.2, 0.2);
  std::uniform_real_distribution<double> yaw(-0.1, 0.1);
  state_ = VehicleState{};
  state_.y = lateral(rng);
  state_.phi = yaw(rng);
  state_.vx = 0.5;
  steps_ = 0;
  return observe();
}

std::vector<double> CorridorEnv::observe() const {
  return {state_.vx, state_.vy, state_.omega, state_.y, state_.phi};
}

EnvStep CorridorEnv::step(const Control& control) {
  const double x0 = state_.x;
  state_ = h2h::step(state_, clamp_control(control, params_), params_, tires_, options_.dt);
  ++steps_;
  EnvStep out;
  out.reward = state_.x - x0;
  if (std::abs(state_.y) > options_.half_width) {
    out.done = true;
    out.wall_contacts = 1;
  }
  if (steps_ >= options_.max_steps) out.done = true;
  out.observation = observe();
  return out;
}

void PpoConfig::validate() const {
  if (iterations < 0 || steps_per_iteration < 1 || epochs < 0 || minibatch < 1) {
    throw ConfigError("invalid trainer batch settings");
  }
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (!(gamma >= 0.0 && gamma <= 1.0 && gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw ConfigError("discount and GAE lambda must lie in [0, 1]");
  }
  if (!(clip > 0.0)) throw ConfigError("clip range must be positive");
  if (!(sigma_start > 0.0 && sigma_end > 0.0)) throw ConfigError("exploration noise must be positive");
  if (!(value_coef >= 0.0 && max_grad_norm > 0.0)) throw ConfigError("invalid loss settings");
}

EnvPhysicsConfig rollout_physics(double t, const CurriculumSchedule& schedule, const PpoConfig& config) {
  EnvPhysicsConfig physics = environment_at(t, schedule);
  if (!config.curriculum) physics.tires = schedule.base_tires;
  if (!config.cbf) {
    physics.lambda1 = 0.0;
    physics.lambda2 = 0.0;
  }
  return physics;
}

SurrogateTerm clipped_surrogate(double ratio, double advantage, double clip) {
  const double unclipped = ratio * advantage;
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * advantage;
  if (unclipped <= clipped) return {unclipped, advantage};
  return {clipped, 0.0};
}

void compute_gae(std::span<const double> rewards, std::span<const double> values, std::span<const std::uint8_t> done,
                 double bootstrap, double gamma, double lambda, std::vector<double>& advantages,
                 std::vector<double>& returns) {
  const std::size_t n = rewards.size();
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double next_value = bootstrap;
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double mask = done[k] != 0 ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * mask - values[k];
    running = delta + gamma * lambda * mask * running;
    advantages[k] = running;
    returns[k] = running + values[k];
    next_value = values[k];
  }
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

TrainResult train(RlEnvironment& env, PolicyNet net, const CurriculumSchedule& schedule, const PpoConfig& config,
                  std::uint64_t seed) {
  config.validate();
  schedule.validate();
  if (net.input_size() != env.observation_size()) throw ConfigError("network input size does not match the task");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto next_seed = [&rng]() { return rng(); };

  const std::size_t n = static_cast<std::size_t>(config.steps_per_iteration);
  const std::size_t obs_size = static_cast<std::size_t>(env.observation_size());
  std::vector<double> observations(n * obs_size);
  std::vector<std::array<double, 2>> actions(n), means(n);
  std::vector<double> rewards(n), values(n), advantages, returns;
  std::vector<std::uint8_t> done_flags(n);
  std::vector<double> grad(net.parameter_count());
  std::vector<std::size_t> order(n);
  Adam adam(net.parameter_count(), config.learning_rate);

  TrainResult result;
  std::vector<double> obs = env.reset(next_seed());
  for (int it = 0; it < config.iterations; ++it) {
    const double progress = config.iterations > 1 ? static_cast<double>(it) / (config.iterations - 1) : 1.0;
    const double sigma = config.sigma_start + (config.sigma_end - config.sigma_start) * progress;
    const EnvPhysicsConfig physics = rollout_physics(static_cast<double>(result.total_steps), schedule, config);
    env.configure(physics);

    TraceRow row;
    row.iteration = it;
    row.t_s = physics.t_s;
    row.lambda1 = physics.lambda1;
    row.lambda2 = physics.lambda2;
    double reward_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      std::copy(obs.begin(), obs.end(), observations.begin() + static_cast<std::ptrdiff_t>(k * obs_size));
      const PolicyOutput out = net.evaluate(obs);
      means[k] = {out.throttle, out.steer};
      values[k] = out.value;
      actions[k] = {out.throttle + sigma * noise(rng), out.steer + sigma * noise(rng)};
      const Control u(std::clamp(actions[k][0], -1.0, 1.0), env.delta_max() * std::clamp(actions[k][1], -1.0, 1.0),
                      env.delta_max());
      EnvStep step = env.step(u);
      rewards[k] = step.reward;
      done_flags[k] = step.done ? 1 : 0;
      reward_sum += step.reward;
      row.wall_contacts += step.wall_contacts;
      obs = step.done ? env.reset(next_seed()) : std::move(step.observation);
    }
    result.total_steps += static_cast<std::int64_t>(n);
    row.mean_reward = reward_sum / static_cast<double>(n);
    if (!std::isfinite(row.mean_reward)) throw DivergenceError("training reward became non-finite");
    result.trace.push_back(row);

    const double bootstrap = net.evaluate(obs).value;
    compute_gae(rewards, values, done_flags, bootstrap, config.gamma, config.gae_lambda, advantages, returns);
    const double mean_adv = std::accumulate(advantages.begin(), advantages.end(), 0.0) / static_cast<double>(n);
    double var_adv = 0.0;
    for (double a : advantages) var_adv += (a - mean_adv) * (a - mean_adv);
    const double std_adv = std::sqrt(var_adv / static_cast<double>(n)) + 1e-8;

    const double inv_var = 1.0 / (sigma * sigma);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.minibatch)) {
        const std::size_t end = std::min(n, start + static_cast<std::size_t>(config.minibatch));
        const double scale = 1.0 / static_cast<double>(end - start);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t b = start; b < end; ++b) {
          const std::size_t k = order[b];
          const std::span<const double> x(observations.data() + k * obs_size, obs_size);
          const PolicyOutput out = net.evaluate(x);
          const std::array<double, 2> mu{out.throttle, out.steer};
          double log_ratio = 0.0;
          for (int d = 0; d < 2; ++d) {
            const double a = actions[k][static_cast<std::size_t>(d)];
            const double now = a - mu[static_cast<std::size_t>(d)];
            const double old = a - means[k][static_cast<std::size_t>(d)];
            log_ratio += -0.5 * (now * now - old * old) * inv_var;
          }
          const double ratio = std::exp(log_ratio);
          const double adv = (advantages[k] - mean_adv) / std_adv;
          const SurrogateTerm term = clipped_surrogate(ratio, adv, config.clip);
          // d(-objective)/d(mu_d) = -d_ratio * ratio * (a_d - mu_d) / sigma^2
          const double g0 = -term.d_ratio * ratio * (actions[k][0] - mu[0]) * inv_var * scale;
          const double g1 = -term.d_ratio * ratio * (actions[k][1] - mu[1]) * inv_var * scale;
          const double gv = 2.0 * config.value_coef * (out.value - returns[k]) * scale;
          net.backward(x, g0, g1, gv, grad);
        }
        double norm = 0.0;
        for (double g : grad) norm += g * g;
        norm = std::sqrt(norm);
        if (norm > config.max_grad_norm) {
          for (double& g : grad) g *= config.max_grad_norm / norm;
        }
        if (config.learning_rate > 0.0) adam.step(net.params(), grad);
      }
    }
  }
  result.net = std::move(net);
  return result;
}

}  // namespace h2h
