#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "h2h/vehicle_dynamics.hpp"

namespace h2h {

/// Policy head output before scaling, in (-1, 1)^2: (throttle, steer / delta_max).
struct PolicyOutput {
  double throttle = 0.0;
  double steer = 0.0;
  double value = 0.0;
};

/// Fully connected tanh trunk with a tanh policy head and a linear value head.
///
/// Parameters live in one flat vector: for every trunk layer the weight matrix
/// (row-major, out x in) followed by its bias, then the policy head, then the value head.
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(int input_size, std::vector<int> hidden, double delta_max = 0.4);

  /// Eight hidden layers of 128 units over the 42-entry observation.
  static PolicyNet standard(double delta_max = 0.4);

  static std::size_t parameter_count(int input_size, const std::vector<int>& hidden);

  int input_size() const { return input_size_; }
  const std::vector<int>& hidden() const { return hidden_; }
  double delta_max() const { return delta_max_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  void set_params(std::vector<double> params);

  /// Scaled Xavier-style initialization; the policy head starts near zero.
  void initialize(std::uint64_t seed);

  PolicyOutput evaluate(std::span<const double> input) const;
  Control forward(std::span<const double> input) const;

  /// Gradient of g_throttle * throttle + g_steer * steer + g_value * value with respect
  /// to the parameters (unscaled head outputs), accumulated into grad.
  void backward(std::span<const double> input, double g_throttle, double g_steer, double g_value,
                std::span<double> grad) const;

 private:
  struct Cache;
  PolicyOutput run(std::span<const double> input, Cache* cache) const;

  int input_size_ = 0;
  std::vector<int> hidden_;
  double delta_max_ = 0.4;
  std::vector<double> params_;
};

void save_policy(const PolicyNet& net, const std::string& path);
PolicyNet load_policy(const std::string& path);

}  // namespace h2h
