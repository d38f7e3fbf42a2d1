#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "h2h/lqr.hpp"
#include "h2h/observation.hpp"
#include "h2h/policy_net.hpp"
#include "h2h/race_env.hpp"

namespace h2h {

/// Low-level controller of one car.
class Driver {
 public:
  virtual ~Driver() = default;
  virtual std::string name() const = 0;
  /// Called before every race.
  virtual void reset(const RaceEnv& env, int self, std::uint64_t seed);
  virtual Control act(const RaceEnv& env, int self) = 0;
  /// Whether the race should feed this driver high-level planner targets.
  virtual bool uses_planner() const { return false; }
};

/// Never moves.
class FrozenDriver : public Driver {
 public:
  std::string name() const override { return "frozen"; }
  Control act(const RaceEnv& env, int self) override;
};

/// Pure pursuit along the centerline at a fixed lateral offset and cruise speed, with
/// optional seeded actuator noise.
class ScriptedDriver : public Driver {
 public:
  struct Options {
    double target_speed = 3.0;  // m/s
    double lookahead = 1.2;     // m
    double kp_speed = 0.8;
    /// Follow the lateral offset the car had at reset instead of the centerline.
    bool hold_start_lane = true;
    double steer_noise = 0.0;     // rad, standard deviation
    double throttle_noise = 0.0;  // standard deviation
  };

  ScriptedDriver();
  explicit ScriptedDriver(Options options);

  std::string name() const override { return "scripted"; }
  void reset(const RaceEnv& env, int self, std::uint64_t seed) override;
  Control act(const RaceEnv& env, int self) override;

 private:
  Options options_;
  double offset_ = 0.0;
  std::mt19937_64 rng_;
};

/// Raceline LQR tracker. In hierarchical mode it follows the planner's lane and speed
/// targets; otherwise it follows the raceline at the profile speed.
class LqrDriver : public Driver {
 public:
  explicit LqrDriver(bool hierarchical = true, LqrConfig config = {});

  std::string name() const override { return hierarchical_ ? "lqr" : "lqr-raceline"; }
  void reset(const RaceEnv& env, int self, std::uint64_t seed) override;
  Control act(const RaceEnv& env, int self) override;
  bool uses_planner() const override { return hierarchical_; }

 private:
  bool hierarchical_;
  LqrConfig config_;
  std::map<const Raceline*, std::unique_ptr<LqrTracker>> trackers_;
  const LqrTracker* tracker_ = nullptr;
};

/// Neural policy. Hierarchical policies see planner targets; end-to-end policies see the
/// raceline-lane default target at the default speed window.
class PolicyDriver : public Driver {
 public:
  PolicyDriver(PolicyNet net, bool hierarchical);

  std::string name() const override { return hierarchical_ ? "policy" : "e2e"; }
  Control act(const RaceEnv& env, int self) override;
  bool uses_planner() const override { return hierarchical_; }

 private:
  PolicyNet net_;
  bool hierarchical_;
};

/// Observation of agent `self` as a policy sees it.
Observation observe(const RaceEnv& env, int self, bool hierarchical);

/// Parses "lqr", "lqr-raceline", "scripted", "frozen", "policy:PATH" or "e2e:PATH".
std::unique_ptr<Driver> make_driver(const std::string& spec);

}  // namespace h2h
