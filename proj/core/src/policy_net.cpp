#include "h2h/policy_net.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "h2h/errors.hpp"

namespace h2h {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

constexpr char kMagic[8] = {'H', '2', 'H', 'P', 'O', 'L', 'V', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

struct PolicyNet::Cache {
  std::vector<Eigen::VectorXd> activations;  // input followed by each hidden output
  double head_throttle = 0.0;
  double head_steer = 0.0;
};

PolicyNet::PolicyNet(int input_size, std::vector<int> hidden, double delta_max)
    : input_size_(input_size), hidden_(std::move(hidden)), delta_max_(delta_max) {
  if (input_size_ < 1) throw ConfigError("policy input size must be positive");
  for (int h : hidden_) {
    if (h < 1) throw ConfigError("hidden layer sizes must be positive");
  }
  if (!(delta_max_ > 0.0)) throw ConfigError("delta_max must be positive");
  params_.assign(parameter_count(input_size_, hidden_), 0.0);
}

PolicyNet PolicyNet::standard(double delta_max) { return PolicyNet(42, std::vector<int>(8, 128), delta_max); }

std::size_t PolicyNet::parameter_count(int input_size, const std::vector<int>& hidden) {
  std::size_t n = 0;
  int prev = input_size;
  for (int h : hidden) {
    n += static_cast<std::size_t>(h) * static_cast<std::size_t>(prev + 1);
    prev = h;
  }
  return n + 3 * static_cast<std::size_t>(prev + 1);
}

void PolicyNet::set_params(std::vector<double> params) {
  if (params.size() != params_.size()) throw ConfigError("parameter vector length does not match the layer sizes");
  params_ = std::move(params);
}

void PolicyNet::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t offset = 0;
  int prev = input_size_;
  const auto fill = [&](int out, int in, double scale) {
    std::normal_distribution<double> dist(0.0, scale / std::sqrt(static_cast<double>(in)));
    for (int i = 0; i < out * in; ++i) params_[offset++] = dist(rng);
    for (int i = 0; i < out; ++i) params_[offset++] = 0.0;
  };
  for (int h : hidden_) {
    fill(h, prev, 1.0);
    prev = h;
  }
  fill(2, prev, 0.01);
  fill(1, prev, 1.0);
}

PolicyOutput PolicyNet::run(std::span<const double> input, Cache* cache) const {
  if (input.size() != static_cast<std::size_t>(input_size_)) throw ConfigError("policy input length mismatch");
  if (params_.size() != parameter_count(input_size_, hidden_)) throw ConfigError("policy parameter length mismatch");
  Eigen::VectorXd x = ConstVecMap(input.data(), input_size_);
  if (cache != nullptr) cache->activations = {x};
  std::size_t offset = 0;
  int prev = input_size_;
  for (int h : hidden_) {
    const ConstMatMap w(params_.data() + offset, h, prev);
    offset += static_cast<std::size_t>(h * prev);
    const ConstVecMap b(params_.data() + offset, h);
    offset += static_cast<std::size_t>(h);
    x = (w * x + b).array().tanh().matrix();
    if (cache != nullptr) cache->activations.push_back(x);
    prev = h;
  }
  const ConstMatMap wp(params_.data() + offset, 2, prev);
  offset += static_cast<std::size_t>(2 * prev);
  const ConstVecMap bp(params_.data() + offset, 2);
  offset += 2;
  const ConstMatMap wv(params_.data() + offset, 1, prev);
  offset += static_cast<std::size_t>(prev);
  const double bv = params_[offset];
  const Eigen::Vector2d z = wp * x + bp;
  PolicyOutput out;
  out.throttle = std::tanh(z[0]);
  out.steer = std::tanh(z[1]);
  out.value = (wv * x)(0) + bv;
  if (cache != nullptr) {
    cache->head_throttle = out.throttle;
    cache->head_steer = out.steer;
  }
  return out;
}

PolicyOutput PolicyNet::evaluate(std::span<const double> input) const { return run(input, nullptr); }

Control PolicyNet::forward(std::span<const double> input) const {
  const PolicyOutput o = run(input, nullptr);
  Control u;
  u.throttle = o.throttle;
  u.steer = delta_max_ * o.steer;
  return u;
}

void PolicyNet::backward(std::span<const double> input, double g_throttle, double g_steer, double g_value,
                         std::span<double> grad) const {
  if (grad.size() != params_.size()) throw ConfigError("gradient buffer length mismatch");
  Cache cache;
  run(input, &cache);

  // Offsets of every layer's weights.
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  int prev = input_size_;
  for (int h : hidden_) {
    offsets.push_back(offset);
    offset += static_cast<std::size_t>(h * (prev + 1));
    prev = h;
  }
  const std::size_t policy_offset = offset;
  const std::size_t value_offset = offset + static_cast<std::size_t>(2 * (prev + 1));

  const Eigen::VectorXd& top = cache.activations.back();
  const Eigen::Vector2d dz(g_throttle * (1.0 - cache.head_throttle * cache.head_throttle),
                           g_steer * (1.0 - cache.head_steer * cache.head_steer));
  MatMap(grad.data() + policy_offset, 2, prev) += dz * top.transpose();
  VecMap(grad.data() + policy_offset + 2 * prev, 2) += dz;
  MatMap(grad.data() + value_offset, 1, prev) += g_value * top.transpose();
  grad[value_offset + static_cast<std::size_t>(prev)] += g_value;

  Eigen::VectorXd dx = ConstMatMap(params_.data() + policy_offset, 2, prev).transpose() * dz +
                       g_value * ConstMatMap(params_.data() + value_offset, 1, prev).transpose();
  for (int l = static_cast<int>(hidden_.size()) - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    const int out = hidden_[li];
    const int in = l == 0 ? input_size_ : hidden_[li - 1];
    const Eigen::VectorXd& y = cache.activations[li + 1];
    const Eigen::VectorXd& x = cache.activations[li];
    const Eigen::VectorXd dpre = dx.array() * (1.0 - y.array().square());
    MatMap(grad.data() + offsets[li], out, in) += dpre * x.transpose();
    VecMap(grad.data() + offsets[li] + static_cast<std::size_t>(out * in), out) += dpre;
    if (l > 0) dx = ConstMatMap(params_.data() + offsets[li], out, in).transpose() * dpre;
  }
}

namespace {

template <typename T>
void put(std::ofstream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ConfigError("truncated policy checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_policy(const PolicyNet& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write policy checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.input_size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.hidden().size()));
  for (int h : net.hidden()) put<std::uint32_t>(out, static_cast<std::uint32_t>(h));
  put<double>(out, net.delta_max());
  put<std::uint64_t>(out, net.parameter_count());
  for (double p : net.params()) put<double>(out, p);
  if (!out) throw ConfigError("failed writing policy checkpoint: " + path);
}

PolicyNet load_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open policy checkpoint: " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ConfigError("not a policy checkpoint: " + path);
  }
  if (get<std::uint32_t>(in) != kVersion) throw ConfigError("unsupported policy checkpoint version");
  const auto input = static_cast<int>(get<std::uint32_t>(in));
  const auto layers = get<std::uint32_t>(in);
  if (layers > 1024) throw ConfigError("implausible layer count in policy checkpoint");
  std::vector<int> hidden;
  for (std::uint32_t i = 0; i < layers; ++i) hidden.push_back(static_cast<int>(get<std::uint32_t>(in)));
  const double delta_max = get<double>(in);
  PolicyNet net(input, hidden, delta_max);
  if (get<std::uint64_t>(in) != net.parameter_count()) throw ConfigError("policy checkpoint parameter count mismatch");
  std::vector<double> params(net.parameter_count());
  for (double& p : params) p = get<double>(in);
  net.set_params(std::move(params));
  return net;
}

}  // namespace h2h
